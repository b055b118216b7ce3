#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "oto/nn/parameters.hpp"

namespace oto::nn {

inline constexpr int kCheckpointFormatVersion = 1;

/// On-disk model: `meta.json` (format version, caller metadata and the
/// parameter table) plus `weights.bin` (little-endian float32, tensors
/// concatenated in table order).
struct ModelCheckpoint {
  nlohmann::json meta;
  ParameterStore<float> params;
};

/// `meta` may carry any caller fields (kind, graph, config, class names, seed,
/// vocabulary); "format_version" and "parameters" are filled in here.
void save_checkpoint(const std::filesystem::path& dir, const nlohmann::json& meta, const ParameterStore<float>& params);

/// Throws CheckpointError on missing files, version mismatch or size mismatch.
ModelCheckpoint load_checkpoint(const std::filesystem::path& dir);

/// SHA-256 over meta.json followed by weights.bin.
std::string checkpoint_hash(const std::filesystem::path& dir);

/// Throws CheckpointError unless `loaded` has exactly the names and shapes of `expected`.
template <class S>
void require_same_layout(const ParameterStore<float>& loaded, const ParameterStore<S>& expected) {
  if (loaded.size() != expected.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(loaded.size()) + " tensors, model expects " +
                          std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    if (loaded[i].name != expected[i].name || loaded[i].shape != expected[i].shape) {
      throw CheckpointError("tensor " + std::to_string(i) + " is '" + loaded[i].name + "', model expects '" +
                            expected[i].name + "' with matching shape");
    }
  }
}

}  // namespace oto::nn
