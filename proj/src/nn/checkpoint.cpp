#include "oto/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "oto/core/error.hpp"
#include "oto/core/hash.hpp"

namespace oto::nn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
  return v;
}

}  // namespace

void save_checkpoint(const fs::path& dir, const json& meta, const ParameterStore<float>& params) {
  json doc = meta;
  doc["format_version"] = kCheckpointFormatVersion;
  json table = json::array();
  std::string weights;
  weights.reserve(static_cast<std::size_t>(params.num_scalars()) * 4);
  for (const auto& t : params) {
    table.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", weights.size()}});
    const float* data = t.value.data();
    for (Eigen::Index i = 0; i < t.value.size(); ++i) {
      const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(data[i]));
      char buf[4];
      std::memcpy(buf, &bits, 4);
      weights.append(buf, 4);
    }
  }
  doc["parameters"] = table;
  fs::create_directories(dir);
  write_file_bytes(dir / "weights.bin", weights);
  write_file_bytes(dir / "meta.json", doc.dump(2) + "\n");
}

ModelCheckpoint load_checkpoint(const fs::path& dir) {
  ModelCheckpoint ckpt;
  std::string meta_text, weights;
  try {
    meta_text = read_file_bytes(dir / "meta.json");
    weights = read_file_bytes(dir / "weights.bin");
  } catch (const IoError& e) {
    throw CheckpointError(e.what());
  }
  try {
    ckpt.meta = json::parse(meta_text);
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("meta.json: ") + e.what());
  }
  if (ckpt.meta.value("format_version", -1) != kCheckpointFormatVersion) {
    throw CheckpointError("unsupported checkpoint format version");
  }
  if (!ckpt.meta.contains("parameters") || !ckpt.meta["parameters"].is_array()) {
    throw CheckpointError("meta.json has no parameter table");
  }
  try {
    for (const auto& entry : ckpt.meta["parameters"]) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<int>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto h = ckpt.params.add(name, shape);
      auto& value = ckpt.params[h].value;
      const std::size_t bytes = static_cast<std::size_t>(value.size()) * 4;
      if (offset + bytes > weights.size()) throw CheckpointError("weights.bin too short for '" + name + "'");
      for (Eigen::Index i = 0; i < value.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, weights.data() + offset + static_cast<std::size_t>(i) * 4, 4);
        value.data()[i] = std::bit_cast<float>(to_le(bits));
      }
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("parameter table: ") + e.what());
  } catch (const ShapeError& e) {
    throw CheckpointError(e.what());
  }
  if (static_cast<std::size_t>(ckpt.params.num_scalars()) * 4 != weights.size()) {
    throw CheckpointError("weights.bin size does not match the parameter table");
  }
  return ckpt;
}

std::string checkpoint_hash(const fs::path& dir) {
  try {
    return sha256_hex(read_file_bytes(dir / "meta.json") + read_file_bytes(dir / "weights.bin"));
  } catch (const IoError& e) {
    throw CheckpointError(e.what());
  }
}

}  // namespace oto::nn
