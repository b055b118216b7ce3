#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "oto/classifier/trainer.hpp"
#include "oto/generator/model.hpp"
#include "oto/generator/trainer.hpp"

namespace oto::harness {

enum class Task { Classification, Generation };

std::string to_string(Task task);

/// Flat run description. Fields not given in the file take the defaults of
/// the task: classification 0.70/0.15/0.15, 100 epochs, batch 32, lr 1e-3;
/// generation 0.60/0.20/0.20, 50 epochs, batch 8, lr 3e-5.
struct RunConfig {
  Task task = Task::Classification;
  std::filesystem::path manifest;
  std::array<double, 3> split_ratios{0.70, 0.15, 0.15};
  int folds = 5;
  classifier::ClassifierTrainConfig classifier;
  generator::GeneratorTrainConfig generator;
  generator::DecodeConfig decode;

  int epochs() const { return task == Task::Classification ? classifier.epochs : generator.epochs; }
  std::uint64_t seed() const { return task == Task::Classification ? classifier.seed : generator.seed; }

  static RunConfig defaults(Task task);
  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Every applicable key, with resolved values.
  nlohmann::json to_json() const;
};

/// Parses a flat JSON object. Unknown keys, keys belonging to the other task
/// and ill-typed values raise ConfigError. A relative "manifest" resolves
/// against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig parse_run_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// `key=v1,v2,...` for one config key.
struct GridAxis {
  std::string key;
  std::vector<nlohmann::json> values;
};

/// Parses "key=v1,v2"; each value is read as JSON when it parses, else as a string.
GridAxis parse_grid_axis(const std::string& spec);

/// Cartesian product of the axes applied to `base`, last axis varying fastest.
/// Each entry is a flat config document.
std::vector<nlohmann::json> expand_grid(const nlohmann::json& base, const std::vector<GridAxis>& axes);

}  // namespace oto::harness
