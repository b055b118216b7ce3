#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "oto/dataset/manifest.hpp"
#include "oto/harness/config.hpp"
#include "oto/metrics/report.hpp"

namespace oto::harness {

/// What one run consumed and produced. Written once as run.json.
struct RunRecord {
  nlohmann::json config;
  std::string input_hash;
  std::filesystem::path history_path;
  std::filesystem::path checkpoint_path;
  metrics::MetricsReport report;

  nlohmann::json to_json() const;
};

/// Git-style object id over the inputs: a listing of "<blob id> <name>" lines
/// for the resolved config, the manifest and every image in record order,
/// hashed as a blob.
std::string input_hash(const RunConfig& config, const DatasetManifest& manifest);

/// Throws AlreadyExists if `path` exists.
void write_run_record(const std::filesystem::path& path, const RunRecord& record);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace oto::harness
