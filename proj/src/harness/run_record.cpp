#include "oto/harness/run_record.hpp"

#include "oto/core/hash.hpp"

namespace oto::harness {

nlohmann::json RunRecord::to_json() const {
  return {{"config", config},
          {"input_hash", input_hash},
          {"history", history_path.string()},
          {"checkpoint", checkpoint_path.string()},
          {"report", metrics::to_json(report)}};
}

std::string input_hash(const RunConfig& config, const DatasetManifest& manifest) {
  auto snapshot = config.to_json();
  snapshot.erase("manifest");
  std::string listing = git_blob_hash(snapshot.dump()) + " config\n";
  if (!config.manifest.empty()) listing += git_blob_hash(read_file_bytes(config.manifest)) + " manifest\n";
  for (const auto& r : manifest.records) {
    listing += git_blob_hash(read_file_bytes(r.image_path)) + " " + r.id + "\n";
  }
  return git_blob_hash(listing);
}

void write_run_record(const std::filesystem::path& path, const RunRecord& record) {
  if (std::filesystem::exists(path)) {
    throw AlreadyExists("run record " + path.string() + " exists; choose a fresh --out directory");
  }
  write_file_bytes(path, record.to_json().dump(2) + "\n");
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace oto::harness
