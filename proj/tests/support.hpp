#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "oto/classifier/resnet.hpp"
#include "oto/dataset/manifest.hpp"
#include "oto/generator/transformer.hpp"

namespace oto::test {

namespace fs = std::filesystem;

fs::path fixture(const std::string& name);
nlohmann::json fixture_json(const std::string& name);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// In-memory manifest of `per_class` records per class with fake paths.
DatasetManifest fake_manifest(int per_class, const std::string& prefix = "r");

/// Synthetic images plus manifest.json under `dir`.
DatasetManifest write_tiny_dataset(const fs::path& dir, int per_class, int size = 48, std::uint64_t seed = 3);

classifier::ResNetConfig tiny_resnet();
generator::GeneratorConfig tiny_generator();

/// Checkpoints shared by one test process: a briefly trained classifier and
/// generator over a small synthetic set, built on first use.
struct TinyModels {
  fs::path manifest;
  fs::path classifier;
  fs::path generator;
  fs::path sample_png;
};
const TinyModels& tiny_models();

std::string slurp(const fs::path& path);

}  // namespace oto::test
