#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "oto/dataset/labels.hpp"

namespace oto {

struct ImageRecord {
  std::string id;
  /// Absolute once loaded; relative paths in the file resolve against the manifest directory.
  std::filesystem::path image_path;
  ClassLabel label = ClassLabel::Normal;
  std::string summary;
  std::string source;

  bool operator==(const ImageRecord&) const = default;
};

struct DatasetManifest {
  std::vector<ImageRecord> records;
  std::array<std::size_t, kNumClasses> class_counts{};

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  /// Builds a manifest and recomputes class counts.
  static DatasetManifest from_records(std::vector<ImageRecord> records);

  std::size_t count(ClassLabel label) const { return class_counts[code(label)]; }
  const ImageRecord* find(std::string_view id) const;
};

struct ManifestLoadOptions {
  /// Check that each image file exists and decodes.
  bool verify_images = true;
};

/// Parses and validates a manifest JSON file. Throws ParseError for malformed
/// documents and ValidationError (naming the record) for contract violations.
DatasetManifest load_manifest(const std::filesystem::path& path, ManifestLoadOptions options = {});

/// Same as load_manifest on an in-memory document; `base_dir` anchors relative paths.
DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir,
                               ManifestLoadOptions options = {});

/// Writes the manifest with image paths made relative to the output directory.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace oto
