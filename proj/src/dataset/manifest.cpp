#include "oto/dataset/manifest.hpp"

#include <json.hpp>
#include <unordered_set>

#include "oto/core/error.hpp"
#include "oto/core/hash.hpp"
#include "oto/dataset/image.hpp"

namespace oto {

namespace fs = std::filesystem;
using nlohmann::json;

DatasetManifest DatasetManifest::from_records(std::vector<ImageRecord> records) {
  DatasetManifest m;
  m.records = std::move(records);
  for (const auto& r : m.records) ++m.class_counts[code(r.label)];
  return m;
}

const ImageRecord* DatasetManifest::find(std::string_view id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

namespace {

std::string field_string(const json& rec, const char* key, std::size_t index) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) {
    throw ParseError("record " + std::to_string(index) + ": field '" + key + "' missing or not a string");
  }
  return it->get<std::string>();
}

}  // namespace

DatasetManifest parse_manifest(std::string_view json_text, const fs::path& base_dir, ManifestLoadOptions options) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array()) {
    throw ParseError("manifest must be an object with a 'records' array");
  }

  std::vector<ImageRecord> records;
  std::unordered_set<std::string> seen;
  std::size_t index = 0;
  for (const auto& rec : doc["records"]) {
    if (!rec.is_object()) throw ParseError("record " + std::to_string(index) + " is not an object");
    ImageRecord r;
    r.id = field_string(rec, "id", index);
    const auto path_str = field_string(rec, "image_path", index);
    const auto label_str = field_string(rec, "label", index);
    r.summary = field_string(rec, "summary", index);
    r.source = rec.contains("source") && rec["source"].is_string() ? rec["source"].get<std::string>() : "";

    if (r.id.empty()) throw ValidationError("record " + std::to_string(index) + " has an empty id");
    if (!seen.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "'");
    auto label = parse_label(label_str);
    if (!label) throw ValidationError("record '" + r.id + "': unknown class '" + label_str + "'");
    r.label = *label;
    if (r.summary.empty()) throw ValidationError("record '" + r.id + "': empty summary");

    fs::path p(path_str);
    r.image_path = p.is_absolute() ? p : (base_dir / p).lexically_normal();
    if (options.verify_images) {
      if (!fs::is_regular_file(r.image_path)) {
        throw ValidationError("record '" + r.id + "': missing image " + r.image_path.string());
      }
      try {
        (void)read_image(r.image_path);
      } catch (const DecodeError& e) {
        throw ValidationError("record '" + r.id + "': image does not decode (" + e.what() + ")");
      }
    }
    records.push_back(std::move(r));
    ++index;
  }
  return DatasetManifest::from_records(std::move(records));
}

DatasetManifest load_manifest(const fs::path& path, ManifestLoadOptions options) {
  std::string text;
  try {
    text = read_file_bytes(path);
  } catch (const IoError& e) {
    throw ParseError(e.what());
  }
  return parse_manifest(text, fs::absolute(path).parent_path(), options);
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path dir = fs::absolute(path).parent_path();
  json records = json::array();
  for (const auto& r : manifest.records) {
    fs::path rel = r.image_path.is_absolute() ? r.image_path.lexically_relative(dir) : r.image_path;
    if (rel.empty()) rel = r.image_path;
    records.push_back({{"id", r.id},
                       {"image_path", rel.generic_string()},
                       {"label", std::string(label_name(r.label))},
                       {"summary", r.summary},
                       {"source", r.source}});
  }
  json doc = {{"records", records}};
  write_file_bytes(path, doc.dump(2) + "\n");
}

}  // namespace oto
