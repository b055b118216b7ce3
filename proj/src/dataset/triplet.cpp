#include "oto/dataset/triplet.hpp"

#include <algorithm>
#include <string>

#include "oto/core/error.hpp"

namespace oto {

TripletIndices sample_triplet_indices(std::span<const int> labels, std::size_t anchor, Rng& rng) {
  if (anchor >= labels.size()) throw InvalidArgument("anchor index out of range");
  const int anchor_label = labels[anchor];
  const auto same = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), anchor_label));
  const std::size_t other = labels.size() - same;
  if (same < 2) {
    throw NoPositiveAvailable("anchor " + std::to_string(anchor) + " is the only record of class code " +
                              std::to_string(anchor_label));
  }
  if (other == 0) throw NoNegativeAvailable("no record outside class code " + std::to_string(anchor_label));

  // Rank among eligible records in manifest order.
  std::size_t pos_rank = rng.uniform_index(same - 1);
  std::size_t neg_rank = rng.uniform_index(other);
  TripletIndices t{anchor, 0, 0};
  bool have_pos = false, have_neg = false;
  for (std::size_t i = 0; i < labels.size() && !(have_pos && have_neg); ++i) {
    if (labels[i] == anchor_label) {
      if (i == anchor || have_pos) continue;
      if (pos_rank-- == 0) {
        t.positive = i;
        have_pos = true;
      }
    } else if (!have_neg && neg_rank-- == 0) {
      t.negative = i;
      have_neg = true;
    }
  }
  return t;
}

TripletIndices sample_triplet_indices(const DatasetManifest& manifest, std::size_t anchor, Rng& rng) {
  if (anchor >= manifest.size()) throw InvalidArgument("anchor index out of range");
  const auto anchor_label = manifest.records[anchor].label;
  if (manifest.count(anchor_label) < 2) {
    throw NoPositiveAvailable("anchor '" + manifest.records[anchor].id + "' is the only record of class " +
                              std::string(label_name(anchor_label)));
  }
  if (manifest.count(anchor_label) == manifest.size()) {
    throw NoNegativeAvailable("no record outside class " + std::string(label_name(anchor_label)));
  }
  const auto codes = class_codes(manifest);
  return sample_triplet_indices(codes, anchor, rng);
}

std::vector<int> class_codes(const DatasetManifest& manifest) {
  std::vector<int> out;
  out.reserve(manifest.size());
  for (const auto& r : manifest.records) out.push_back(code(r.label));
  return out;
}

Triplet sample_triplet(const DatasetManifest& manifest, std::string_view anchor_id, Rng& rng) {
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (manifest.records[i].id == anchor_id) {
      const auto t = sample_triplet_indices(manifest, i, rng);
      return {manifest.records[t.anchor], manifest.records[t.positive], manifest.records[t.negative]};
    }
  }
  throw InvalidArgument("unknown anchor id '" + std::string(anchor_id) + "'");
}

}  // namespace oto
