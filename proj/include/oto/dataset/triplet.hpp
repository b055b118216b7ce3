#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "oto/core/random.hpp"
#include "oto/dataset/manifest.hpp"

namespace oto {

struct Triplet {
  ImageRecord anchor;
  ImageRecord positive;
  ImageRecord negative;
};

/// Index form of a triplet into a manifest's record list.
struct TripletIndices {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
};

/// Positive drawn uniformly from the anchor's class (excluding the anchor),
/// negative uniformly from all records of other classes.
/// Throws NoPositiveAvailable / NoNegativeAvailable.
TripletIndices sample_triplet_indices(const DatasetManifest& manifest, std::size_t anchor, Rng& rng);

/// Same draw over bare class codes; the manifest form delegates here.
TripletIndices sample_triplet_indices(std::span<const int> labels, std::size_t anchor, Rng& rng);

std::vector<int> class_codes(const DatasetManifest& manifest);

Triplet sample_triplet(const DatasetManifest& manifest, std::string_view anchor_id, Rng& rng);

}  // namespace oto
