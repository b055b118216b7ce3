#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "oto/dataset/manifest.hpp"

namespace oto {

struct SplitSpec {
  std::array<double, 3> ratios{0.70, 0.15, 0.15};  // train, val, test
  std::uint64_t seed = 0;
  bool stratified = true;

  /// Throws InvalidArgument unless each ratio is in (0, 1) and they sum to 1 +- 1e-9.
  void validate() const;
};

struct SplitParts {
  DatasetManifest train;
  DatasetManifest val;
  DatasetManifest test;
};

/// Per class (or over the whole manifest when not stratified): shuffle, give
/// each part floor(ratio * n), then hand leftover records out one at a time,
/// first to train and then to the part with the largest fractional share.
/// Every part's size stays within 1 of ratio * n. Throws TooFewRecords when
/// any part would be empty for a class.
SplitParts stratified_split(const DatasetManifest& manifest, const SplitSpec& spec);

/// Two-way stratified holdout with the same allocation rule; used to carve a
/// validation set from a cross-validation training fold.
std::pair<DatasetManifest, DatasetManifest> holdout_split(const DatasetManifest& manifest,
                                                          double holdout_fraction, std::uint64_t seed);

struct Fold {
  DatasetManifest train;
  DatasetManifest test;
};

/// Stratified k-fold: records of each class are shuffled and dealt round-robin
/// onto folds, the dealing position carrying over from class to class.
std::vector<Fold> make_folds(const DatasetManifest& manifest, int k, std::uint64_t seed);

}  // namespace oto
