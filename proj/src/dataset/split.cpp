#include "oto/dataset/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "oto/core/error.hpp"
#include "oto/core/random.hpp"

namespace oto {

namespace {

// Per-part record counts for a group of n: floors first, then the leftover
// units go to train (if its share is fractional) and then by largest
// fractional share. No part moves a full unit from ratio * n.
std::vector<std::size_t> allocate(std::size_t n, const std::vector<double>& ratios) {
  const std::size_t parts = ratios.size();
  std::vector<std::size_t> counts(parts);
  std::vector<double> frac(parts);
  std::size_t used = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[i] = exact - static_cast<double>(counts[i]);
    used += counts[i];
  }
  std::size_t leftover = n - used;
  if (leftover > 0 && frac[0] > 1e-9) {
    ++counts[0];
    frac[0] = -1.0;
    --leftover;
  }
  while (leftover > 0) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < parts; ++i) {
      if (frac[i] > frac[best]) best = i;
    }
    ++counts[best];
    frac[best] = -1.0;
    --leftover;
  }
  return counts;
}

std::vector<std::vector<std::size_t>> group_indices(const DatasetManifest& manifest, bool stratified) {
  std::vector<std::vector<std::size_t>> groups(stratified ? kNumClasses : 1);
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    groups[stratified ? code(manifest.records[i].label) : 0].push_back(i);
  }
  return groups;
}

std::vector<DatasetManifest> allocate_parts(const DatasetManifest& manifest, const std::vector<double>& ratios,
                                            std::uint64_t seed, bool stratified) {
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> assigned(ratios.size());
  const auto groups = group_indices(manifest, stratified);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto members = groups[g];
    if (members.empty()) continue;
    rng.shuffle(std::span<std::size_t>(members));
    const auto counts = allocate(members.size(), ratios);
    for (std::size_t p = 0; p < counts.size(); ++p) {
      if (counts[p] == 0) {
        const std::string what = stratified ? "class " + std::string(label_name(label_from_code(static_cast<int>(g))))
                                            : std::string("dataset");
        throw TooFewRecords(what + " has " + std::to_string(members.size()) +
                            " records, not enough to populate every split part");
      }
    }
    std::size_t cursor = 0;
    for (std::size_t p = 0; p < counts.size(); ++p) {
      for (std::size_t j = 0; j < counts[p]; ++j) assigned[p].push_back(members[cursor++]);
    }
  }
  std::vector<DatasetManifest> parts;
  for (auto& idx : assigned) {
    std::sort(idx.begin(), idx.end());
    std::vector<ImageRecord> recs;
    recs.reserve(idx.size());
    for (auto i : idx) recs.push_back(manifest.records[i]);
    parts.push_back(DatasetManifest::from_records(std::move(recs)));
  }
  return parts;
}

}  // namespace

void SplitSpec::validate() const {
  double sum = 0.0;
  static constexpr const char* kNames[] = {"train_ratio", "val_ratio", "test_ratio"};
  for (int i = 0; i < 3; ++i) {
    if (!(ratios[i] > 0.0 && ratios[i] < 1.0)) {
      throw InvalidArgument(std::string(kNames[i]) + " must lie in (0, 1), got " + std::to_string(ratios[i]));
    }
    sum += ratios[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must sum to 1, got " + std::to_string(sum));
  }
}

SplitParts stratified_split(const DatasetManifest& manifest, const SplitSpec& spec) {
  spec.validate();
  auto parts = allocate_parts(manifest, {spec.ratios[0], spec.ratios[1], spec.ratios[2]}, spec.seed, spec.stratified);
  return {std::move(parts[0]), std::move(parts[1]), std::move(parts[2])};
}

std::pair<DatasetManifest, DatasetManifest> holdout_split(const DatasetManifest& manifest, double holdout_fraction,
                                                          std::uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw InvalidArgument("holdout fraction must lie in (0, 1)");
  }
  auto parts = allocate_parts(manifest, {1.0 - holdout_fraction, holdout_fraction}, seed, true);
  return {std::move(parts[0]), std::move(parts[1])};
}

std::vector<Fold> make_folds(const DatasetManifest& manifest, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k must be at least 2, got " + std::to_string(k));
  for (auto label : kAllLabels) {
    const auto n = manifest.count(label);
    if (n > 0 && n < static_cast<std::size_t>(k)) {
      throw TooFewRecords("class " + std::string(label_name(label)) + " has " + std::to_string(n) +
                          " records, fewer than k=" + std::to_string(k));
    }
  }
  if (manifest.size() < static_cast<std::size_t>(k)) throw TooFewRecords("fewer records than folds");

  Rng rng(seed);
  std::vector<int> fold_of(manifest.size(), 0);
  std::size_t dealer = 0;
  for (auto members : group_indices(manifest, true)) {
    rng.shuffle(std::span<std::size_t>(members));
    for (auto i : members) fold_of[i] = static_cast<int>(dealer++ % static_cast<std::size_t>(k));
  }

  std::vector<Fold> folds(k);
  std::vector<std::vector<ImageRecord>> train(k), test(k);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      (f == fold_of[i] ? test[f] : train[f]).push_back(manifest.records[i]);
    }
  }
  for (int f = 0; f < k; ++f) {
    folds[f].train = DatasetManifest::from_records(std::move(train[f]));
    folds[f].test = DatasetManifest::from_records(std::move(test[f]));
  }
  return folds;
}

}  // namespace oto
