#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oto/dataset/image.hpp"

namespace oto {

/// 64-bit difference hash: grayscale (BT.601 luma), area-resample to 9x8,
/// bit (row * 8 + col) set when pixel (col) is brighter than pixel (col + 1).
std::uint64_t difference_hash(const RgbImage& image);

int hamming_distance(std::uint64_t a, std::uint64_t b);

struct DuplicatePair {
  std::filesystem::path first;
  std::filesystem::path second;
  int distance = 0;
};

struct DedupFailure {
  std::filesystem::path path;
  std::string message;
};

struct DedupResult {
  std::vector<DuplicatePair> pairs;  // ascending by distance, then paths
  std::vector<DedupFailure> failures;
};

inline constexpr int kDefaultDedupThreshold = 8;

/// Hashes every .png/.jpg/.jpeg file directly inside `image_dir` and reports
/// pairs within `hamming_threshold`. Files that fail to decode are listed in
/// `failures` and skipped.
DedupResult dedup_scan(const std::filesystem::path& image_dir, int hamming_threshold = kDefaultDedupThreshold);

}  // namespace oto
