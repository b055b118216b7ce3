#include "oto/dataset/dedup.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>

#include "oto/core/error.hpp"

namespace oto {

namespace fs = std::filesystem;

std::uint64_t difference_hash(const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0) throw DecodeError("empty image");
  constexpr int kW = 9, kH = 8;
  std::array<double, kW * kH> cells{};
  for (int cy = 0; cy < kH; ++cy) {
    const int y0 = cy * image.height / kH;
    const int y1 = std::max(y0 + 1, (cy + 1) * image.height / kH);
    for (int cx = 0; cx < kW; ++cx) {
      const int x0 = cx * image.width / kW;
      const int x1 = std::max(x0 + 1, (cx + 1) * image.width / kW);
      double sum = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          sum += 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
        }
      }
      cells[cy * kW + cx] = sum / ((y1 - y0) * (x1 - x0));
    }
  }
  std::uint64_t hash = 0;
  for (int r = 0; r < kH; ++r) {
    for (int c = 0; c < kW - 1; ++c) {
      if (cells[r * kW + c] > cells[r * kW + c + 1]) hash |= std::uint64_t{1} << (r * 8 + c);
    }
  }
  return hash;
}

int hamming_distance(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

DedupResult dedup_scan(const fs::path& image_dir, int hamming_threshold) {
  if (!fs::is_directory(image_dir)) throw IoError("not a readable directory: " + image_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(image_dir)) {
    if (entry.is_regular_file() && has_image_extension(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  DedupResult result;
  std::vector<std::pair<fs::path, std::uint64_t>> hashes;
  for (const auto& f : files) {
    try {
      hashes.emplace_back(f, difference_hash(read_image(f)));
    } catch (const DecodeError& e) {
      result.failures.push_back({f, e.what()});
    }
  }
  for (std::size_t i = 0; i < hashes.size(); ++i) {
    for (std::size_t j = i + 1; j < hashes.size(); ++j) {
      const int d = hamming_distance(hashes[i].second, hashes[j].second);
      if (d <= hamming_threshold) result.pairs.push_back({hashes[i].first, hashes[j].first, d});
    }
  }
  std::stable_sort(result.pairs.begin(), result.pairs.end(),
                   [](const DuplicatePair& a, const DuplicatePair& b) { return a.distance < b.distance; });
  return result;
}

}  // namespace oto
