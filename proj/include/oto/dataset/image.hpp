#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace oto {

/// Decoded 8-bit RGB raster, interleaved row-major (y, x, channel).
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

enum class ImageFormat { Png, Jpeg, Unknown };

ImageFormat sniff_format(std::string_view bytes);

/// Decodes PNG or JPEG by signature. Grayscale is replicated to three channels
/// and alpha is dropped. Throws DecodeError.
RgbImage decode_image(std::string_view bytes);
RgbImage decode_image(std::string_view bytes, ImageFormat format);

RgbImage read_image(const std::filesystem::path& path);

std::string encode_png(const RgbImage& image);
std::string encode_jpeg(const RgbImage& image, int quality = 92);

void write_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace oto
