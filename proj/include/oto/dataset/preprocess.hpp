#pragma once

#include <array>
#include <string_view>

#include "oto/core/eigen.hpp"
#include "oto/dataset/image.hpp"

namespace oto {

enum class PreprocessMode { Classifier, Generator };

inline constexpr int kClassifierInputSize = 226;
inline constexpr int kGeneratorResizeShort = 232;
inline constexpr int kGeneratorInputSize = 224;
inline constexpr std::array<float, 3> kGeneratorMean = {0.481f, 0.458f, 0.408f};
inline constexpr std::array<float, 3> kGeneratorStd = {0.269f, 0.261f, 0.276f};

/// Channel-major image tensor: `data` is channels x (height*width), each row a
/// contiguous plane.
struct ImageTensor {
  MatF data;
  int height = 0;
  int width = 0;

  int channels() const { return static_cast<int>(data.rows()); }
};

/// Bilinear resampling with half-pixel centres and edge clamping. Output values
/// stay in the 0..255 range of the input.
MatF resize_bilinear(const RgbImage& image, int out_width, int out_height);

/// Classifier mode: bilinear resize to 226x226, values in [0, 1].
/// Generator mode: resize short side to 232, centre-crop 224x224, scale to
/// [0, 1], then per-channel standardisation.
ImageTensor preprocess_image(const RgbImage& image, PreprocessMode mode);
ImageTensor preprocess_image(std::string_view encoded_bytes, PreprocessMode mode);

}  // namespace oto
