#include "oto/dataset/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "oto/core/error.hpp"

namespace oto {

namespace {

struct Tap {
  int lo;
  int hi;
  float frac;
};

std::vector<Tap> bilinear_taps(int in_size, int out_size) {
  std::vector<Tap> taps(out_size);
  const double scale = static_cast<double>(in_size) / out_size;
  for (int i = 0; i < out_size; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
    const int lo = static_cast<int>(std::floor(src));
    taps[i] = {lo, std::min(lo + 1, in_size - 1), static_cast<float>(src - lo)};
  }
  return taps;
}

}  // namespace

MatF resize_bilinear(const RgbImage& image, int out_width, int out_height) {
  if (image.width <= 0 || image.height <= 0) throw DecodeError("empty image");
  if (out_width <= 0 || out_height <= 0) throw ShapeError("non-positive resize target");
  const auto xs = bilinear_taps(image.width, out_width);
  const auto ys = bilinear_taps(image.height, out_height);
  MatF out(3, static_cast<Eigen::Index>(out_width) * out_height);
  for (int y = 0; y < out_height; ++y) {
    const auto& ty = ys[y];
    for (int x = 0; x < out_width; ++x) {
      const auto& tx = xs[x];
      for (int c = 0; c < 3; ++c) {
        // a + f * (b - a) keeps constant regions exact.
        const float a = image.at(tx.lo, ty.lo, c);
        const float b = image.at(tx.hi, ty.lo, c);
        const float d0 = image.at(tx.lo, ty.hi, c);
        const float d1 = image.at(tx.hi, ty.hi, c);
        const float top = a + tx.frac * (b - a);
        const float bottom = d0 + tx.frac * (d1 - d0);
        out(c, static_cast<Eigen::Index>(y) * out_width + x) = top + ty.frac * (bottom - top);
      }
    }
  }
  return out;
}

ImageTensor preprocess_image(const RgbImage& image, PreprocessMode mode) {
  ImageTensor t;
  if (mode == PreprocessMode::Classifier) {
    t.data = resize_bilinear(image, kClassifierInputSize, kClassifierInputSize) / 255.0f;
    t.height = t.width = kClassifierInputSize;
    return t;
  }

  int rw, rh;
  if (image.width <= image.height) {
    rw = kGeneratorResizeShort;
    rh = static_cast<int>(static_cast<long long>(kGeneratorResizeShort) * image.height / image.width);
  } else {
    rh = kGeneratorResizeShort;
    rw = static_cast<int>(static_cast<long long>(kGeneratorResizeShort) * image.width / image.height);
  }
  const MatF resized = resize_bilinear(image, rw, rh);
  const int top = static_cast<int>(std::lround((rh - kGeneratorInputSize) / 2.0));
  const int left = static_cast<int>(std::lround((rw - kGeneratorInputSize) / 2.0));
  t.height = t.width = kGeneratorInputSize;
  t.data.resize(3, static_cast<Eigen::Index>(kGeneratorInputSize) * kGeneratorInputSize);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < kGeneratorInputSize; ++y) {
      for (int x = 0; x < kGeneratorInputSize; ++x) {
        const float v = resized(c, static_cast<Eigen::Index>(y + top) * rw + (x + left)) / 255.0f;
        t.data(c, static_cast<Eigen::Index>(y) * kGeneratorInputSize + x) =
            (v - kGeneratorMean[c]) / kGeneratorStd[c];
      }
    }
  }
  return t;
}

ImageTensor preprocess_image(std::string_view encoded_bytes, PreprocessMode mode) {
  return preprocess_image(decode_image(encoded_bytes), mode);
}

}  // namespace oto
