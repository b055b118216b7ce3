#pragma once

#include <limits>
#include <vector>

#include "oto/core/eigen.hpp"

namespace oto::nn {

// Feature maps are channels x (height * width) row-major matrices: each row is
// one contiguous channel plane.

struct ConvGeometry {
  int in_channels = 0;
  int in_h = 0;
  int in_w = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int out_h = 0;
  int out_w = 0;

  static ConvGeometry make(int channels, int h, int w, int kernel, int stride, int padding) {
    return {channels, h, w, kernel, stride, padding, (h + 2 * padding - kernel) / stride + 1,
            (w + 2 * padding - kernel) / stride + 1};
  }
  Eigen::Index patch_size() const { return static_cast<Eigen::Index>(in_channels) * kernel * kernel; }
  Eigen::Index out_pixels() const { return static_cast<Eigen::Index>(out_h) * out_w; }
};

/// Unfolds every kernel window into a column: row (c * k + ky) * k + kx,
/// column oy * out_w + ox. Out-of-bounds taps read zero.
template <class S>
void im2col(const Mat<S>& x, const ConvGeometry& g, Mat<S>& col) {
  col.resize(g.patch_size(), g.out_pixels());
  const Eigen::Index plane = static_cast<Eigen::Index>(g.in_h) * g.in_w;
  S* dst = col.data();
  for (int c = 0; c < g.in_channels; ++c) {
    const S* src = x.data() + c * plane;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.padding + ky;
          S* d = dst + oy * g.out_w;
          if (iy < 0 || iy >= g.in_h) {
            std::fill(d, d + g.out_w, S(0));
            continue;
          }
          const S* srow = src + static_cast<Eigen::Index>(iy) * g.in_w;
          int ix = kx - g.padding;
          for (int ox = 0; ox < g.out_w; ++ox, ix += g.stride) {
            d[ox] = (ix >= 0 && ix < g.in_w) ? srow[ix] : S(0);
          }
        }
        dst += g.out_pixels();
      }
    }
  }
}

/// Adjoint of im2col: scatters column gradients back onto the input plane.
template <class S>
void col2im(const Mat<S>& col, const ConvGeometry& g, Mat<S>& dx) {
  const Eigen::Index plane = static_cast<Eigen::Index>(g.in_h) * g.in_w;
  dx = Mat<S>::Zero(g.in_channels, plane);
  const S* src = col.data();
  for (int c = 0; c < g.in_channels; ++c) {
    S* dplane = dx.data() + c * plane;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.in_h) continue;
          const S* s = src + oy * g.out_w;
          S* drow = dplane + static_cast<Eigen::Index>(iy) * g.in_w;
          int ix = kx - g.padding;
          for (int ox = 0; ox < g.out_w; ++ox, ix += g.stride) {
            if (ix >= 0 && ix < g.in_w) drow[ix] += s[ox];
          }
        }
        src += g.out_pixels();
      }
    }
  }
}

/// y = W * im2col(x) + b, with W of shape out x (in * k * k) and b of shape 1 x out.
template <class S>
Mat<S> conv2d_forward(const Mat<S>& x, const ConvGeometry& g, const Mat<S>& weight, const Mat<S>& bias,
                      Mat<S>& col) {
  im2col(x, g, col);
  Mat<S> y(weight.rows(), g.out_pixels());
  y.noalias() = weight * col;
  y.colwise() += bias.row(0).transpose();
  return y;
}

/// Accumulates weight/bias gradients; returns dx when `need_dx`, else an empty matrix.
template <class S>
Mat<S> conv2d_backward(const Mat<S>& dy, const ConvGeometry& g, const Mat<S>& weight, const Mat<S>& col,
                       Mat<S>& dweight, Mat<S>& dbias, bool need_dx) {
  dweight.noalias() += dy * col.transpose();
  dbias.row(0) += dy.rowwise().sum().transpose();
  Mat<S> dx;
  if (need_dx) {
    Mat<S> dcol(col.rows(), col.cols());
    dcol.noalias() = weight.transpose() * dy;
    col2im(dcol, g, dx);
  }
  return dx;
}

template <class S>
Mat<S> maxpool_forward(const Mat<S>& x, const ConvGeometry& g, std::vector<Eigen::Index>& argmax) {
  Mat<S> y(g.in_channels, g.out_pixels());
  argmax.resize(static_cast<std::size_t>(y.size()));
  const Eigen::Index plane = static_cast<Eigen::Index>(g.in_h) * g.in_w;
  for (int c = 0; c < g.in_channels; ++c) {
    const S* src = x.data() + c * plane;
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox) {
        S best = -std::numeric_limits<S>::infinity();
        Eigen::Index best_idx = -1;
        for (int ky = 0; ky < g.kernel; ++ky) {
          const int iy = oy * g.stride - g.padding + ky;
          if (iy < 0 || iy >= g.in_h) continue;
          for (int kx = 0; kx < g.kernel; ++kx) {
            const int ix = ox * g.stride - g.padding + kx;
            if (ix < 0 || ix >= g.in_w) continue;
            const Eigen::Index idx = static_cast<Eigen::Index>(iy) * g.in_w + ix;
            if (best_idx < 0 || src[idx] > best) {
              best = src[idx];
              best_idx = idx;
            }
          }
        }
        const Eigen::Index o = static_cast<Eigen::Index>(oy) * g.out_w + ox;
        y(c, o) = best;
        argmax[static_cast<std::size_t>(c * g.out_pixels() + o)] = c * plane + best_idx;
      }
    }
  }
  return y;
}

template <class S>
Mat<S> maxpool_backward(const Mat<S>& dy, const ConvGeometry& g, const std::vector<Eigen::Index>& argmax) {
  Mat<S> dx = Mat<S>::Zero(g.in_channels, static_cast<Eigen::Index>(g.in_h) * g.in_w);
  const S* d = dy.data();
  S* out = dx.data();
  for (std::size_t i = 0; i < argmax.size(); ++i) out[argmax[i]] += d[i];
  return dx;
}

/// channels x pixels -> 1 x channels
template <class S>
Mat<S> global_avg_pool_forward(const Mat<S>& x) {
  return x.rowwise().mean().transpose();
}

template <class S>
Mat<S> global_avg_pool_backward(const Mat<S>& dy, Eigen::Index pixels) {
  Mat<S> dx(dy.cols(), pixels);
  for (Eigen::Index c = 0; c < dy.cols(); ++c) dx.row(c).setConstant(dy(0, c) / static_cast<S>(pixels));
  return dx;
}

template <class S>
Mat<S> relu(const Mat<S>& x) {
  return x.cwiseMax(S(0));
}

/// Gradient through ReLU given its output.
template <class S>
Mat<S> relu_backward(const Mat<S>& dy, const Mat<S>& y) {
  return (y.array() > S(0)).select(dy, S(0));
}

}  // namespace oto::nn
