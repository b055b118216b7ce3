#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "oto/core/eigen.hpp"
#include "oto/core/error.hpp"

namespace oto::nn {

// Row-wise layers: inputs are n x features, one sample or token per row.

/// y = x W^T + b with W of shape out x in and b of shape 1 x out.
template <class S>
Mat<S> dense_forward(const Mat<S>& x, const Mat<S>& weight, const Mat<S>& bias) {
  Mat<S> y(x.rows(), weight.rows());
  y.noalias() = x * weight.transpose();
  y.rowwise() += bias.row(0);
  return y;
}

template <class S>
Mat<S> dense_backward(const Mat<S>& dy, const Mat<S>& x, const Mat<S>& weight, Mat<S>& dweight, Mat<S>& dbias) {
  dweight.noalias() += dy.transpose() * x;
  dbias.row(0) += dy.colwise().sum();
  Mat<S> dx(dy.rows(), weight.cols());
  dx.noalias() = dy * weight;
  return dx;
}

inline constexpr double kLayerNormEps = 1e-5;

template <class S>
struct LayerNormCache {
  Mat<S> normalized;
  Vec<S> inv_std;
};

template <class S>
Mat<S> layer_norm_forward(const Mat<S>& x, const Mat<S>& gamma, const Mat<S>& beta, LayerNormCache<S>* cache) {
  const Eigen::Index d = x.cols();
  Mat<S> xhat(x.rows(), d);
  Vec<S> inv(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const S mean = x.row(r).mean();
    const S var = (x.row(r).array() - mean).square().mean();
    inv(r) = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEps));
    xhat.row(r) = (x.row(r).array() - mean) * inv(r);
  }
  Mat<S> y = (xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv);
  }
  return y;
}

template <class S>
Mat<S> layer_norm_backward(const Mat<S>& dy, const Mat<S>& gamma, const LayerNormCache<S>& cache, Mat<S>& dgamma,
                           Mat<S>& dbeta) {
  const auto& xhat = cache.normalized;
  dgamma.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbeta.row(0) += dy.colwise().sum();
  const S d = static_cast<S>(dy.cols());
  Mat<S> dxhat = dy.array().rowwise() * gamma.row(0).array();
  Mat<S> dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const S sum = dxhat.row(r).sum();
    const S dot = dxhat.row(r).dot(xhat.row(r));
    dx.row(r) = (cache.inv_std(r) / d) * (d * dxhat.row(r).array() - sum - xhat.row(r).array() * dot);
  }
  return dx;
}

/// Numerically stable row-wise softmax.
template <class S>
Mat<S> softmax_rows(const Mat<S>& logits) {
  Mat<S> p(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const S m = logits.row(r).maxCoeff();
    p.row(r) = (logits.row(r).array() - m).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

template <class S>
Mat<S> log_softmax_rows(const Mat<S>& logits) {
  Mat<S> out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const S m = logits.row(r).maxCoeff();
    const S lse = m + std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

template <class S>
Mat<S> embedding_forward(const Mat<S>& table, std::span<const int> ids) {
  Mat<S> out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) throw ShapeError("token id out of vocabulary range");
    out.row(static_cast<Eigen::Index>(i)) = table.row(ids[i]);
  }
  return out;
}

template <class S>
void embedding_backward(const Mat<S>& dy, std::span<const int> ids, Mat<S>& dtable) {
  for (std::size_t i = 0; i < ids.size(); ++i) dtable.row(ids[i]) += dy.row(static_cast<Eigen::Index>(i));
}

}  // namespace oto::nn
