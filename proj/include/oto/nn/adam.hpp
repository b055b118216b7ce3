#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "oto/nn/parameters.hpp"

namespace oto::nn {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class S>
struct AdamState {
  AdamHyper hyper;
  std::int64_t t = 0;
  std::vector<Mat<S>> m;
  std::vector<Mat<S>> v;

  AdamState() = default;
  AdamState(const ParameterStore<S>& params, AdamHyper h) : hyper(h) {
    for (const auto& p : params) {
      m.push_back(Mat<S>::Zero(p.value.rows(), p.value.cols()));
      v.push_back(Mat<S>::Zero(p.value.rows(), p.value.cols()));
    }
  }
};

/// One bias-corrected Adam update from the gradients currently in `params`:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
///   theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
/// Non-finite gradients are not filtered; the trainer's loss guard catches them.
template <class S>
void adam_step(ParameterStore<S>& params, AdamState<S>& state) {
  if (state.m.size() != params.size()) throw ShapeError("Adam state does not match parameter set");
  ++state.t;
  const auto& hp = state.hyper;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  const S b1 = static_cast<S>(hp.beta1), b2 = static_cast<S>(hp.beta2);
  const S step = static_cast<S>(hp.lr / bc1);
  const S inv_bc2 = static_cast<S>(1.0 / bc2);
  const S eps = static_cast<S>(hp.eps);
  std::size_t i = 0;
  for (auto& p : params) {
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = b1 * m + (S(1) - b1) * p.grad;
    v = b2 * v + (S(1) - b2) * p.grad.cwiseAbs2();
    p.value.array() -= step * m.array() / ((v.array() * inv_bc2).sqrt() + eps);
    ++i;
  }
}

}  // namespace oto::nn
