#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "oto/core/eigen.hpp"
#include "oto/core/error.hpp"

namespace oto::classifier {

inline constexpr double kDefaultMargin = 0.2;
inline constexpr double kLogClamp = 1e-12;

/// Squared distances anchor-positive (phi) and anchor-negative (psi).
struct TripletDistances {
  double phi = 0.0;
  double psi = 0.0;
};

enum class TripletReduction { Mean, Sum };

struct LossBreakdown {
  double triplet = 0.0;
  double cross_entropy = 0.0;
  double total = 0.0;
  double margin = kDefaultMargin;
};

template <class A, class P, class N>
TripletDistances triplet_distances(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<P>& p,
                                   const Eigen::MatrixBase<N>& n) {
  if (a.size() != p.size() || a.size() != n.size()) {
    throw ShapeError("triplet embeddings have sizes " + std::to_string(a.size()) + ", " + std::to_string(p.size()) +
                     ", " + std::to_string(n.size()));
  }
  TripletDistances d;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double ai = static_cast<double>(a(i));
    const double dp = ai - static_cast<double>(p(i));
    const double dn = ai - static_cast<double>(n(i));
    d.phi += dp * dp;
    d.psi += dn * dn;
  }
  return d;
}

inline double triplet_hinge(const TripletDistances& d, double alpha) { return std::max(d.phi - d.psi + alpha, 0.0); }

/// Mean (or sum) over the batch of max(phi - psi + alpha, 0). An empty batch gives 0.
inline double triplet_loss(std::span<const TripletDistances> batch, double alpha = kDefaultMargin,
                           TripletReduction reduction = TripletReduction::Mean) {
  if (alpha < 0.0) throw InvalidArgument("margin must be non-negative");
  double s = 0.0;
  for (const auto& d : batch) s += triplet_hinge(d, alpha);
  if (reduction == TripletReduction::Mean && !batch.empty()) s /= static_cast<double>(batch.size());
  return s;
}

/// Gradient of `scale * max(phi - psi + alpha, 0)` with respect to a, p and n
/// (added into the outputs). Returns the hinge value.
template <class A, class P, class N, class GA, class GP, class GN>
double triplet_hinge_backward(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<P>& p,
                              const Eigen::MatrixBase<N>& n, double alpha, double scale,
                              Eigen::MatrixBase<GA>& da, Eigen::MatrixBase<GP>& dp, Eigen::MatrixBase<GN>& dn) {
  const auto d = triplet_distances(a, p, n);
  const double h = triplet_hinge(d, alpha);
  if (h <= 0.0) return h;
  using S = typename GA::Scalar;
  const S two = static_cast<S>(2.0 * scale);
  // d/da (|a-p|^2 - |a-n|^2) = 2(n - p); d/dp = -2(a - p); d/dn = 2(a - n)
  da += two * (n.template cast<S>() - p.template cast<S>());
  dp += -two * (a.template cast<S>() - p.template cast<S>());
  dn += two * (a.template cast<S>() - n.template cast<S>());
  return h;
}

/// -(1/N) sum_i log(max(probs(i, label_i), 1e-12)). Rows of `probs` are
/// probability vectors; an empty batch gives 0.
template <class D>
double cross_entropy_loss(const Eigen::MatrixBase<D>& probs, std::span<const int> labels) {
  if (static_cast<std::size_t>(probs.rows()) != labels.size()) {
    throw LengthMismatch(std::to_string(probs.rows()) + " probability rows vs " + std::to_string(labels.size()) +
                         " labels");
  }
  if (labels.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= probs.cols()) throw InvalidArgument("label " + std::to_string(y) + " out of range");
    s -= std::log(std::max(static_cast<double>(probs(static_cast<Eigen::Index>(i), y)), kLogClamp));
  }
  return s / static_cast<double>(labels.size());
}

/// Cross-entropy of softmax(logits) for one row and its gradient with respect to
/// the logits, (softmax - onehot) * scale, added into `dlogits`.
template <class L, class G>
double softmax_cross_entropy_backward(const Eigen::MatrixBase<L>& logits, int label, double scale,
                                      Eigen::MatrixBase<G>& dlogits) {
  using S = typename G::Scalar;
  Eigen::Matrix<double, 1, Eigen::Dynamic> z = logits.template cast<double>();
  z.array() -= z.maxCoeff();
  Eigen::Matrix<double, 1, Eigen::Dynamic> e = z.array().exp();
  const double sum = e.sum();
  e /= sum;
  const double loss = -std::log(std::max(e(label), kLogClamp));
  e(label) -= 1.0;
  dlogits += (e * scale).template cast<S>();
  return loss;
}

inline LossBreakdown combined_loss(double triplet, double cross_entropy, double margin = kDefaultMargin) {
  return {triplet, cross_entropy, triplet + cross_entropy, margin};
}

}  // namespace oto::classifier
