#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "oto/core/eigen.hpp"
#include "oto/core/error.hpp"

namespace oto::classifier {

/// Majority vote over the k nearest training rows (Euclidean distance, equal
/// distances resolved by lower training index). Vote ties go to the class with
/// the smaller mean neighbour distance, then to the lower class code.
template <class T, class Q>
std::vector<int> knn_baseline(const Eigen::MatrixBase<T>& train, std::span<const int> train_labels,
                              const Eigen::MatrixBase<Q>& queries, int k) {
  const auto n = static_cast<std::size_t>(train.rows());
  if (n == 0) throw EmptyTrainSet("k-nearest-neighbour baseline needs at least one training point");
  if (train_labels.size() != n) throw LengthMismatch("training embeddings and labels differ in length");
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw InvalidArgument("k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  if (queries.cols() != train.cols()) throw ShapeError("query and training embeddings differ in dimension");
  const int num_classes = *std::max_element(train_labels.begin(), train_labels.end()) + 1;

  const Eigen::MatrixXd tr = train.template cast<double>();
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(queries.rows()));
  std::vector<double> dist(n);
  std::vector<std::size_t> order(n);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const Eigen::RowVectorXd query = queries.row(q).template cast<double>();
    for (std::size_t i = 0; i < n; ++i) dist[i] = (tr.row(static_cast<Eigen::Index>(i)) - query).norm();
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

    std::vector<int> votes(num_classes, 0);
    std::vector<double> dsum(num_classes, 0.0);
    for (int j = 0; j < k; ++j) {
      const int c = train_labels[order[j]];
      ++votes[c];
      dsum[c] += dist[order[j]];
    }
    int best = -1;
    for (int c = 0; c < num_classes; ++c) {
      if (votes[c] == 0) continue;
      if (best < 0 || votes[c] > votes[best] ||
          (votes[c] == votes[best] && dsum[c] / votes[c] < dsum[best] / votes[best])) {
        best = c;
      }
    }
    out.push_back(best);
  }
  return out;
}

struct EmbeddingGeometry {
  double mean_intra = 0.0;
  double mean_inter = 0.0;
};

/// Mean Euclidean distance over same-class and different-class row pairs.
template <class E>
EmbeddingGeometry embedding_geometry(const Eigen::MatrixBase<E>& embeddings, std::span<const int> labels) {
  const Eigen::MatrixXd e = embeddings.template cast<double>();
  double intra = 0.0, inter = 0.0;
  long n_intra = 0, n_inter = 0;
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < e.rows(); ++j) {
      const double d = (e.row(i) - e.row(j)).norm();
      if (labels[i] == labels[j]) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  }
  return {n_intra ? intra / n_intra : 0.0, n_inter ? inter / n_inter : 0.0};
}

}  // namespace oto::classifier
