#pragma once

#include <span>

#include "oto/classifier/losses.hpp"
#include "oto/classifier/resnet.hpp"

namespace oto::classifier {

enum class LossMode { Combined, CrossEntropy, Triplet };

/// One anchor with its class and, for triplet terms, its positive and negative.
template <class S>
struct TrainSample {
  const Mat<S>* anchor = nullptr;
  int label = 0;
  const Mat<S>* positive = nullptr;
  const Mat<S>* negative = nullptr;
};

/// Batch objective of the selected loss terms. Terms outside `mode` are
/// reported as 0. With `with_grad`, adds d(total)/d(params) into `p.grad`.
template <class S>
LossBreakdown batch_objective(const ResNet<S>& net, nn::ParameterStore<S>& p, std::span<const TrainSample<S>> batch,
                              LossMode mode, double margin, TripletReduction reduction, bool with_grad) {
  LossBreakdown out;
  out.margin = margin;
  if (batch.empty()) return out;
  const bool use_triplet = mode != LossMode::CrossEntropy;
  const bool use_ce = mode != LossMode::Triplet;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double triplet_scale = reduction == TripletReduction::Mean ? inv_b : 1.0;
  const Eigen::Index dim = net.config().embedding_dim;
  double hinge_sum = 0.0, ce_sum = 0.0;
  for (const auto& s : batch) {
    nn::Tape<S> tape_a;
    const Mat<S> ea = net.encode(p, *s.anchor, with_grad ? &tape_a : nullptr);
    Mat<S> dea = Mat<S>::Zero(1, dim);
    if (use_triplet) {
      nn::Tape<S> tape_p, tape_n;
      const Mat<S> ep = net.encode(p, *s.positive, with_grad ? &tape_p : nullptr);
      const Mat<S> en = net.encode(p, *s.negative, with_grad ? &tape_n : nullptr);
      Mat<S> dep = Mat<S>::Zero(1, dim), den = Mat<S>::Zero(1, dim);
      hinge_sum += triplet_hinge_backward(ea, ep, en, margin, triplet_scale, dea, dep, den);
      if (with_grad) {
        net.backward_encoder(p, dep, tape_p);
        net.backward_encoder(p, den, tape_n);
      }
    }
    if (use_ce) {
      nn::Tape<S> tape_h;
      const Mat<S> logits = net.logits(p, ea, with_grad ? &tape_h : nullptr);
      Mat<S> dlogits = Mat<S>::Zero(1, logits.cols());
      ce_sum += softmax_cross_entropy_backward(logits, s.label, inv_b, dlogits);
      if (with_grad) dea += net.backward_head(p, dlogits, tape_h);
    }
    if (with_grad) net.backward_encoder(p, dea, tape_a);
  }
  return combined_loss(hinge_sum * triplet_scale, ce_sum * inv_b, margin);
}

}  // namespace oto::classifier
