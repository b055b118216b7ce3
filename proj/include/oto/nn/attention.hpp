#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "oto/nn/layers.hpp"
#include "oto/nn/parameters.hpp"

namespace oto::nn {

/// Parameter handles of one multi-head attention block (q, k, v, o projections).
struct AttentionHandles {
  std::size_t q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
  int heads = 1;

  template <class S>
  static AttentionHandles resolve(const ParameterStore<S>& store, const std::string& prefix, int heads) {
    auto h = [&](const char* s) { return store.handle(prefix + "." + s); };
    return {h("q.weight"), h("q.bias"), h("k.weight"), h("k.bias"),
            h("v.weight"), h("v.bias"), h("o.weight"), h("o.bias"), heads};
  }
};

template <class S>
struct AttentionCache {
  Mat<S> query_input;
  Mat<S> memory;
  Mat<S> q, k, v;
  std::vector<Mat<S>> probs;  // per head, n x m
  Mat<S> context;
};

/// Scaled dot-product attention of `x` (n x d) over `memory` (m x d). With
/// `causal`, row i attends to memory rows j <= i only.
template <class S>
Mat<S> attention_forward(const ParameterStore<S>& p, const AttentionHandles& h, const Mat<S>& x, const Mat<S>& memory,
                         bool causal, AttentionCache<S>* cache) {
  const Eigen::Index d = x.cols();
  const Eigen::Index dh = d / h.heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  Mat<S> q = dense_forward(x, p.value(h.q_w), p.value(h.q_b));
  Mat<S> k = dense_forward(memory, p.value(h.k_w), p.value(h.k_b));
  Mat<S> v = dense_forward(memory, p.value(h.v_w), p.value(h.v_b));
  Mat<S> context(x.rows(), d);
  std::vector<Mat<S>> probs;
  if (cache) probs.reserve(h.heads);
  for (int head = 0; head < h.heads; ++head) {
    const auto qh = q.middleCols(head * dh, dh);
    const auto kh = k.middleCols(head * dh, dh);
    const auto vh = v.middleCols(head * dh, dh);
    Mat<S> scores(x.rows(), memory.rows());
    scores.noalias() = (qh * kh.transpose()) * scale;
    if (causal) {
      for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < scores.cols(); ++j) scores(i, j) = -std::numeric_limits<S>::infinity();
      }
    }
    Mat<S> pr = softmax_rows(scores);
    context.middleCols(head * dh, dh).noalias() = pr * vh;
    if (cache) probs.push_back(std::move(pr));
  }
  Mat<S> out = dense_forward(context, p.value(h.o_w), p.value(h.o_b));
  if (cache) {
    cache->query_input = x;
    cache->memory = memory;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->probs = std::move(probs);
    cache->context = std::move(context);
  }
  return out;
}

/// Returns the gradient with respect to `x`; the memory gradient is written to
/// `dmemory` (for self-attention the caller adds the two).
template <class S>
Mat<S> attention_backward(ParameterStore<S>& p, const AttentionHandles& h, const AttentionCache<S>& c,
                          const Mat<S>& dout, Mat<S>& dmemory) {
  const Eigen::Index d = c.query_input.cols();
  const Eigen::Index dh = d / h.heads;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  Mat<S> dcontext = dense_backward(dout, c.context, p.value(h.o_w), p.grad(h.o_w), p.grad(h.o_b));
  Mat<S> dq(c.q.rows(), d), dk(c.k.rows(), d), dv(c.v.rows(), d);
  for (int head = 0; head < h.heads; ++head) {
    const Mat<S>& pr = c.probs[head];
    const auto dctx = dcontext.middleCols(head * dh, dh);
    Mat<S> dprobs = dctx * c.v.middleCols(head * dh, dh).transpose();
    dv.middleCols(head * dh, dh).noalias() = pr.transpose() * dctx;
    const Vec<S> row_dot = (dprobs.array() * pr.array()).rowwise().sum();
    Mat<S> dscores = (pr.array() * (dprobs.array().colwise() - row_dot.array())) * scale;
    dq.middleCols(head * dh, dh).noalias() = dscores * c.k.middleCols(head * dh, dh);
    dk.middleCols(head * dh, dh).noalias() = dscores.transpose() * c.q.middleCols(head * dh, dh);
  }
  Mat<S> dx = dense_backward(dq, c.query_input, p.value(h.q_w), p.grad(h.q_w), p.grad(h.q_b));
  dmemory = dense_backward(dk, c.memory, p.value(h.k_w), p.grad(h.k_w), p.grad(h.k_b));
  dmemory += dense_backward(dv, c.memory, p.value(h.v_w), p.grad(h.v_w), p.grad(h.v_b));
  return dx;
}

}  // namespace oto::nn
