#pragma once

#include <vector>

#include "oto/nn/conv.hpp"
#include "oto/nn/graph.hpp"
#include "oto/nn/layers.hpp"
#include "oto/nn/parameters.hpp"

namespace oto::nn {

/// Per-layer scratch kept by a forward pass for the matching backward pass.
template <class S>
struct LayerCache {
  Mat<S> input;
  Mat<S> output;
  Mat<S> col;
  Mat<S> col2;
  Mat<S> col_shortcut;
  Mat<S> hidden;
  std::vector<Eigen::Index> argmax;
};

template <class S>
using Tape = std::vector<LayerCache<S>>;

/// Executes a feed-forward LayerGraph (conv / relu / pool / residual / dense /
/// layer-norm layers) against a parameter store. The net holds only the graph
/// and parameter handles, so one instance serves concurrent read-only calls.
template <class S>
class SequentialNet {
 public:
  SequentialNet() = default;

  SequentialNet(LayerGraph graph, const ParameterStore<S>& store) : graph_(std::move(graph)) {
    graph_.validate();
    for (const auto& layer : graph_.layers) {
      std::vector<std::size_t> hs;
      for (const auto& d : parameter_decls(layer)) hs.push_back(store.handle(layer.name + "." + d.suffix));
      handles_.push_back(std::move(hs));
    }
  }

  const LayerGraph& graph() const { return graph_; }
  std::size_t size() const { return graph_.layers.size(); }

  /// Runs layers [begin, end). Spatial inputs are C x (H*W); vector inputs are n x D.
  Mat<S> forward(const ParameterStore<S>& p, Mat<S> x, std::size_t begin, std::size_t end, Tape<S>* tape) const {
    if (tape) tape->assign(end - begin, LayerCache<S>{});
    for (std::size_t i = begin; i < end; ++i) {
      LayerCache<S>* c = tape ? &(*tape)[i - begin] : nullptr;
      x = forward_layer(p, i, std::move(x), c);
    }
    return x;
  }

  Mat<S> forward(const ParameterStore<S>& p, Mat<S> x) const { return forward(p, std::move(x), 0, size(), nullptr); }

  /// Back-propagates through layers [begin, end) using the tape of the matching
  /// forward call. Returns the input gradient unless `need_input_grad` is false.
  Mat<S> backward(ParameterStore<S>& p, Mat<S> dy, std::size_t begin, std::size_t end, const Tape<S>& tape,
                  bool need_input_grad = true) const {
    for (std::size_t i = end; i-- > begin;) {
      const bool need_dx = need_input_grad || i > begin;
      dy = backward_layer(p, i, std::move(dy), tape[i - begin], need_dx);
    }
    return dy;
  }

 private:
  static ConvGeometry geometry(const LayerSpec& s, int kernel, int stride, int padding) {
    return ConvGeometry::make(s.in_shape[0], s.in_shape[1], s.in_shape[2], kernel, stride, padding);
  }

  Mat<S> forward_layer(const ParameterStore<S>& p, std::size_t i, Mat<S> x, LayerCache<S>* c) const {
    const auto& s = graph_.layers[i];
    const auto& h = handles_[i];
    switch (s.kind) {
      case LayerKind::Conv2d: {
        Mat<S> col;
        Mat<S> y = conv2d_forward(x, geometry(s, s.kernel, s.stride, s.padding), p.value(h[0]), p.value(h[1]), col);
        if (c) c->col = std::move(col);
        return y;
      }
      case LayerKind::ReLU: {
        Mat<S> y = relu(x);
        if (c) c->output = y;
        return y;
      }
      case LayerKind::MaxPool2d: {
        std::vector<Eigen::Index> arg;
        Mat<S> y = maxpool_forward(x, geometry(s, s.kernel, s.stride, s.padding), arg);
        if (c) c->argmax = std::move(arg);
        return y;
      }
      case LayerKind::ResidualBlock: {
        const auto g1 = geometry(s, 3, s.stride, 1);
        const auto g2 = ConvGeometry::make(s.out_shape[0], s.out_shape[1], s.out_shape[2], 3, 1, 1);
        Mat<S> col1, col2, colsc;
        Mat<S> h1 = relu(conv2d_forward(x, g1, p.value(h[0]), p.value(h[1]), col1));
        Mat<S> y = conv2d_forward(h1, g2, p.value(h[2]), p.value(h[3]), col2);
        if (h.size() > 4) {
          y += conv2d_forward(x, geometry(s, 1, s.stride, 0), p.value(h[4]), p.value(h[5]), colsc);
        } else {
          y += x;
        }
        y = relu(y);
        if (c) {
          c->col = std::move(col1);
          c->col2 = std::move(col2);
          c->col_shortcut = std::move(colsc);
          c->hidden = std::move(h1);
          c->output = y;
        }
        return y;
      }
      case LayerKind::GlobalAvgPool:
        return global_avg_pool_forward(x);
      case LayerKind::Dense: {
        Mat<S> y = dense_forward(x, p.value(h[0]), p.value(h[1]));
        if (c) c->input = std::move(x);
        return y;
      }
      case LayerKind::LayerNorm: {
        LayerNormCache<S> ln;
        Mat<S> y = layer_norm_forward(x, p.value(h[0]), p.value(h[1]), c ? &ln : nullptr);
        if (c) {
          c->hidden = std::move(ln.normalized);
          c->input = ln.inv_std.transpose();
        }
        return y;
      }
      case LayerKind::MultiHeadAttention:
      case LayerKind::Embedding:
        break;
    }
    throw ShapeError("layer '" + s.name + "' cannot run inside a sequential net");
  }

  Mat<S> backward_layer(ParameterStore<S>& p, std::size_t i, Mat<S> dy, const LayerCache<S>& c, bool need_dx) const {
    const auto& s = graph_.layers[i];
    const auto& h = handles_[i];
    switch (s.kind) {
      case LayerKind::Conv2d:
        return conv2d_backward(dy, geometry(s, s.kernel, s.stride, s.padding), p.value(h[0]), c.col, p.grad(h[0]),
                               p.grad(h[1]), need_dx);
      case LayerKind::ReLU:
        return relu_backward(dy, c.output);
      case LayerKind::MaxPool2d:
        return maxpool_backward(dy, geometry(s, s.kernel, s.stride, s.padding), c.argmax);
      case LayerKind::ResidualBlock: {
        const auto g1 = geometry(s, 3, s.stride, 1);
        const auto g2 = ConvGeometry::make(s.out_shape[0], s.out_shape[1], s.out_shape[2], 3, 1, 1);
        Mat<S> dz = relu_backward(dy, c.output);
        Mat<S> dh1 = conv2d_backward(dz, g2, p.value(h[2]), c.col2, p.grad(h[2]), p.grad(h[3]), true);
        dh1 = relu_backward(dh1, c.hidden);
        Mat<S> dx = conv2d_backward(dh1, g1, p.value(h[0]), c.col, p.grad(h[0]), p.grad(h[1]), need_dx);
        if (h.size() > 4) {
          Mat<S> dsc = conv2d_backward(dz, geometry(s, 1, s.stride, 0), p.value(h[4]), c.col_shortcut, p.grad(h[4]),
                                       p.grad(h[5]), need_dx);
          if (need_dx) dx += dsc;
        } else if (need_dx) {
          dx += dz;
        }
        return dx;
      }
      case LayerKind::GlobalAvgPool:
        return global_avg_pool_backward(dy, static_cast<Eigen::Index>(s.in_shape[1]) * s.in_shape[2]);
      case LayerKind::Dense:
        return dense_backward(dy, c.input, p.value(h[0]), p.grad(h[0]), p.grad(h[1]));
      case LayerKind::LayerNorm: {
        LayerNormCache<S> ln{c.hidden, c.input.row(0).transpose()};
        return layer_norm_backward(dy, p.value(h[0]), ln, p.grad(h[0]), p.grad(h[1]));
      }
      case LayerKind::MultiHeadAttention:
      case LayerKind::Embedding:
        break;
    }
    throw ShapeError("layer '" + s.name + "' cannot run inside a sequential net");
  }

  LayerGraph graph_;
  std::vector<std::vector<std::size_t>> handles_;
};

}  // namespace oto::nn
