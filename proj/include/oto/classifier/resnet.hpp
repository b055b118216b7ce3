#pragma once

#include <array>
#include <cstdint>

#include <json.hpp>

#include "oto/nn/graph.hpp"
#include "oto/nn/sequential.hpp"

namespace oto::classifier {

/// Residual encoder: strided stem conv, max pool, four stages of basic
/// blocks, global average pool, a dense "fc_layer" to the embedding, then the
/// class head on top of the embedding.
struct ResNetConfig {
  int input_size = 226;
  int in_channels = 3;
  int stem_channels = 16;
  int stem_kernel = 7;
  int stem_stride = 4;
  int pool_kernel = 3;
  int pool_stride = 2;
  std::array<int, 4> widths{16, 32, 64, 128};
  int blocks_per_stage = 2;
  int embedding_dim = 128;
  int num_classes = 5;

  nlohmann::json to_json() const;
  static ResNetConfig from_json(const nlohmann::json& j);
  bool operator==(const ResNetConfig&) const = default;
};

/// Layer names: stem.conv, stem.relu, stem.pool, stageS.blockB, pool,
/// fc_layer, head. Throws ShapeError for geometry that collapses to nothing.
nn::LayerGraph build_resnet_graph(const ResNetConfig& config);

/// Encoder = layers [0, head); head = last layer.
template <class S>
class ResNet {
 public:
  ResNet() = default;
  ResNet(const ResNetConfig& config, const nn::ParameterStore<S>& store)
      : config_(config), net_(build_resnet_graph(config), store) {
    head_ = net_.graph().index_of("head");
  }

  const ResNetConfig& config() const { return config_; }
  const nn::SequentialNet<S>& net() const { return net_; }
  std::size_t head_index() const { return head_; }

  /// image: C x (H*W). Returns 1 x embedding_dim.
  Mat<S> encode(const nn::ParameterStore<S>& p, const Mat<S>& image, nn::Tape<S>* tape = nullptr) const {
    check_image(image);
    return net_.forward(p, image, 0, head_, tape);
  }

  Mat<S> logits(const nn::ParameterStore<S>& p, const Mat<S>& embedding, nn::Tape<S>* tape = nullptr) const {
    return net_.forward(p, embedding, head_, net_.size(), tape);
  }

  void backward_encoder(nn::ParameterStore<S>& p, const Mat<S>& dembedding, const nn::Tape<S>& tape) const {
    net_.backward(p, dembedding, 0, head_, tape, false);
  }

  Mat<S> backward_head(nn::ParameterStore<S>& p, const Mat<S>& dlogits, const nn::Tape<S>& tape) const {
    return net_.backward(p, dlogits, head_, net_.size(), tape, true);
  }

  void check_image(const Mat<S>& image) const {
    const Eigen::Index hw = static_cast<Eigen::Index>(config_.input_size) * config_.input_size;
    if (image.rows() != config_.in_channels || image.cols() != hw) {
      throw ShapeError("classifier expects a " + std::to_string(config_.in_channels) + "x" +
                       std::to_string(config_.input_size) + "x" + std::to_string(config_.input_size) +
                       " image, got " + std::to_string(image.rows()) + "x" + std::to_string(image.cols()));
    }
  }

 private:
  ResNetConfig config_;
  nn::SequentialNet<S> net_;
  std::size_t head_ = 0;
};

}  // namespace oto::classifier
