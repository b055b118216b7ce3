#include "oto/classifier/resnet.hpp"

#include <string>

#include "oto/core/error.hpp"

namespace oto::classifier {

nlohmann::json ResNetConfig::to_json() const {
  return {{"input_size", input_size},       {"in_channels", in_channels},     {"stem_channels", stem_channels},
          {"stem_kernel", stem_kernel},     {"stem_stride", stem_stride},     {"pool_kernel", pool_kernel},
          {"pool_stride", pool_stride},     {"widths", widths},               {"blocks_per_stage", blocks_per_stage},
          {"embedding_dim", embedding_dim}, {"num_classes", num_classes}};
}

ResNetConfig ResNetConfig::from_json(const nlohmann::json& j) {
  ResNetConfig c;
  try {
    c.input_size = j.at("input_size").get<int>();
    c.in_channels = j.at("in_channels").get<int>();
    c.stem_channels = j.at("stem_channels").get<int>();
    c.stem_kernel = j.at("stem_kernel").get<int>();
    c.stem_stride = j.at("stem_stride").get<int>();
    c.pool_kernel = j.at("pool_kernel").get<int>();
    c.pool_stride = j.at("pool_stride").get<int>();
    c.widths = j.at("widths").get<std::array<int, 4>>();
    c.blocks_per_stage = j.at("blocks_per_stage").get<int>();
    c.embedding_dim = j.at("embedding_dim").get<int>();
    c.num_classes = j.at("num_classes").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad classifier config: ") + e.what());
  }
  return c;
}

nn::LayerGraph build_resnet_graph(const ResNetConfig& c) {
  if (c.input_size < 1 || c.in_channels < 1 || c.blocks_per_stage < 1 || c.embedding_dim < 1 || c.num_classes < 1) {
    throw ShapeError("classifier config has a non-positive size");
  }
  nn::LayerGraph g;
  std::vector<int> shape{c.in_channels, c.input_size, c.input_size};
  auto push = [&](nn::LayerSpec s) {
    for (int d : s.out_shape) {
      if (d < 1) throw ShapeError("layer '" + s.name + "' has an empty output");
    }
    shape = s.out_shape;
    g.add(std::move(s));
  };
  push(nn::conv2d_spec("stem.conv", shape, c.stem_channels, c.stem_kernel, c.stem_stride, c.stem_kernel / 2));
  push(nn::relu_spec("stem.relu", shape));
  push(nn::maxpool_spec("stem.pool", shape, c.pool_kernel, c.pool_stride, c.pool_kernel / 2));
  for (int s = 0; s < 4; ++s) {
    for (int b = 0; b < c.blocks_per_stage; ++b) {
      const int stride = (s > 0 && b == 0) ? 2 : 1;
      push(nn::residual_spec("stage" + std::to_string(s + 1) + ".block" + std::to_string(b + 1), shape, c.widths[s],
                             stride));
    }
  }
  push(nn::global_avg_pool_spec("pool", shape));
  push(nn::dense_spec("fc_layer", shape[0], c.embedding_dim));
  push(nn::dense_spec("head", c.embedding_dim, c.num_classes));
  g.validate();
  return g;
}

}  // namespace oto::classifier
