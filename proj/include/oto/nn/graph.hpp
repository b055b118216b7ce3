#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "oto/core/random.hpp"
#include "oto/nn/parameters.hpp"

namespace oto::nn {

enum class LayerKind {
  Conv2d,
  ReLU,
  MaxPool2d,
  ResidualBlock,
  GlobalAvgPool,
  Dense,
  LayerNorm,
  MultiHeadAttention,
  Embedding,
};

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& s);

/// One layer descriptor. Spatial shapes are {C, H, W}; token/vector shapes are
/// {D} (per-row feature count). `chain_start` marks a layer fed from outside
/// the preceding layer (a new input or a branch), exempting it from the
/// adjacency check.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Dense;
  std::vector<int> in_shape;
  std::vector<int> out_shape;
  int kernel = 0;
  int stride = 1;
  int padding = 0;
  int heads = 0;
  bool chain_start = false;
};

LayerSpec conv2d_spec(std::string name, std::vector<int> in, int out_channels, int kernel, int stride, int padding);
LayerSpec relu_spec(std::string name, std::vector<int> in);
LayerSpec maxpool_spec(std::string name, std::vector<int> in, int kernel, int stride, int padding);
LayerSpec residual_spec(std::string name, std::vector<int> in, int out_channels, int stride);
LayerSpec global_avg_pool_spec(std::string name, std::vector<int> in);
LayerSpec dense_spec(std::string name, int in, int out);
LayerSpec layer_norm_spec(std::string name, int dim);
LayerSpec attention_spec(std::string name, int dim, int heads);
LayerSpec embedding_spec(std::string name, int vocab, int dim);

inline int conv_out_size(int in, int kernel, int stride, int padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

struct LayerGraph {
  std::vector<LayerSpec> layers;

  LayerSpec& add(LayerSpec spec, bool chain_start = false) {
    spec.chain_start = chain_start || layers.empty();
    layers.push_back(std::move(spec));
    return layers.back();
  }

  /// Throws ShapeError when a layer is internally inconsistent or its input
  /// does not match the previous layer's output.
  void validate() const;

  std::size_t index_of(const std::string& name) const;

  nlohmann::json to_json() const;
  static LayerGraph from_json(const nlohmann::json& j);
};

/// Parameters a layer owns, in registration order: (suffix, shape, init, fan_in).
struct ParamDecl {
  std::string suffix;
  std::vector<int> shape;
  InitKind init;
  int fan_in;
};
std::vector<ParamDecl> parameter_decls(const LayerSpec& spec);

/// Registers every parameter as "<layer>.<suffix>" without initialising.
template <class S>
ParameterStore<S> register_parameters(const LayerGraph& graph) {
  graph.validate();
  ParameterStore<S> store;
  for (const auto& layer : graph.layers) {
    for (const auto& d : parameter_decls(layer)) store.add(layer.name + "." + d.suffix, d.shape, d.init, d.fan_in);
  }
  return store;
}

/// Weights ~ U(-sqrt(1/fan_in), +sqrt(1/fan_in)) drawn in registration order,
/// biases 0, layer-norm gains 1. Draws are made in double and converted, so
/// float and double stores built from one seed agree to float rounding.
template <class S>
ParameterStore<S> init_parameters(const LayerGraph& graph, std::uint64_t seed) {
  auto store = register_parameters<S>(graph);
  Rng rng(seed);
  for (auto& t : store) {
    switch (t.init) {
      case InitKind::Zeros:
        t.value.setZero();
        break;
      case InitKind::Ones:
        t.value.setOnes();
        break;
      case InitKind::Uniform: {
        const double bound = std::sqrt(1.0 / t.fan_in);
        S* p = t.value.data();
        for (Eigen::Index i = 0; i < t.value.size(); ++i) p[i] = static_cast<S>(rng.uniform(-bound, bound));
        break;
      }
    }
  }
  return store;
}

}  // namespace oto::nn
