#include "oto/nn/graph.hpp"

#include <array>
#include <sstream>

#include "oto/core/error.hpp"

namespace oto::nn {

namespace {

constexpr std::array<std::pair<LayerKind, const char*>, 9> kKindNames = {{
    {LayerKind::Conv2d, "conv2d"},
    {LayerKind::ReLU, "relu"},
    {LayerKind::MaxPool2d, "maxpool2d"},
    {LayerKind::ResidualBlock, "residual_block"},
    {LayerKind::GlobalAvgPool, "global_avg_pool"},
    {LayerKind::Dense, "dense"},
    {LayerKind::LayerNorm, "layer_norm"},
    {LayerKind::MultiHeadAttention, "multi_head_attention"},
    {LayerKind::Embedding, "embedding"},
}};

std::string shape_str(const std::vector<int>& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

void require(bool ok, const LayerSpec& spec, const std::string& what) {
  if (!ok) throw ShapeError("layer '" + spec.name + "' (" + to_string(spec.kind) + "): " + what);
}

std::vector<int> expected_output(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::Conv2d:
    case LayerKind::MaxPool2d: {
      require(s.in_shape.size() == 3, s, "expects a {C,H,W} input");
      require(s.kernel > 0 && s.stride > 0 && s.padding >= 0, s, "invalid kernel geometry");
      const int h = conv_out_size(s.in_shape[1], s.kernel, s.stride, s.padding);
      const int w = conv_out_size(s.in_shape[2], s.kernel, s.stride, s.padding);
      require(h > 0 && w > 0, s, "kernel larger than padded input");
      const int c = s.kind == LayerKind::Conv2d ? (s.out_shape.empty() ? 0 : s.out_shape[0]) : s.in_shape[0];
      return {c, h, w};
    }
    case LayerKind::ResidualBlock: {
      require(s.in_shape.size() == 3, s, "expects a {C,H,W} input");
      require(s.stride > 0, s, "invalid stride");
      const int c = s.out_shape.empty() ? 0 : s.out_shape[0];
      return {c, conv_out_size(s.in_shape[1], 3, s.stride, 1), conv_out_size(s.in_shape[2], 3, s.stride, 1)};
    }
    case LayerKind::ReLU:
      return s.in_shape;
    case LayerKind::GlobalAvgPool:
      require(s.in_shape.size() == 3, s, "expects a {C,H,W} input");
      return {s.in_shape[0]};
    case LayerKind::Dense:
      require(s.in_shape.size() == 1 && s.out_shape.size() == 1, s, "expects vector shapes");
      return s.out_shape;
    case LayerKind::LayerNorm:
      require(s.in_shape.size() == 1, s, "expects a vector shape");
      return s.in_shape;
    case LayerKind::MultiHeadAttention:
      require(s.in_shape.size() == 1, s, "expects a vector shape");
      require(s.heads > 0 && s.in_shape[0] % s.heads == 0, s, "model width must divide by head count");
      return s.in_shape;
    case LayerKind::Embedding:
      require(s.in_shape.size() == 1 && s.out_shape.size() == 1, s, "expects {vocab} -> {dim}");
      return s.out_shape;
  }
  return {};
}

}  // namespace

std::string to_string(LayerKind kind) {
  for (const auto& [k, n] : kKindNames) {
    if (k == kind) return n;
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& s) {
  for (const auto& [k, n] : kKindNames) {
    if (s == n) return k;
  }
  throw ShapeError("unknown layer kind '" + s + "'");
}

LayerSpec conv2d_spec(std::string name, std::vector<int> in, int out_channels, int kernel, int stride, int padding) {
  LayerSpec s{std::move(name), LayerKind::Conv2d, in, {out_channels}, kernel, stride, padding};
  if (in.size() == 3) {
    s.out_shape = {out_channels, conv_out_size(in[1], kernel, stride, padding),
                   conv_out_size(in[2], kernel, stride, padding)};
  }
  return s;
}

LayerSpec relu_spec(std::string name, std::vector<int> in) {
  return {std::move(name), LayerKind::ReLU, in, in};
}

LayerSpec maxpool_spec(std::string name, std::vector<int> in, int kernel, int stride, int padding) {
  LayerSpec s{std::move(name), LayerKind::MaxPool2d, in, {}, kernel, stride, padding};
  if (in.size() == 3) {
    s.out_shape = {in[0], conv_out_size(in[1], kernel, stride, padding), conv_out_size(in[2], kernel, stride, padding)};
  }
  return s;
}

LayerSpec residual_spec(std::string name, std::vector<int> in, int out_channels, int stride) {
  LayerSpec s{std::move(name), LayerKind::ResidualBlock, in, {out_channels}, 3, stride, 1};
  if (in.size() == 3) {
    s.out_shape = {out_channels, conv_out_size(in[1], 3, stride, 1), conv_out_size(in[2], 3, stride, 1)};
  }
  return s;
}

LayerSpec global_avg_pool_spec(std::string name, std::vector<int> in) {
  LayerSpec s{std::move(name), LayerKind::GlobalAvgPool, in, {}};
  if (!in.empty()) s.out_shape = {in[0]};
  return s;
}

LayerSpec dense_spec(std::string name, int in, int out) { return {std::move(name), LayerKind::Dense, {in}, {out}}; }

LayerSpec layer_norm_spec(std::string name, int dim) { return {std::move(name), LayerKind::LayerNorm, {dim}, {dim}}; }

LayerSpec attention_spec(std::string name, int dim, int heads) {
  LayerSpec s{std::move(name), LayerKind::MultiHeadAttention, {dim}, {dim}};
  s.heads = heads;
  return s;
}

LayerSpec embedding_spec(std::string name, int vocab, int dim) {
  return {std::move(name), LayerKind::Embedding, {vocab}, {dim}};
}

void LayerGraph::validate() const {
  std::unordered_map<std::string, int> names;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& s = layers[i];
    if (s.name.empty()) throw ShapeError("layer " + std::to_string(i) + " has no name");
    if (names[s.name]++) throw ShapeError("duplicate layer name '" + s.name + "'");
    for (int d : s.in_shape) require(d > 0, s, "non-positive input dimension " + shape_str(s.in_shape));
    const auto expected = expected_output(s);
    require(expected == s.out_shape, s,
            "declares output " + shape_str(s.out_shape) + " but computes " + shape_str(expected));
    if (i > 0 && !s.chain_start && s.kind != LayerKind::Embedding) {
      const auto& prev = layers[i - 1];
      require(prev.out_shape == s.in_shape, s,
              "expects input " + shape_str(s.in_shape) + " but '" + prev.name + "' produces " +
                  shape_str(prev.out_shape));
    }
  }
}

std::size_t LayerGraph::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == name) return i;
  }
  throw ShapeError("no layer named '" + name + "'");
}

nlohmann::json LayerGraph::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : layers) {
    arr.push_back({{"name", s.name},
                   {"kind", to_string(s.kind)},
                   {"in", s.in_shape},
                   {"out", s.out_shape},
                   {"kernel", s.kernel},
                   {"stride", s.stride},
                   {"padding", s.padding},
                   {"heads", s.heads},
                   {"chain_start", s.chain_start}});
  }
  return arr;
}

LayerGraph LayerGraph::from_json(const nlohmann::json& j) {
  LayerGraph g;
  for (const auto& e : j) {
    LayerSpec s;
    s.name = e.at("name").get<std::string>();
    s.kind = layer_kind_from_string(e.at("kind").get<std::string>());
    s.in_shape = e.at("in").get<std::vector<int>>();
    s.out_shape = e.at("out").get<std::vector<int>>();
    s.kernel = e.value("kernel", 0);
    s.stride = e.value("stride", 1);
    s.padding = e.value("padding", 0);
    s.heads = e.value("heads", 0);
    s.chain_start = e.value("chain_start", false);
    g.layers.push_back(std::move(s));
  }
  return g;
}

std::vector<ParamDecl> parameter_decls(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::Conv2d: {
      const int cin = s.in_shape[0], cout = s.out_shape[0];
      return {{"weight", {cout, cin, s.kernel, s.kernel}, InitKind::Uniform, cin * s.kernel * s.kernel},
              {"bias", {cout}, InitKind::Zeros, 1}};
    }
    case LayerKind::ResidualBlock: {
      const int cin = s.in_shape[0], cout = s.out_shape[0];
      std::vector<ParamDecl> d = {{"conv1.weight", {cout, cin, 3, 3}, InitKind::Uniform, cin * 9},
                                  {"conv1.bias", {cout}, InitKind::Zeros, 1},
                                  {"conv2.weight", {cout, cout, 3, 3}, InitKind::Uniform, cout * 9},
                                  {"conv2.bias", {cout}, InitKind::Zeros, 1}};
      if (cin != cout || s.stride != 1) {
        d.push_back({"shortcut.weight", {cout, cin, 1, 1}, InitKind::Uniform, cin});
        d.push_back({"shortcut.bias", {cout}, InitKind::Zeros, 1});
      }
      return d;
    }
    case LayerKind::Dense:
      return {{"weight", {s.out_shape[0], s.in_shape[0]}, InitKind::Uniform, s.in_shape[0]},
              {"bias", {s.out_shape[0]}, InitKind::Zeros, 1}};
    case LayerKind::LayerNorm:
      return {{"gamma", {s.in_shape[0]}, InitKind::Ones, 1}, {"beta", {s.in_shape[0]}, InitKind::Zeros, 1}};
    case LayerKind::MultiHeadAttention: {
      const int d = s.in_shape[0];
      std::vector<ParamDecl> out;
      for (const char* p : {"q", "k", "v", "o"}) {
        out.push_back({std::string(p) + ".weight", {d, d}, InitKind::Uniform, d});
        out.push_back({std::string(p) + ".bias", {d}, InitKind::Zeros, 1});
      }
      return out;
    }
    case LayerKind::Embedding:
      // Token tables draw from U(-1, 1), on the scale of the positional table.
      return {{"weight", {s.in_shape[0], s.out_shape[0]}, InitKind::Uniform, 1}};
    case LayerKind::ReLU:
    case LayerKind::MaxPool2d:
    case LayerKind::GlobalAvgPool:
      return {};
  }
  return {};
}

}  // namespace oto::nn
