#include "oto/generator/transformer.hpp"

#include "oto/core/error.hpp"

namespace oto::generator {

nlohmann::json GeneratorConfig::to_json() const {
  return {{"image_size", image_size}, {"image_channels", image_channels}, {"patch", patch},
          {"image_widths", image_widths}, {"image_dim", image_dim},       {"d_model", d_model},
          {"heads", heads},           {"ff_dim", ff_dim},                 {"encoder_layers", encoder_layers},
          {"decoder_layers", decoder_layers}, {"vocab_size", vocab_size}};
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  try {
    c.image_size = j.at("image_size").get<int>();
    c.image_channels = j.at("image_channels").get<int>();
    c.patch = j.at("patch").get<int>();
    c.image_widths = j.at("image_widths").get<std::array<int, 3>>();
    c.image_dim = j.at("image_dim").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.heads = j.at("heads").get<int>();
    c.ff_dim = j.at("ff_dim").get<int>();
    c.encoder_layers = j.at("encoder_layers").get<int>();
    c.decoder_layers = j.at("decoder_layers").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad generator config: ") + e.what());
  }
  return c;
}

nn::LayerGraph build_generator_graph(const GeneratorConfig& c) {
  if (c.vocab_size < 1) throw ShapeError("generator needs a non-empty vocabulary");
  if (c.d_model % 2 != 0) throw OddDimension("model width must be even, got " + std::to_string(c.d_model));
  nn::LayerGraph g;
  std::vector<int> shape{c.image_channels, c.image_size, c.image_size};
  auto push = [&](nn::LayerSpec s) {
    for (int d : s.out_shape) {
      if (d < 1) throw ShapeError("layer '" + s.name + "' has an empty output");
    }
    shape = s.out_shape;
    g.add(std::move(s));
  };
  push(nn::conv2d_spec("image.conv1", shape, c.image_widths[0], c.patch, c.patch, 0));
  push(nn::relu_spec("image.relu1", shape));
  push(nn::conv2d_spec("image.conv2", shape, c.image_widths[1], 3, 2, 1));
  push(nn::relu_spec("image.relu2", shape));
  push(nn::conv2d_spec("image.conv3", shape, c.image_widths[2], 3, 2, 1));
  push(nn::relu_spec("image.relu3", shape));
  push(nn::global_avg_pool_spec("image.pool", shape));
  push(nn::dense_spec("image.fc", shape[0], c.image_dim));
  push(nn::dense_spec("proj", c.image_dim, c.d_model));
  push(nn::embedding_spec("embed", c.vocab_size, c.d_model));
  for (int l = 0; l < c.encoder_layers; ++l) {
    const std::string n = "enc" + std::to_string(l);
    push(nn::layer_norm_spec(n + ".ln1", c.d_model));
    push(nn::attention_spec(n + ".attn", c.d_model, c.heads));
    push(nn::layer_norm_spec(n + ".ln2", c.d_model));
    push(nn::dense_spec(n + ".ff1", c.d_model, c.ff_dim));
    push(nn::dense_spec(n + ".ff2", c.ff_dim, c.d_model));
  }
  push(nn::layer_norm_spec("enc.ln", c.d_model));
  for (int l = 0; l < c.decoder_layers; ++l) {
    const std::string n = "dec" + std::to_string(l);
    push(nn::layer_norm_spec(n + ".ln1", c.d_model));
    push(nn::attention_spec(n + ".self", c.d_model, c.heads));
    push(nn::layer_norm_spec(n + ".ln2", c.d_model));
    push(nn::attention_spec(n + ".cross", c.d_model, c.heads));
    push(nn::layer_norm_spec(n + ".ln3", c.d_model));
    push(nn::dense_spec(n + ".ff1", c.d_model, c.ff_dim));
    push(nn::dense_spec(n + ".ff2", c.ff_dim, c.d_model));
  }
  push(nn::layer_norm_spec("dec.ln", c.d_model));
  push(nn::dense_spec("out", c.d_model, c.vocab_size));
  g.validate();
  return g;
}

}  // namespace oto::generator
