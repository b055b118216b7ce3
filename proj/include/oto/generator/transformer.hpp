#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oto/generator/fusion.hpp"
#include "oto/nn/attention.hpp"
#include "oto/nn/sequential.hpp"

namespace oto::generator {

/// Image CNN to a dense vector, a 512 -> d projection fused into the prompt,
/// and a pre-layer-norm encoder-decoder transformer over one shared token table.
struct GeneratorConfig {
  int image_size = 224;
  int image_channels = 3;
  int patch = 8;
  std::array<int, 3> image_widths{16, 32, 64};
  int image_dim = 512;
  int d_model = 256;
  int heads = 8;
  int ff_dim = 1024;
  int encoder_layers = 4;
  int decoder_layers = 4;
  int vocab_size = 0;

  nlohmann::json to_json() const;
  static GeneratorConfig from_json(const nlohmann::json& j);
  bool operator==(const GeneratorConfig&) const = default;
};

/// Layers: image.conv1..image.fc, proj, embed, enc<l>.{ln1,attn,ln2,ff1,ff2},
/// enc.ln, dec<l>.{ln1,self,ln2,cross,ln3,ff1,ff2}, dec.ln, out.
nn::LayerGraph build_generator_graph(const GeneratorConfig& config);

inline constexpr std::size_t kImageLayers = 8;

struct NormHandles {
  std::size_t gamma = 0, beta = 0;
};
struct DenseHandles {
  std::size_t weight = 0, bias = 0;
};

template <class S>
NormHandles norm_handles(const nn::ParameterStore<S>& p, const std::string& name) {
  return {p.handle(name + ".gamma"), p.handle(name + ".beta")};
}
template <class S>
DenseHandles dense_handles(const nn::ParameterStore<S>& p, const std::string& name) {
  return {p.handle(name + ".weight"), p.handle(name + ".bias")};
}

template <class S>
struct FeedForwardCache {
  nn::LayerNormCache<S> ln;
  Mat<S> normed;
  Mat<S> hidden;
};

template <class S>
struct EncoderLayerCache {
  nn::LayerNormCache<S> ln1;
  nn::AttentionCache<S> attn;
  FeedForwardCache<S> ff;
};

template <class S>
struct DecoderLayerCache {
  nn::LayerNormCache<S> ln1;
  nn::AttentionCache<S> self;
  nn::LayerNormCache<S> ln2;
  nn::AttentionCache<S> cross;
  FeedForwardCache<S> ff;
};

template <class S>
struct EncodeCache {
  nn::Tape<S> image_tape;
  Mat<S> image_embedding;
  std::vector<int> prompt_ids;
  std::vector<EncoderLayerCache<S>> layers;
  nn::LayerNormCache<S> final_ln;
};

template <class S>
struct DecodeCache {
  std::vector<int> input_ids;
  std::vector<DecoderLayerCache<S>> layers;
  nn::LayerNormCache<S> final_ln;
  Mat<S> final_out;
};

template <class S>
class Seq2Seq {
 public:
  Seq2Seq() = default;

  Seq2Seq(const GeneratorConfig& config, const nn::ParameterStore<S>& p)
      : config_(config), image_net_(build_generator_graph(config), p) {
    proj_ = dense_handles(p, "proj");
    embed_ = p.handle("embed.weight");
    for (int l = 0; l < config.encoder_layers; ++l) {
      const std::string n = "enc" + std::to_string(l);
      enc_.push_back({norm_handles(p, n + ".ln1"), nn::AttentionHandles::resolve(p, n + ".attn", config.heads),
                      norm_handles(p, n + ".ln2"), dense_handles(p, n + ".ff1"), dense_handles(p, n + ".ff2")});
    }
    enc_ln_ = norm_handles(p, "enc.ln");
    for (int l = 0; l < config.decoder_layers; ++l) {
      const std::string n = "dec" + std::to_string(l);
      dec_.push_back({norm_handles(p, n + ".ln1"), nn::AttentionHandles::resolve(p, n + ".self", config.heads),
                      norm_handles(p, n + ".ln2"), nn::AttentionHandles::resolve(p, n + ".cross", config.heads),
                      norm_handles(p, n + ".ln3"), dense_handles(p, n + ".ff1"), dense_handles(p, n + ".ff2")});
    }
    dec_ln_ = norm_handles(p, "dec.ln");
    out_ = dense_handles(p, "out");
  }

  const GeneratorConfig& config() const { return config_; }

  void check_image(const Mat<S>& image) const {
    const Eigen::Index hw = static_cast<Eigen::Index>(config_.image_size) * config_.image_size;
    if (image.rows() != config_.image_channels || image.cols() != hw) {
      throw ShapeError("generator expects a " + std::to_string(config_.image_channels) + "x" +
                       std::to_string(config_.image_size) + "x" + std::to_string(config_.image_size) +
                       " image, got " + std::to_string(image.rows()) + "x" + std::to_string(image.cols()));
    }
  }

  /// 1 x image_dim.
  Mat<S> image_embedding(const nn::ParameterStore<S>& p, const Mat<S>& image, nn::Tape<S>* tape = nullptr) const {
    check_image(image);
    return image_net_.forward(p, image, 0, kImageLayers, tape);
  }

  PromptSequence<S> embed_prompt(const nn::ParameterStore<S>& p, std::span<const int> ids) const {
    check_ids(ids);
    return {std::vector<int>(ids.begin(), ids.end()), nn::embedding_forward(p.value(embed_), ids)};
  }

  /// Encoder memory (prompt tokens x d) for one image and prompt.
  Mat<S> encode(const nn::ParameterStore<S>& p, const Mat<S>& image, std::span<const int> prompt_ids,
                EncodeCache<S>* cache = nullptr) const {
    const Mat<S> v = image_embedding(p, image, cache ? &cache->image_tape : nullptr);
    const auto prompt = embed_prompt(p, prompt_ids);
    Mat<S> x = add_positional(fuse(v, prompt, p.value(proj_.weight), p.value(proj_.bias))).data;
    if (cache) {
      cache->image_embedding = v;
      cache->prompt_ids = prompt.token_ids;
      cache->layers.assign(enc_.size(), {});
    }
    for (std::size_t l = 0; l < enc_.size(); ++l) {
      auto* c = cache ? &cache->layers[l] : nullptr;
      const auto& h = enc_[l];
      nn::LayerNormCache<S> ln1;
      const Mat<S> n1 = nn::layer_norm_forward(x, p.value(h.ln1.gamma), p.value(h.ln1.beta), &ln1);
      x += nn::attention_forward(p, h.attn, n1, n1, false, c ? &c->attn : nullptr);
      x += feed_forward(p, h.ln2, h.ff1, h.ff2, x, c ? &c->ff : nullptr);
      if (c) c->ln1 = std::move(ln1);
    }
    return nn::layer_norm_forward(x, p.value(enc_ln_.gamma), p.value(enc_ln_.beta), cache ? &cache->final_ln : nullptr);
  }

  /// Logits (input tokens x vocab) for teacher-forced decoder inputs.
  Mat<S> decode(const nn::ParameterStore<S>& p, const Mat<S>& memory, std::span<const int> input_ids,
                DecodeCache<S>* cache = nullptr) const {
    check_ids(input_ids);
    Mat<S> y = nn::embedding_forward(p.value(embed_), input_ids);
    y += positional_encoding<S>(static_cast<int>(y.rows()), static_cast<int>(y.cols()));
    if (cache) {
      cache->input_ids.assign(input_ids.begin(), input_ids.end());
      cache->layers.assign(dec_.size(), {});
    }
    for (std::size_t l = 0; l < dec_.size(); ++l) {
      auto* c = cache ? &cache->layers[l] : nullptr;
      const auto& h = dec_[l];
      nn::LayerNormCache<S> ln1, ln2;
      const Mat<S> n1 = nn::layer_norm_forward(y, p.value(h.ln1.gamma), p.value(h.ln1.beta), &ln1);
      y += nn::attention_forward(p, h.self, n1, n1, true, c ? &c->self : nullptr);
      const Mat<S> n2 = nn::layer_norm_forward(y, p.value(h.ln2.gamma), p.value(h.ln2.beta), &ln2);
      y += nn::attention_forward(p, h.cross, n2, memory, false, c ? &c->cross : nullptr);
      y += feed_forward(p, h.ln3, h.ff1, h.ff2, y, c ? &c->ff : nullptr);
      if (c) {
        c->ln1 = std::move(ln1);
        c->ln2 = std::move(ln2);
      }
    }
    Mat<S> f = nn::layer_norm_forward(y, p.value(dec_ln_.gamma), p.value(dec_ln_.beta),
                                      cache ? &cache->final_ln : nullptr);
    Mat<S> logits = nn::dense_forward(f, p.value(out_.weight), p.value(out_.bias));
    if (cache) cache->final_out = std::move(f);
    return logits;
  }

  /// Accumulates parameter gradients for d(loss)/d(logits); returns d(loss)/d(memory).
  Mat<S> backward_decode(nn::ParameterStore<S>& p, const Mat<S>& dlogits, const DecodeCache<S>& c) const {
    Mat<S> df = nn::dense_backward(dlogits, c.final_out, p.value(out_.weight), p.grad(out_.weight), p.grad(out_.bias));
    Mat<S> dy = nn::layer_norm_backward(df, p.value(dec_ln_.gamma), c.final_ln, p.grad(dec_ln_.gamma),
                                        p.grad(dec_ln_.beta));
    Mat<S> dmemory;
    for (std::size_t l = dec_.size(); l-- > 0;) {
      const auto& h = dec_[l];
      const auto& lc = c.layers[l];
      dy += feed_forward_backward(p, h.ln3, h.ff1, h.ff2, dy, lc.ff);
      Mat<S> dmem;
      const Mat<S> dn2 = nn::attention_backward(p, h.cross, lc.cross, dy, dmem);
      if (dmemory.size() == 0) {
        dmemory = std::move(dmem);
      } else {
        dmemory += dmem;
      }
      dy += nn::layer_norm_backward(dn2, p.value(h.ln2.gamma), lc.ln2, p.grad(h.ln2.gamma), p.grad(h.ln2.beta));
      Mat<S> dself;
      Mat<S> dn1 = nn::attention_backward(p, h.self, lc.self, dy, dself);
      dn1 += dself;
      dy += nn::layer_norm_backward(dn1, p.value(h.ln1.gamma), lc.ln1, p.grad(h.ln1.gamma), p.grad(h.ln1.beta));
    }
    nn::embedding_backward(dy, std::span<const int>(c.input_ids), p.grad(embed_));
    return dmemory;
  }

  void backward_encode(nn::ParameterStore<S>& p, const Mat<S>& dmemory, const EncodeCache<S>& c) const {
    Mat<S> dx = nn::layer_norm_backward(dmemory, p.value(enc_ln_.gamma), c.final_ln, p.grad(enc_ln_.gamma),
                                        p.grad(enc_ln_.beta));
    for (std::size_t l = enc_.size(); l-- > 0;) {
      const auto& h = enc_[l];
      const auto& lc = c.layers[l];
      dx += feed_forward_backward(p, h.ln2, h.ff1, h.ff2, dx, lc.ff);
      Mat<S> dmem;
      Mat<S> dn1 = nn::attention_backward(p, h.attn, lc.attn, dx, dmem);
      dn1 += dmem;
      dx += nn::layer_norm_backward(dn1, p.value(h.ln1.gamma), lc.ln1, p.grad(h.ln1.gamma), p.grad(h.ln1.beta));
    }
    nn::embedding_backward(dx, std::span<const int>(c.prompt_ids), p.grad(embed_));
    const Mat<S> dproj = dx.colwise().sum();
    const Mat<S> dv = nn::dense_backward(dproj, c.image_embedding, p.value(proj_.weight), p.grad(proj_.weight),
                                         p.grad(proj_.bias));
    image_net_.backward(p, dv, 0, kImageLayers, c.image_tape, false);
  }

 private:
  struct EncoderHandles {
    NormHandles ln1;
    nn::AttentionHandles attn;
    NormHandles ln2;
    DenseHandles ff1, ff2;
  };
  struct DecoderHandles {
    NormHandles ln1;
    nn::AttentionHandles self;
    NormHandles ln2;
    nn::AttentionHandles cross;
    NormHandles ln3;
    DenseHandles ff1, ff2;
  };

  void check_ids(std::span<const int> ids) const {
    for (int id : ids) {
      if (id < 0 || id >= config_.vocab_size) throw InvalidArgument("token id " + std::to_string(id) + " outside vocabulary");
    }
  }

  // FF(LN(x)) with a ReLU between the two dense layers.
  static Mat<S> feed_forward(const nn::ParameterStore<S>& p, const NormHandles& ln, const DenseHandles& ff1,
                             const DenseHandles& ff2, const Mat<S>& x, FeedForwardCache<S>* c) {
    nn::LayerNormCache<S> lnc;
    Mat<S> n = nn::layer_norm_forward(x, p.value(ln.gamma), p.value(ln.beta), &lnc);
    Mat<S> hidden = nn::relu(nn::dense_forward(n, p.value(ff1.weight), p.value(ff1.bias)));
    Mat<S> out = nn::dense_forward(hidden, p.value(ff2.weight), p.value(ff2.bias));
    if (c) {
      c->ln = std::move(lnc);
      c->normed = std::move(n);
      c->hidden = std::move(hidden);
    }
    return out;
  }

  static Mat<S> feed_forward_backward(nn::ParameterStore<S>& p, const NormHandles& ln, const DenseHandles& ff1,
                                      const DenseHandles& ff2, const Mat<S>& dout, const FeedForwardCache<S>& c) {
    Mat<S> dh = nn::dense_backward(dout, c.hidden, p.value(ff2.weight), p.grad(ff2.weight), p.grad(ff2.bias));
    dh = nn::relu_backward(dh, c.hidden);
    const Mat<S> dn = nn::dense_backward(dh, c.normed, p.value(ff1.weight), p.grad(ff1.weight), p.grad(ff1.bias));
    return nn::layer_norm_backward(dn, p.value(ln.gamma), c.ln, p.grad(ln.gamma), p.grad(ln.beta));
  }

  GeneratorConfig config_;
  nn::SequentialNet<S> image_net_;
  DenseHandles proj_;
  std::size_t embed_ = 0;
  std::vector<EncoderHandles> enc_;
  NormHandles enc_ln_;
  std::vector<DecoderHandles> dec_;
  NormHandles dec_ln_;
  DenseHandles out_;
};

/// Summed token cross-entropy of softmax(logits) against `targets`, with the
/// gradient (softmax - onehot) * scale written to `dlogits` when given.
template <class S>
double token_cross_entropy(const Mat<S>& logits, std::span<const int> targets, double scale = 1.0,
                           Mat<S>* dlogits = nullptr) {
  if (static_cast<std::size_t>(logits.rows()) != targets.size()) {
    throw LengthMismatch("logit rows and targets differ in length");
  }
  if (dlogits) dlogits->resize(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::RowVectorXd z = logits.row(r).template cast<double>();
    z.array() -= z.maxCoeff();
    Eigen::RowVectorXd e = z.array().exp();
    const double sum = e.sum();
    const int t = targets[static_cast<std::size_t>(r)];
    loss += std::log(sum) - z(t);
    if (dlogits) {
      e /= sum;
      e(t) -= 1.0;
      dlogits->row(r) = (e * scale).template cast<S>();
    }
  }
  return loss;
}

}  // namespace oto::generator
