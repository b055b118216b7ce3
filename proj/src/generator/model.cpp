#include "oto/generator/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oto/core/error.hpp"

namespace oto::generator {

void DecodeConfig::validate() const {
  if (beam_width < 1) throw InvalidArgument("beam_width must be at least 1");
  if (max_length < 1) throw InvalidArgument("max_length must be at least 1");
  if (!std::isfinite(length_penalty)) throw InvalidArgument("length_penalty must be finite");
}

std::vector<int> decoder_input(std::span<const int> target) {
  std::vector<int> out{Vocabulary::kBos};
  out.insert(out.end(), target.begin(), target.end());
  return out;
}

std::vector<int> decoder_output(std::span<const int> target) {
  std::vector<int> out(target.begin(), target.end());
  out.push_back(Vocabulary::kEos);
  return out;
}

GeneratorModel::GeneratorModel(const GeneratorConfig& config, Vocabulary vocab, nn::ParameterStore<float> params,
                               std::string prompt_template, std::uint64_t seed)
    : config_(config),
      vocab_(std::move(vocab)),
      params_(std::move(params)),
      prompt_template_(std::move(prompt_template)),
      seed_(seed) {
  if (config_.vocab_size != vocab_.size()) {
    throw ShapeError("config vocab_size " + std::to_string(config_.vocab_size) + " but vocabulary has " +
                     std::to_string(vocab_.size()) + " tokens");
  }
  render_prompt(ClassLabel::Normal, prompt_template_);
  nn::require_same_layout(params_, nn::register_parameters<float>(build_generator_graph(config_)));
  net_ = Seq2Seq<float>(config_, params_);
}

GeneratorModel GeneratorModel::initialize(GeneratorConfig config, Vocabulary vocab, std::uint64_t seed,
                                          std::string prompt_template) {
  config.vocab_size = vocab.size();
  auto params = nn::init_parameters<float>(build_generator_graph(config), seed);
  return GeneratorModel(config, std::move(vocab), std::move(params), std::move(prompt_template), seed);
}

nlohmann::json GeneratorModel::meta() const {
  return {{"kind", "generator"},
          {"config", config_.to_json()},
          {"vocabulary", vocab_.to_json()},
          {"prompt_template", prompt_template_},
          {"seed", seed_}};
}

void GeneratorModel::save(const std::filesystem::path& dir) const { nn::save_checkpoint(dir, meta(), params_); }

GeneratorModel GeneratorModel::load(const std::filesystem::path& dir) {
  auto ck = nn::load_checkpoint(dir);
  if (ck.meta.value("kind", "") != "generator") throw CheckpointError(dir.string() + " is not a generator checkpoint");
  if (!ck.meta.contains("config") || !ck.meta.contains("vocabulary")) {
    throw CheckpointError(dir.string() + ": meta.json lacks config or vocabulary");
  }
  try {
    return GeneratorModel(GeneratorConfig::from_json(ck.meta["config"]), Vocabulary::from_json(ck.meta["vocabulary"]),
                          std::move(ck.params),
                          ck.meta.value("prompt_template", std::string(kDefaultPromptTemplate)),
                          ck.meta.value("seed", std::uint64_t{0}));
  } catch (const ShapeError& e) {
    throw CheckpointError(dir.string() + ": " + e.what());
  } catch (const UnknownPlaceholder& e) {
    throw CheckpointError(dir.string() + ": " + e.what());
  }
}

RowVecF GeneratorModel::encode_image_dense(const MatF& image) const { return net_.image_embedding(params_, image); }

MatF GeneratorModel::encode(const MatF& image, ClassLabel label) const {
  const auto ids = prompt_ids(label);
  return net_.encode(params_, image, ids);
}

RowVecD GeneratorModel::next_log_probs(const MatF& memory, std::span<const int> prefix) const {
  const MatF logits = net_.decode(params_, memory, prefix);
  RowVecD z = logits.row(logits.rows() - 1).cast<double>();
  z.array() -= z.maxCoeff();
  const double lse = std::log(z.array().exp().sum());
  z.array() -= lse;
  return z;
}

std::vector<int> GeneratorModel::greedy_ids(const MatF& memory, int max_length) const {
  std::vector<int> prefix{Vocabulary::kBos};
  for (int step = 0; step < max_length; ++step) {
    int next = Vocabulary::kEos;
    if (step + 1 < max_length) {
      const RowVecD lp = next_log_probs(memory, prefix);
      next = 0;
      for (Eigen::Index i = 1; i < lp.size(); ++i) {
        if (lp(i) > lp(next)) next = static_cast<int>(i);
      }
    }
    prefix.push_back(next);
    if (next == Vocabulary::kEos) break;
  }
  return {prefix.begin() + 1, prefix.end()};
}

std::vector<int> GeneratorModel::beam_ids(const MatF& memory, const DecodeConfig& decode) const {
  decode.validate();
  struct Hyp {
    std::vector<int> ids;  // BOS first
    double score = 0.0;
  };
  struct Candidate {
    std::size_t hyp;
    int token;
    double score;
  };
  const auto width = static_cast<std::size_t>(decode.beam_width);
  std::vector<Hyp> beams{{{Vocabulary::kBos}, 0.0}};
  std::vector<Hyp> finished;
  for (int step = 0; step < decode.max_length && !beams.empty() && finished.size() < width; ++step) {
    const bool last = step + 1 == decode.max_length;
    std::vector<Candidate> cands;
    for (std::size_t b = 0; b < beams.size(); ++b) {
      const RowVecD lp = next_log_probs(memory, beams[b].ids);
      if (last) {
        cands.push_back({b, Vocabulary::kEos, beams[b].score + lp(Vocabulary::kEos)});
      } else {
        for (Eigen::Index t = 0; t < lp.size(); ++t) cands.push_back({b, static_cast<int>(t), beams[b].score + lp(t)});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    if (cands.size() > width) cands.resize(width);
    std::vector<Hyp> next;
    for (const auto& c : cands) {
      Hyp h{beams[c.hyp].ids, c.score};
      h.ids.push_back(c.token);
      (c.token == Vocabulary::kEos ? finished : next).push_back(std::move(h));
    }
    beams = std::move(next);
  }
  for (auto& h : beams) finished.push_back(std::move(h));
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < finished.size(); ++i) {
    const double len = static_cast<double>(finished[i].ids.size() - 1);
    const double s = finished[i].score / std::pow(len, decode.length_penalty);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return {finished[best].ids.begin() + 1, finished[best].ids.end()};
}

std::vector<int> GeneratorModel::generate_ids(const MatF& image, ClassLabel label, const DecodeConfig& decode) const {
  decode.validate();
  const MatF memory = encode(image, label);
  return decode.strategy() == DecodeStrategy::Greedy ? greedy_ids(memory, decode.max_length)
                                                     : beam_ids(memory, decode);
}

std::string GeneratorModel::generate(const MatF& image, ClassLabel label, const DecodeConfig& decode) const {
  return vocab_.decode(generate_ids(image, label, decode));
}

double GeneratorModel::sequence_loss(const MatF& image, ClassLabel label, std::span<const int> target) const {
  const MatF memory = encode(image, label);
  const auto in = decoder_input(target);
  const auto out = decoder_output(target);
  return token_cross_entropy(net_.decode(params_, memory, in), out);
}

std::string generate_summary(const MatF& image, ClassLabel label, const std::filesystem::path& checkpoint_dir,
                             const DecodeConfig& decode) {
  return GeneratorModel::load(checkpoint_dir).generate(image, label, decode);
}

}  // namespace oto::generator
