#include "oto/generator/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "oto/core/error.hpp"
#include "oto/core/random.hpp"
#include "oto/dataset/image.hpp"
#include "oto/dataset/preprocess.hpp"
#include "oto/generator/objective.hpp"
#include "oto/nn/adam.hpp"

namespace oto::generator {

std::vector<GeneratorExample> load_generator_examples(const DatasetManifest& manifest) {
  std::vector<GeneratorExample> out;
  out.reserve(manifest.size());
  for (const auto& r : manifest.records) {
    out.push_back({r.id, preprocess_image(read_image(r.image_path), PreprocessMode::Generator).data, r.label,
                   r.summary});
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<GeneratorExample>& train, std::string_view prompt_template) {
  std::vector<std::string> texts;
  for (const auto& e : train) texts.push_back(e.summary);
  if (Vocabulary::build(texts).size() == Vocabulary::kNumSpecial) {
    throw EmptyVocabulary("training summaries contain no tokens");
  }
  for (auto l : kAllLabels) texts.push_back(render_prompt(l, prompt_template));
  return Vocabulary::build(texts);
}

double token_cross_entropy(const GeneratorModel& model, const std::vector<GeneratorExample>& examples) {
  double loss = 0.0;
  long tokens = 0;
  for (const auto& e : examples) {
    const auto target = model.vocab().encode(e.summary);
    loss += model.sequence_loss(e.image, e.label, target);
    tokens += static_cast<long>(target.size()) + 1;
  }
  return tokens ? loss / static_cast<double>(tokens) : 0.0;
}

GeneratorTrainResult train_generator(const std::vector<GeneratorExample>& train,
                                     const std::vector<GeneratorExample>& val, const GeneratorTrainConfig& config,
                                     const GeneratorEpochCallback& on_epoch) {
  if (config.epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (config.batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (!(config.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  render_prompt(ClassLabel::Normal, config.prompt_template);
  GeneratorTrainResult result;
  GeneratorModel model = GeneratorModel::initialize(config.model, build_vocabulary(train, config.prompt_template),
                                                    config.seed, config.prompt_template);
  if (config.epochs == 0) {
    result.model = std::move(model);
    return result;
  }

  std::vector<SequenceSample<float>> samples;
  for (const auto& e : train) {
    const auto target = model.vocab().encode(e.summary);
    samples.push_back({&e.image, model.prompt_ids(e.label), decoder_input(target), decoder_output(target)});
  }

  const auto& net = model.net();
  auto& params = model.params();
  nn::AdamState<float> adam(params, nn::AdamHyper{config.learning_rate});
  Rng rng = Rng(config.seed).fork(0x67656e);
  nn::ParameterStore<float> best = params.cast<float>();
  double best_val = std::numeric_limits<double>::infinity();
  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);
  std::vector<SequenceSample<float>> batch;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    long token_sum = 0;
    int batch_index = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      ++batch_index;
      batch.clear();
      long tokens = 0;
      for (std::size_t j = start; j < end; ++j) {
        batch.push_back(samples[order[j]]);
        tokens += static_cast<long>(batch.back().output.size());
      }
      params.zero_grad();
      const double loss = generator_objective<float>(net, params, batch, true);
      if (!std::isfinite(loss)) {
        throw NonFiniteLoss("epoch " + std::to_string(epoch) + " batch " + std::to_string(batch_index) +
                            ": token cross-entropy is not finite");
      }
      nn::adam_step(params, adam);
      loss_sum += loss * static_cast<double>(tokens);
      token_sum += tokens;
    }
    GeneratorEpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = token_sum ? loss_sum / static_cast<double>(token_sum) : 0.0;
    if (!val.empty()) {
      rec.val_loss = token_cross_entropy(model, val);
      if (rec.val_loss < best_val) {
        best_val = rec.val_loss;
        best.assign_values(params);
        result.best_epoch = epoch;
      }
    } else {
      best.assign_values(params);
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  result.model = GeneratorModel(model.config(), model.vocab(), std::move(best), config.prompt_template, config.seed);
  return result;
}

GeneratorTrainResult train_generator(const DatasetManifest& train, const DatasetManifest& val,
                                     const GeneratorTrainConfig& config, const GeneratorEpochCallback& on_epoch) {
  return train_generator(load_generator_examples(train), load_generator_examples(val), config, on_epoch);
}

void write_history_csv(std::ostream& out, const std::vector<GeneratorEpochRecord>& history) {
  out << "epoch,train_loss,val_loss\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g\n", r.epoch, r.train_loss, r.val_loss);
    out << buf;
  }
}

void write_history_csv(const std::filesystem::path& path, const std::vector<GeneratorEpochRecord>& history) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  write_history_csv(f, history);
}

nlohmann::json train_config_to_json(const GeneratorTrainConfig& c) {
  return {{"epochs", c.epochs},   {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
          {"seed", c.seed},       {"prompt_template", c.prompt_template}, {"model", c.model.to_json()}};
}

}  // namespace oto::generator
