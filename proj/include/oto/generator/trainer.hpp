#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "oto/dataset/manifest.hpp"
#include "oto/generator/model.hpp"

namespace oto::generator {

struct GeneratorTrainConfig {
  int epochs = 50;
  int batch_size = 8;
  double learning_rate = 3e-5;
  std::uint64_t seed = 0;
  std::string prompt_template = std::string(kDefaultPromptTemplate);
  GeneratorConfig model;
};

struct GeneratorEpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;

  bool operator==(const GeneratorEpochRecord&) const = default;
};

/// One (image, class, summary) pair: generator-mode pixels, label, summary text.
struct GeneratorExample {
  std::string id;
  MatF image;
  ClassLabel label = ClassLabel::Normal;
  std::string summary;
};

std::vector<GeneratorExample> load_generator_examples(const DatasetManifest& manifest);

/// Summaries of `train` plus the prompt rendered for every class. Throws
/// EmptyVocabulary when the summaries contribute no tokens.
Vocabulary build_vocabulary(const std::vector<GeneratorExample>& train, std::string_view prompt_template);

struct GeneratorTrainResult {
  GeneratorModel model;
  std::vector<GeneratorEpochRecord> history;
  int best_epoch = 0;
};

using GeneratorEpochCallback = std::function<void(const GeneratorEpochRecord&)>;

/// Adam on teacher-forced token cross-entropy, normalized by the number of
/// target tokens in each batch. Sequences are run one at a time, so no PAD
/// positions reach the loss. The returned model is the epoch with the strictly
/// lowest validation loss (the final epoch when `val` is empty).
GeneratorTrainResult train_generator(const std::vector<GeneratorExample>& train,
                                     const std::vector<GeneratorExample>& val, const GeneratorTrainConfig& config,
                                     const GeneratorEpochCallback& on_epoch = {});

GeneratorTrainResult train_generator(const DatasetManifest& train, const DatasetManifest& val,
                                     const GeneratorTrainConfig& config, const GeneratorEpochCallback& on_epoch = {});

/// Mean per-token cross-entropy over the examples (0 for an empty set).
double token_cross_entropy(const GeneratorModel& model, const std::vector<GeneratorExample>& examples);

void write_history_csv(std::ostream& out, const std::vector<GeneratorEpochRecord>& history);
void write_history_csv(const std::filesystem::path& path, const std::vector<GeneratorEpochRecord>& history);

nlohmann::json train_config_to_json(const GeneratorTrainConfig& config);

}  // namespace oto::generator
