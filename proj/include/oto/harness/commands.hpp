#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oto/classifier/trainer.hpp"
#include "oto/dataset/dedup.hpp"
#include "oto/dataset/split.hpp"
#include "oto/generator/model.hpp"
#include "oto/harness/config.hpp"
#include "oto/harness/run_record.hpp"
#include "oto/metrics/report.hpp"
#include "oto/metrics/text.hpp"

namespace oto::harness {

using fs_path = std::filesystem::path;

/// Receives one progress line at a time; may be empty.
using Logger = std::function<void(const std::string&)>;

// Dataset verbs.

/// Builds a manifest from `image_root/<ClassName>/<stem>.{png,jpg,jpeg}` (id =
/// stem) and a summaries file of `id<TAB>summary` lines, then writes and
/// re-validates `out_dir/manifest.json`. Throws ValidationError for an image
/// without a summary or an unknown class directory.
DatasetManifest cmd_ingest(const fs_path& image_root, const fs_path& summaries, const fs_path& out_dir,
                           const std::string& source = "ingest");

/// Writes `out_dir/duplicates.json`.
DedupResult cmd_dedup(const fs_path& image_dir, int hamming_threshold, const fs_path& out_dir);

/// Writes train.json, val.json and test.json under `out_dir`.
SplitParts cmd_split(const fs_path& manifest, const SplitSpec& spec, const fs_path& out_dir);

/// Writes fold<i>/train.json and fold<i>/test.json (1-based) under `out_dir`.
std::vector<Fold> cmd_folds(const fs_path& manifest, int k, std::uint64_t seed, const fs_path& out_dir);

// Training.

/// Splits the manifest, trains the configured task, evaluates the best
/// checkpoint on the test part and writes under `out_dir`: config.json,
/// history.csv, checkpoint/, report.json and run.json (plus test hypotheses
/// and references for generation).
RunRecord cmd_train(const RunConfig& config, const fs_path& out_dir, const Logger& log = {});

/// One cmd_train per grid point under `out_dir/run_<i>`, then grid.json
/// listing each point's overrides and test report.
nlohmann::json cmd_train_grid(const nlohmann::json& base, const fs_path& base_dir, const std::vector<GridAxis>& axes,
                              const fs_path& out_dir, const Logger& log = {});

struct CrossValReport {
  std::vector<metrics::ClassScores> folds;
  metrics::ClassScores average;

  nlohmann::json to_json() const;
};

/// Arithmetic mean of the fold rows.
CrossValReport aggregate_folds(std::vector<metrics::ClassScores> folds);

/// Trains one classifier per stratified fold of the whole manifest; each
/// fold's training part gives up a stratified validation holdout of
/// ratio_val / (ratio_train + ratio_val). Writes fold<i>/history.csv and
/// crossval.json. Classification only.
CrossValReport cmd_crossval(const RunConfig& config, int k, const fs_path& out_dir, const Logger& log = {});

// Evaluation.

/// Macro P/R/F1 of a checkpoint on a manifest. With `knn_train`, labels come
/// from k-NN over that manifest's embeddings instead of the head.
metrics::MetricsReport cmd_eval_classifier(const fs_path& checkpoint, const fs_path& manifest,
                                           const std::optional<fs_path>& knn_train = std::nullopt, int knn_k = 5);

struct EvalSummariesInputs {
  fs_path hypotheses;
  fs_path references;
  /// Second system: adds a two-proportion z-test on corpus ROUGE-L.
  std::optional<fs_path> second_hypotheses;
  std::optional<fs_path> ratings;
  std::optional<fs_path> faithfulness;
  /// Token embeddings for embed-F1; one-hot over the corpus vocabulary without it.
  std::optional<fs_path> generator_checkpoint;
};

metrics::MetricsReport cmd_eval_summaries(const EvalSummariesInputs& inputs);

/// Row of the generator's token table for each token (UNK when unseen).
metrics::TokenEmbedder generator_token_embedder(const generator::GeneratorModel& model);

struct PipelineResult {
  ClassLabel predicted = ClassLabel::Normal;
  ClassLabel label = ClassLabel::Normal;
  RowVecD probabilities;
  std::string prompt;
  std::string summary;

  nlohmann::json to_json() const;
};

/// classify -> prompt for the predicted (or overridden) class -> summary.
PipelineResult cmd_pipeline(const fs_path& image, const fs_path& classifier_checkpoint,
                            const fs_path& generator_checkpoint, std::optional<ClassLabel> label_override = {},
                            const generator::DecodeConfig& decode = {});

/// Renders run.json, report.json and crossval.json files as Markdown tables
/// in the layout of the classification, summarization and human-evaluation
/// tables.
std::string cmd_report(const std::vector<fs_path>& inputs);

}  // namespace oto::harness
