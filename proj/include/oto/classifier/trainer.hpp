#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "oto/classifier/model.hpp"
#include "oto/classifier/objective.hpp"
#include "oto/dataset/manifest.hpp"

namespace oto::classifier {

std::string to_string(LossMode mode);
/// "combined", "cross_entropy" or "triplet"; throws InvalidArgument otherwise.
LossMode loss_mode_from_string(const std::string& s);

struct ClassifierTrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double margin = kDefaultMargin;
  TripletReduction reduction = TripletReduction::Mean;
  LossMode loss = LossMode::Combined;
  std::uint64_t seed = 0;
  /// Neighbours for validation scoring when the head is not trained.
  int knn_k = 5;
  ResNetConfig model;
};

struct EpochRecord {
  int epoch = 0;
  double triplet_loss = 0.0;
  double ce_loss = 0.0;
  double total_loss = 0.0;
  double val_macro_f1 = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

/// Preprocessed images in model layout with their class codes.
struct LabeledTensors {
  std::vector<MatF> images;
  std::vector<int> labels;

  std::size_t size() const { return images.size(); }
};

/// Decodes and preprocesses every record in classifier mode.
LabeledTensors load_classifier_tensors(const DatasetManifest& manifest);

struct ClassifierTrainResult {
  ClassifierModel model;
  std::vector<EpochRecord> history;
  /// Epoch whose parameters `model` holds (0 = initialization).
  int best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on the configured loss. Each epoch shuffles the training order; every
/// anchor in a batch draws a triplet from the training set. The returned model
/// is the epoch with the strictly best validation macro-F1 (the final epoch
/// when `val` is empty). Throws NonFiniteLoss naming the epoch and batch.
ClassifierTrainResult train_classifier(const LabeledTensors& train, const LabeledTensors& val,
                                       const ClassifierTrainConfig& config, const EpochCallback& on_epoch = {});

ClassifierTrainResult train_classifier(const DatasetManifest& train, const DatasetManifest& val,
                                       const ClassifierTrainConfig& config, const EpochCallback& on_epoch = {});

MatF embed_all(const ClassifierModel& model, const std::vector<MatF>& images);

/// Head argmax, or k-NN over `train` embeddings in triplet-only mode.
std::vector<int> predict_codes(const ClassifierModel& model, const LabeledTensors& train,
                               const std::vector<MatF>& images, LossMode mode, int knn_k);

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);
void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

nlohmann::json train_config_to_json(const ClassifierTrainConfig& config);

}  // namespace oto::classifier
