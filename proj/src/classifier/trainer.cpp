#include "oto/classifier/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>

#include "oto/classifier/knn.hpp"
#include "oto/core/error.hpp"
#include "oto/core/random.hpp"
#include "oto/dataset/image.hpp"
#include "oto/dataset/preprocess.hpp"
#include "oto/dataset/triplet.hpp"
#include "oto/metrics/classification.hpp"
#include "oto/nn/adam.hpp"

namespace oto::classifier {

std::string to_string(LossMode mode) {
  switch (mode) {
    case LossMode::Combined:
      return "combined";
    case LossMode::CrossEntropy:
      return "cross_entropy";
    case LossMode::Triplet:
      return "triplet";
  }
  return "combined";
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "combined") return LossMode::Combined;
  if (s == "cross_entropy") return LossMode::CrossEntropy;
  if (s == "triplet") return LossMode::Triplet;
  throw InvalidArgument("unknown loss '" + s + "' (expected combined, cross_entropy or triplet)");
}

LabeledTensors load_classifier_tensors(const DatasetManifest& manifest) {
  LabeledTensors out;
  out.images.reserve(manifest.size());
  for (const auto& r : manifest.records) {
    out.images.push_back(preprocess_image(read_image(r.image_path), PreprocessMode::Classifier).data);
    out.labels.push_back(code(r.label));
  }
  return out;
}

MatF embed_all(const ClassifierModel& model, const std::vector<MatF>& images) {
  MatF out(static_cast<Eigen::Index>(images.size()), model.config().embedding_dim);
  for (std::size_t i = 0; i < images.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = model.encode(images[i]);
  return out;
}

std::vector<int> predict_codes(const ClassifierModel& model, const LabeledTensors& train,
                               const std::vector<MatF>& images, LossMode mode, int knn_k) {
  std::vector<int> out;
  if (mode == LossMode::Triplet) {
    const int k = std::min<int>(knn_k, static_cast<int>(train.size()));
    return knn_baseline(embed_all(model, train.images), train.labels, embed_all(model, images), k);
  }
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(model.classify(img).class_code);
  return out;
}

namespace {

void validate(const ClassifierTrainConfig& c, const LabeledTensors& train) {
  if (c.epochs < 0) throw InvalidArgument("epochs must be non-negative");
  if (c.batch_size < 1) throw InvalidArgument("batch_size must be at least 1");
  if (!(c.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (c.margin < 0.0) throw InvalidArgument("margin must be non-negative");
  if (c.knn_k < 1) throw InvalidArgument("knn_k must be at least 1");
  if (train.images.size() != train.labels.size()) throw LengthMismatch("training images and labels differ in length");
  if (c.epochs > 0 && train.size() == 0) throw EmptyTrainSet("no training records");
}

}  // namespace

ClassifierTrainResult train_classifier(const LabeledTensors& train, const LabeledTensors& val,
                                       const ClassifierTrainConfig& config, const EpochCallback& on_epoch) {
  validate(config, train);
  ClassifierTrainResult result;
  ClassifierModel model = ClassifierModel::initialize(config.model, config.seed);
  if (config.epochs == 0) {
    result.model = std::move(model);
    return result;
  }

  const bool use_triplet = config.loss != LossMode::CrossEntropy;
  const auto& net = model.net();
  auto& params = model.params();
  nn::AdamState<float> adam(params, nn::AdamHyper{config.learning_rate});
  Rng rng = Rng(config.seed).fork(0x7472616e);

  const std::size_t n = train.size();
  nn::ParameterStore<float> best = params.cast<float>();
  double best_f1 = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(n);
  std::vector<TrainSample<float>> batch;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double sum_triplet = 0.0, sum_ce = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t i = order[j];
        TrainSample<float> s{&train.images[i], train.labels[i]};
        if (use_triplet) {
          const auto t = sample_triplet_indices(train.labels, i, rng);
          s.positive = &train.images[t.positive];
          s.negative = &train.images[t.negative];
        }
        batch.push_back(s);
      }
      params.zero_grad();
      const auto loss = batch_objective<float>(net, params, batch, config.loss, config.margin, config.reduction, true);
      ++batches;
      if (!std::isfinite(loss.total)) {
        throw NonFiniteLoss("epoch " + std::to_string(epoch) + " batch " + std::to_string(batches) +
                            ": triplet=" + std::to_string(loss.triplet) + " ce=" + std::to_string(loss.cross_entropy));
      }
      nn::adam_step(params, adam);
      sum_triplet += loss.triplet;
      sum_ce += loss.cross_entropy;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.triplet_loss = sum_triplet / batches;
    rec.ce_loss = sum_ce / batches;
    rec.total_loss = rec.triplet_loss + rec.ce_loss;
    if (val.size() > 0) {
      const auto preds = predict_codes(model, train, val.images, config.loss, config.knn_k);
      rec.val_macro_f1 = metrics::macro_f1(preds, val.labels, config.model.num_classes);
      if (rec.val_macro_f1 > best_f1) {
        best_f1 = rec.val_macro_f1;
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
  result.model = ClassifierModel(config.model, std::move(best), config.seed);
  return result;
}

ClassifierTrainResult train_classifier(const DatasetManifest& train, const DatasetManifest& val,
                                       const ClassifierTrainConfig& config, const EpochCallback& on_epoch) {
  return train_classifier(load_classifier_tensors(train), load_classifier_tensors(val), config, on_epoch);
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,triplet_loss,ce_loss,total_loss,val_macro_f1\n";
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g\n", r.epoch, r.triplet_loss, r.ce_loss, r.total_loss,
                  r.val_macro_f1);
    out << buf;
  }
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  write_history_csv(f, history);
}

nlohmann::json train_config_to_json(const ClassifierTrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"margin", c.margin},
          {"triplet_reduction", c.reduction == TripletReduction::Mean ? "mean" : "sum"},
          {"loss", to_string(c.loss)},
          {"seed", c.seed},
          {"knn_k", c.knn_k},
          {"model", c.model.to_json()}};
}

}  // namespace oto::classifier
