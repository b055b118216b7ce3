#include "oto/classifier/model.hpp"

#include <cmath>

#include "oto/core/error.hpp"

namespace oto::classifier {

RowVecD softmax_probabilities(const RowVecD& logits) {
  RowVecD p = (logits.array() - logits.maxCoeff()).exp().matrix();
  p /= p.sum();
  return p;
}

int argmax_lowest(const RowVecD& values) {
  int best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = static_cast<int>(i);
  }
  return best;
}

ClassifierModel::ClassifierModel(const ResNetConfig& config, nn::ParameterStore<float> params, std::uint64_t seed)
    : config_(config), params_(std::move(params)), seed_(seed) {
  const auto expected = nn::register_parameters<float>(build_resnet_graph(config_));
  nn::require_same_layout(params_, expected);
  net_ = ResNet<float>(config_, params_);
}

ClassifierModel ClassifierModel::initialize(const ResNetConfig& config, std::uint64_t seed) {
  return ClassifierModel(config, nn::init_parameters<float>(build_resnet_graph(config), seed), seed);
}

nlohmann::json ClassifierModel::meta() const {
  nlohmann::json classes = nlohmann::json::array();
  for (auto l : kAllLabels) classes.push_back(label_name(l));
  return {{"kind", "classifier"},
          {"config", config_.to_json()},
          {"graph", net_.net().graph().to_json()},
          {"class_names", classes},
          {"seed", seed_}};
}

void ClassifierModel::save(const std::filesystem::path& dir) const { nn::save_checkpoint(dir, meta(), params_); }

ClassifierModel ClassifierModel::load(const std::filesystem::path& dir) {
  auto ck = nn::load_checkpoint(dir);
  if (ck.meta.value("kind", "") != "classifier") {
    throw CheckpointError(dir.string() + " is not a classifier checkpoint");
  }
  if (!ck.meta.contains("config")) throw CheckpointError(dir.string() + ": meta.json lacks config");
  const auto config = ResNetConfig::from_json(ck.meta["config"]);
  try {
    return ClassifierModel(config, std::move(ck.params), ck.meta.value("seed", std::uint64_t{0}));
  } catch (const ShapeError& e) {
    throw CheckpointError(dir.string() + ": " + e.what());
  }
}

RowVecF ClassifierModel::encode(const MatF& image) const { return net_.encode(params_, image); }

Prediction ClassifierModel::classify_embedding(const RowVecF& embedding) const {
  const MatF logits = net_.logits(params_, embedding);
  Prediction p;
  const RowVecD z = logits.row(0).cast<double>();
  p.probabilities = softmax_probabilities(z);
  p.class_code = argmax_lowest(z);
  return p;
}

Prediction classify(const MatF& image, const std::filesystem::path& checkpoint_dir) {
  return ClassifierModel::load(checkpoint_dir).classify(image);
}

}  // namespace oto::classifier
