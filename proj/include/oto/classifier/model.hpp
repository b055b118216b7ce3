#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "oto/classifier/resnet.hpp"
#include "oto/dataset/labels.hpp"
#include "oto/nn/checkpoint.hpp"

namespace oto::classifier {

struct Prediction {
  int class_code = 0;
  RowVecD probabilities;

  ClassLabel label() const { return label_from_code(class_code); }
};

/// Softmax in double precision.
RowVecD softmax_probabilities(const RowVecD& logits);

/// Index of the largest entry; ties go to the lowest index.
int argmax_lowest(const RowVecD& values);

/// Float parameters plus architecture; read-only methods are safe to call concurrently.
class ClassifierModel {
 public:
  ClassifierModel() = default;
  ClassifierModel(const ResNetConfig& config, nn::ParameterStore<float> params, std::uint64_t seed = 0);

  static ClassifierModel initialize(const ResNetConfig& config, std::uint64_t seed);
  /// Throws CheckpointError.
  static ClassifierModel load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;

  /// image: C x (H*W); throws ShapeError on the wrong size.
  RowVecF encode(const MatF& image) const;
  Prediction classify_embedding(const RowVecF& embedding) const;
  Prediction classify(const MatF& image) const { return classify_embedding(encode(image)); }

  const ResNetConfig& config() const { return config_; }
  const ResNet<float>& net() const { return net_; }
  nn::ParameterStore<float>& params() { return params_; }
  const nn::ParameterStore<float>& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  nlohmann::json meta() const;

 private:
  ResNetConfig config_;
  nn::ParameterStore<float> params_;
  ResNet<float> net_;
  std::uint64_t seed_ = 0;
};

/// Loads the checkpoint at `dir` and classifies one image.
Prediction classify(const MatF& image, const std::filesystem::path& checkpoint_dir);

}  // namespace oto::classifier
