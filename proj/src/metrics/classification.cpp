#include "oto/metrics/classification.hpp"

#include <string>

#include "oto/core/error.hpp"

namespace oto::metrics {

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels, int num_classes) {
  if (predictions.size() != labels.size()) {
    throw LengthMismatch(std::to_string(predictions.size()) + " predictions vs " + std::to_string(labels.size()) +
                         " labels");
  }
  ConfusionCounts c;
  c.true_positives.assign(num_classes, 0);
  c.false_positives.assign(num_classes, 0);
  c.false_negatives.assign(num_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i], y = labels[i];
    if (p < 0 || p >= num_classes || y < 0 || y >= num_classes) {
      throw InvalidArgument("class code out of range at position " + std::to_string(i));
    }
    if (p == y) {
      ++c.true_positives[y];
    } else {
      ++c.false_positives[p];
      ++c.false_negatives[y];
    }
  }
  c.total = static_cast<long>(labels.size());
  return c;
}

double f1_from(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

PRF precision_recall_f1(const ConfusionCounts& counts) {
  PRF out;
  const int n = counts.num_classes();
  for (int k = 0; k < n; ++k) {
    const long tp = counts.true_positives[k];
    const long fp = counts.false_positives[k];
    const long fn = counts.false_negatives[k];
    ClassScores s;
    s.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = f1_from(s.precision, s.recall);
    out.per_class.push_back(s);
    out.macro.precision += s.precision;
    out.macro.recall += s.recall;
    out.macro.f1 += s.f1;
  }
  if (n > 0) {
    out.macro.precision /= n;
    out.macro.recall /= n;
    out.macro.f1 /= n;
  }
  return out;
}

double macro_f1(std::span<const int> predictions, std::span<const int> labels, int num_classes) {
  return precision_recall_f1(confusion(predictions, labels, num_classes)).macro.f1;
}

}  // namespace oto::metrics
