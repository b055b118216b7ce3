#pragma once

#include <span>
#include <vector>

namespace oto::metrics {

/// One-vs-rest counts for each class code in [0, num_classes).
struct ConfusionCounts {
  std::vector<long> true_positives;
  std::vector<long> false_positives;
  std::vector<long> false_negatives;
  long total = 0;

  int num_classes() const { return static_cast<int>(true_positives.size()); }
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PRF {
  std::vector<ClassScores> per_class;
  ClassScores macro;
};

/// Throws LengthMismatch when the sequences differ in length and
/// InvalidArgument for codes outside [0, num_classes).
ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels, int num_classes = 5);

/// Per-class P = TP/(TP+FP), R = TP/(TP+FN), zero when the denominator is
/// zero; macro values are unweighted means over classes.
PRF precision_recall_f1(const ConfusionCounts& counts);

/// 2PR/(P+R), or 0 when P + R = 0.
double f1_from(double precision, double recall);

double macro_f1(std::span<const int> predictions, std::span<const int> labels, int num_classes = 5);

}  // namespace oto::metrics
