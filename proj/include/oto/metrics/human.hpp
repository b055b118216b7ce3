#pragma once

#include <optional>
#include <string>
#include <vector>

namespace oto::metrics {

struct Rating {
  std::string sample_id;
  std::string annotator_id;
  int rating = 0;  // 1..3
};

struct Faithfulness {
  std::string sample_id;
  bool error_free = false;
};

struct HumanRatings {
  std::vector<Rating> ratings;
  std::vector<Faithfulness> faithfulness;
};

struct HumanSummary {
  double mean_rating = 0.0;
  long rating_count = 0;
  long sample_count = 0;
  /// 100 * error-free / judged samples; empty without faithfulness judgements.
  std::optional<double> faithfulness_percent;
};

/// Throws EmptyRatings without ratings, ValidationError for a rating outside 1..3.
HumanSummary aggregate_human_ratings(const HumanRatings& ratings);

}  // namespace oto::metrics
