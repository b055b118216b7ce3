#include "oto/metrics/human.hpp"

#include <set>

#include "oto/core/error.hpp"

namespace oto::metrics {

HumanSummary aggregate_human_ratings(const HumanRatings& in) {
  if (in.ratings.empty()) throw EmptyRatings("no ratings to aggregate");
  HumanSummary out;
  long sum = 0;
  std::set<std::string> samples;
  for (const auto& r : in.ratings) {
    if (r.rating < 1 || r.rating > 3) {
      throw ValidationError("rating " + std::to_string(r.rating) + " for sample '" + r.sample_id +
                            "' is outside 1..3");
    }
    sum += r.rating;
    samples.insert(r.sample_id);
  }
  out.rating_count = static_cast<long>(in.ratings.size());
  out.sample_count = static_cast<long>(samples.size());
  out.mean_rating = static_cast<double>(sum) / static_cast<double>(out.rating_count);
  if (!in.faithfulness.empty()) {
    long ok = 0;
    for (const auto& f : in.faithfulness) ok += f.error_free ? 1 : 0;
    out.faithfulness_percent = 100.0 * static_cast<double>(ok) / static_cast<double>(in.faithfulness.size());
  }
  return out;
}

}  // namespace oto::metrics
