#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "oto/core/error.hpp"
#include "oto/core/random.hpp"
#include "oto/nn/parameters.hpp"

namespace oto::nn {

struct GradCheckOptions {
  double eps = 1e-4;
  std::size_t min_coords = 200;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_parameter;
  Eigen::Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max(floor, std::abs(analytic) + std::abs(numeric));
}

/// Compares analytic gradients with central differences.
///
/// `loss(params, with_grad)` returns the objective at the current values and,
/// when `with_grad` is true, leaves its analytic gradient in `params` (the
/// checker zeroes gradients before that call). Coordinates are a uniform
/// sample of `min_coords` distinct scalars, or all of them if there are fewer.
template <class S, class LossFn>
GradCheckReport grad_check(LossFn&& loss, ParameterStore<S>& params, const GradCheckOptions& options = {}) {
  params.zero_grad();
  const double base = static_cast<double>(loss(params, true));
  if (!std::isfinite(base)) throw NonFiniteLoss("loss is not finite at the checked point");

  struct Coord {
    std::size_t tensor;
    Eigen::Index index;
  };
  std::vector<Coord> all;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (Eigen::Index i = 0; i < params[t].numel(); ++i) all.push_back({t, i});
  }
  std::vector<double> analytic(all.size());
  for (std::size_t c = 0; c < all.size(); ++c) {
    analytic[c] = static_cast<double>(params[all[c].tensor].grad.data()[all[c].index]);
  }

  std::vector<std::size_t> picks;
  if (all.size() <= options.min_coords) {
    for (std::size_t c = 0; c < all.size(); ++c) picks.push_back(c);
  } else {
    Rng rng(options.seed);
    std::unordered_set<std::size_t> seen;
    while (picks.size() < options.min_coords) {
      const auto c = rng.uniform_index(all.size());
      if (seen.insert(c).second) picks.push_back(c);
    }
    std::sort(picks.begin(), picks.end());
  }

  GradCheckReport report;
  for (auto c : picks) {
    S& slot = params[all[c].tensor].value.data()[all[c].index];
    const S saved = slot;
    slot = saved + static_cast<S>(options.eps);
    const double plus = static_cast<double>(loss(params, false));
    slot = saved - static_cast<S>(options.eps);
    const double minus = static_cast<double>(loss(params, false));
    slot = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) throw NonFiniteLoss("loss not finite under perturbation");
    const double numeric = (plus - minus) / (2.0 * options.eps);
    const double err = relative_error(analytic[c], numeric);
    ++report.coords_checked;
    if (err > report.max_rel_error || report.worst_index < 0) {
      report.max_rel_error = std::max(report.max_rel_error, err);
      report.worst_parameter = params[all[c].tensor].name;
      report.worst_index = all[c].index;
      report.worst_analytic = analytic[c];
      report.worst_numeric = numeric;
    }
  }
  return report;
}

}  // namespace oto::nn
