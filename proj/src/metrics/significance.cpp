#include "oto/metrics/significance.hpp"

#include <cmath>
#include <string>

#include "oto/core/error.hpp"

namespace oto::metrics {

double normal_two_tailed_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

SignificanceResult two_proportion_z(double p1, double p2, long n1, long n2) {
  if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0)) {
    throw InvalidArgument("proportions must lie in [0, 1]");
  }
  if (n1 < 1 || n2 < 1) throw InvalidArgument("sample sizes must be at least 1");
  const double pooled = (p1 * static_cast<double>(n1) + p2 * static_cast<double>(n2)) / static_cast<double>(n1 + n2);
  if (pooled <= 0.0 || pooled >= 1.0) {
    throw DegenerateProportion("pooled proportion is " + std::to_string(pooled));
  }
  SignificanceResult r{0.0, 1.0, p1, p2, n1, n2};
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  r.z = (p1 - p2) / se;
  r.p_two_tailed = normal_two_tailed_p(r.z);
  return r;
}

}  // namespace oto::metrics
