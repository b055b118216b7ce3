#pragma once

namespace oto::metrics {

struct SignificanceResult {
  double z = 0.0;
  double p_two_tailed = 1.0;
  double p1 = 0.0, p2 = 0.0;
  long n1 = 0, n2 = 0;
};

/// Two-tailed p for a standard normal statistic: erfc(|z| / sqrt(2)).
double normal_two_tailed_p(double z);

/// Pooled two-proportion z-test. Throws InvalidArgument for proportions
/// outside [0, 1] or sizes below 1, DegenerateProportion when the pooled
/// proportion is 0 or 1.
SignificanceResult two_proportion_z(double p1, double p2, long n1, long n2);

}  // namespace oto::metrics
