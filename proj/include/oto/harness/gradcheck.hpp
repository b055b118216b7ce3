#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace oto::harness {

struct GradCheckSettings {
  double tolerance = 1e-4;
  double eps = 1e-5;
  std::size_t coords = 100000;
  std::uint64_t seed = 20240611;
  /// Multiplies every analytic gradient; 1 leaves them intact.
  double fault_scale = 1.0;
};

struct GradCheckRow {
  std::string loss;
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_parameter;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool pass = false;
};

/// Rows, in order: triplet, cross_entropy, combined, generator_token_ce.
/// Each runs on a small double-precision model built from `seed`.
std::vector<GradCheckRow> run_gradchecks(const GradCheckSettings& settings = {});

bool all_pass(const std::vector<GradCheckRow>& rows);

/// Fixed-width table, one line per row plus a header.
void print_gradcheck_table(std::ostream& os, const std::vector<GradCheckRow>& rows, double tolerance);

}  // namespace oto::harness
