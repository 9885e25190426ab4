// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace apdcorr {

struct ScalarMaximum {
  double argument;
  double value;
};

struct LogGridSearch {
  int points = 64;
  /// Golden-section stops once the bracket is narrower than rel_tol * argument.
  double rel_tol = 1e-10;
  int max_refinements = 200;
};

/// Maximizes f over [lo, hi] (0 < lo < hi): evaluates f on a logarithmic grid, then
/// refines the best grid point by golden-section search between its neighbours.
/// Ties on the grid resolve to the smallest argument.
ScalarMaximum maximize_on_log_grid(const std::function<double(double)>& f, double lo, double hi,
                                   const LogGridSearch& options = {});

/// Golden-section maximization of a unimodal f on [a, b].
ScalarMaximum golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                                      double rel_tol = 1e-10, int max_iter = 200);

}  // namespace apdcorr
