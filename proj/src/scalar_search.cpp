// SPDX-License-Identifier: Apache-2.0
#include "apdcorr/scalar_search.hpp"

#include <cmath>
#include <vector>

#include "apdcorr/errors.hpp"

namespace apdcorr {

ScalarMaximum golden_section_maximize(const std::function<double(double)>& f, double a, double b,
                                      double rel_tol, int max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int iter = 0; iter < max_iter && (b - a) > rel_tol * std::abs(0.5 * (a + b)); ++iter) {
    // ">=" keeps the left part on ties, so flat plateaus settle on the smaller argument
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 >= f2 ? ScalarMaximum{x1, f1} : ScalarMaximum{x2, f2};
}

ScalarMaximum maximize_on_log_grid(const std::function<double(double)>& f, double lo, double hi,
                                   const LogGridSearch& options) {
  if (!(lo > 0.0) || !(hi > lo) || options.points < 3) {
    throw DomainError("log-grid search needs 0 < lo < hi and at least 3 points");
  }
  const int n = options.points;
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / (n - 1);
  std::vector<double> xs(n);
  std::vector<double> fs(n);
  int best = 0;
  for (int i = 0; i < n; ++i) {
    xs[i] = i == n - 1 ? hi : std::exp(log_lo + step * i);
    fs[i] = f(xs[i]);
    if (std::isnan(fs[i])) throw NumericError("objective is NaN at " + std::to_string(xs[i]));
    if (fs[i] > fs[best]) best = i;
  }
  const double a = xs[best > 0 ? best - 1 : 0];
  const double b = xs[best < n - 1 ? best + 1 : n - 1];
  const ScalarMaximum refined =
      golden_section_maximize(f, a, b, options.rel_tol, options.max_refinements);
  if (refined.value > fs[best]) return refined;
  return {xs[best], fs[best]};
}

}  // namespace apdcorr
