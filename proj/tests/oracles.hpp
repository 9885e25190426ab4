// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference computations for the tests. Deliberately naive (bisection, brute-force
// series, nested golden sections) and independent of the library code they check.

#include <cmath>
#include <functional>
#include <utility>

namespace oracle {

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 400) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Root of x e^x = y for y >= 0.
inline double lambert(double y) {
  if (y == 0.0) return 0.0;
  double hi = 1.0;
  while (hi * std::exp(hi) < y) hi *= 2.0;
  return bisect([y](double x) { return x * std::exp(x) - y; }, 0.0, hi);
}

/// Literal b_zeta as written with exponentials; fine for moderate arguments.
inline double b_zeta_literal(double x, double zeta) {
  const double a = std::exp(x + zeta) - 1.0;
  return x * a * a / (std::exp(x + 2 * zeta) - std::exp(x + zeta));
}

/// Brute-force mean and second moment of Pr{g} = (e^zeta - 1) e^{-zeta g}, g >= 1.
inline std::pair<double, double> geometric_moments_series(double zeta) {
  const double norm = std::expm1(zeta);
  double m1 = 0.0, m2 = 0.0;
  for (int g = 1; g < 200000; ++g) {
    const double p = norm * std::exp(-zeta * g);
    if (p < 1e-300) break;
    m1 += g * p;
    m2 += double(g) * g * p;
  }
  return {m1, m2};
}

inline std::pair<double, double> golden_max(const std::function<double(double)>& f, double a,
                                            double b, int iters = 200) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Two-level detection problem (lambda1 on the first half, lambda2 on the second, T = 1,
/// q_e = 1, deterministic gain): maximize over the Chernoff parameter s and the first
/// correlator level w, the second level being sqrt(2P - w^2):
///   E(s, w) = [l1 (1 - e^{-s w}) + l2 (1 - e^{-s w'})] / 2 - s theta - s^2 N0 P / 4.
/// For fixed w the bracket is concave in s, so the inner search is exact; the outer
/// search scans w on a fine grid and then refines.
struct TwoLevelOptimum {
  double exponent;
  double s;
  double w1;
  double w2;
};

inline TwoLevelOptimum two_level_optimum(double theta, double l1, double l2, double P,
                                         double N0) {
  const double wmax = std::sqrt(2.0 * P);
  auto inner = [&](double w) {
    const double w2 = std::sqrt(std::max(2.0 * P - w * w, 0.0));
    auto f = [&](double s) {
      return 0.5 * (l1 * -std::expm1(-s * w) + l2 * -std::expm1(-s * w2)) - s * theta -
             s * s * N0 * P / 4.0;
    };
    // f is concave with f(0) = 0 and f'(s) <= (l1 w + l2 w2)/2 - theta - s N0 P / 2,
    // so the maximizer lies below this s_hi.
    const double slope = 0.5 * (l1 * w + l2 * w2) - theta;
    if (slope <= 0.0) return std::pair{0.0, 0.0};
    double s_hi = N0 > 0 ? 2.0 * slope / (N0 * P) : 1.0;
    if (N0 == 0) {
      while (f(2 * s_hi) > f(s_hi)) s_hi *= 2;
      s_hi *= 2;
    }
    auto best = golden_max(f, 0.0, s_hi);
    return best.second > 0 ? best : std::pair{0.0, 0.0};
  };
  const int n = 4000;
  double best_w = 0.0, best_v = -1.0;
  for (int i = 1; i < n; ++i) {
    const double w = wmax * i / n;
    const double v = inner(w).second;
    if (v > best_v) {
      best_v = v;
      best_w = w;
    }
  }
  const double h = wmax / n;
  auto outer = golden_max([&](double w) { return inner(w).second; }, std::max(best_w - h, 0.0),
                          std::min(best_w + h, wmax));
  const auto s = inner(outer.first);
  return {outer.second, s.first, outer.first,
          std::sqrt(std::max(2.0 * P - outer.first * outer.first, 0.0))};
}

}  // namespace oracle
