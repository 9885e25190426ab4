// SPDX-License-Identifier: Apache-2.0
#include "apdcorr/special_functions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "apdcorr/errors.hpp"

namespace apdcorr {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

// ln b(x) = ln x + x + correction(x); the correction vanishes for the
// deterministic map x e^x (zeta = +inf).
struct LogMap {
  double zeta;  // +inf selects x e^x

  double correction(double x) const {
    if (std::isinf(zeta)) return 0.0;
    return 2.0 * std::log1p(-std::exp(-x - zeta)) - std::log(-std::expm1(-zeta));
  }
  double correction_slope(double x) const {
    if (std::isinf(zeta)) return 0.0;
    return 2.0 / std::expm1(x + zeta);
  }
  // limit of correction(x) as x -> 0+
  double correction_at_zero() const {
    if (std::isinf(zeta)) return 0.0;
    return std::log(-std::expm1(-zeta));
  }
  double value(double x) const { return std::log(x) + x + correction(x); }
  double slope(double x) const { return 1.0 / x + 1.0 + correction_slope(x); }
};

void check_log_input(double log_y) {
  if (std::isnan(log_y) || log_y == kInf) {
    throw DomainError("inversion input must be finite and non-negative");
  }
}

void check_zeta(double zeta) {
  if (!(zeta > 0.0) || !std::isfinite(zeta)) {
    throw DomainError("zeta must be a positive finite number, got " + std::to_string(zeta));
  }
}

// Solves ln b(x) = log_y for x > 0 by Newton's method on the log residual,
// safeguarded by a bracket [lo, hi] that always contains the root.
double invert(const LogMap& map, double log_y, const InversionSettings& settings) {
  settings.validate();
  check_log_input(log_y);
  if (log_y == -kInf) return 0.0;

  // ln(1 + y) without forming y
  const double log1p_y =
      log_y > 0.0 ? log_y + std::log1p(std::exp(-log_y)) : std::log1p(std::exp(log_y));
  double lo = 0.0;
  double hi = std::max(1.0, log1p_y) + 1.0;
  while (map.value(hi) < log_y) {
    lo = hi;
    hi *= 2.0;
  }

  double x = log_y < 0.0 ? std::exp(log_y - map.correction_at_zero())
                         : log_y - std::log(std::max(log_y, 1.0));
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);

  double residual = map.value(x) - log_y;
  for (int iter = 0; iter < settings.max_iter; ++iter) {
    if (residual < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - residual / map.slope(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool settled = std::abs(next - x) <= 2.0 * kEps * next;
    x = next;
    residual = map.value(x) - log_y;
    if (residual == 0.0 || (settled && std::abs(std::expm1(residual)) <= settings.rel_tol)) {
      return x;
    }
  }
  if (std::abs(std::expm1(residual)) <= settings.rel_tol) return x;
  throw NumericError("monotone inversion did not converge after " +
                     std::to_string(settings.max_iter) + " iterations (log y = " +
                     std::to_string(log_y) + ")");
}

double checked_log(double y) {
  if (!(y >= 0.0) || !std::isfinite(y)) {
    throw DomainError("inversion input must be finite and non-negative, got " +
                      std::to_string(y));
  }
  return y == 0.0 ? -kInf : std::log(y);
}

}  // namespace

void InversionSettings::validate() const {
  if (!(rel_tol > 0.0) || max_iter < 1) {
    throw DomainError("InversionSettings requires rel_tol > 0 and max_iter >= 1");
  }
}

double lambert_b(double x) { return x * std::exp(x); }

double lambert_p(double y, const InversionSettings& settings) {
  return invert(LogMap{kInf}, checked_log(y), settings);
}

double lambert_p_from_log(double log_y, const InversionSettings& settings) {
  return invert(LogMap{kInf}, log_y, settings);
}

double b_zeta(double x, double zeta) {
  check_zeta(zeta);
  const double shrink = -std::expm1(-x - zeta);
  return x * std::exp(x) * shrink * shrink / -std::expm1(-zeta);
}

double log_b_zeta(double x, double zeta) {
  check_zeta(zeta);
  return LogMap{zeta}.value(x);
}

double p_zeta(double y, double zeta, const InversionSettings& settings) {
  check_zeta(zeta);
  return invert(LogMap{zeta}, checked_log(y), settings);
}

double p_zeta_from_log(double log_y, double zeta, const InversionSettings& settings) {
  check_zeta(zeta);
  return invert(LogMap{zeta}, log_y, settings);
}

}  // namespace apdcorr
