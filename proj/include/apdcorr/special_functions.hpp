// SPDX-License-Identifier: Apache-2.0
#pragma once

/// \file special_functions.hpp
/// Inverses of the monotone maps b(x) = x e^x and
/// b_zeta(x) = x (e^{x+zeta} - 1)^2 / (e^{x+2 zeta} - e^{x+zeta}) on x >= 0.
///
/// Both maps grow exponentially, so every inversion is also offered on a
/// logarithmic input: `*_from_log(L)` returns the x with ln b(x) = L. This is
/// the form the correlator design uses, since c * lambda easily exceeds the
/// double range when the Chernoff parameter is large.

namespace apdcorr {

struct InversionSettings {
  double rel_tol = 1e-10;
  int max_iter = 200;

  /// Throws DomainError unless rel_tol > 0 and max_iter >= 1.
  void validate() const;
};

/// x e^x.
double lambert_b(double x);

/// Inverse of lambert_b on [0, inf): the principal Lambert W restricted to y >= 0.
double lambert_p(double y, const InversionSettings& settings = {});

/// lambert_p(exp(log_y)), without forming exp(log_y). log_y = -inf gives 0.
double lambert_p_from_log(double log_y, const InversionSettings& settings = {});

/// b_zeta(x), evaluated as x e^x (1 - e^{-x-zeta})^2 / (1 - e^{-zeta}).
double b_zeta(double x, double zeta);

/// ln b_zeta(x) for x > 0.
double log_b_zeta(double x, double zeta);

/// Inverse of b_zeta on [0, inf).
double p_zeta(double y, double zeta, const InversionSettings& settings = {});

/// p_zeta(exp(log_y), zeta).
double p_zeta_from_log(double log_y, double zeta, const InversionSettings& settings = {});

}  // namespace apdcorr
