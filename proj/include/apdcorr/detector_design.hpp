// SPDX-License-Identifier: Apache-2.0
#pragma once

/// \file detector_design.hpp
/// Chernoff error exponents of the correlator detector
///
///     decide H1  iff  \int_0^T w(t) y(t) dt > theta T
///
/// and the power-constrained correlator that maximizes the missed-detection (MD)
/// exponent at a given false-alarm (FA) exponent.
///
/// With no dark current the FA exponent is theta^2 / (N0 P) and depends on w only
/// through its power P, so every correlator is compared at the common power budget
/// of the ReceiverConfig. The MD exponent of a correlator w is
///
///     E_MD = sup_{s >= 0} [ (1/T) \int lambda(t) F(s q_e w(t)) dt - s theta - s^2 N0 P_w / 4 ]
///
/// with F(a) = 1 - e^{-a} for a deterministic gain and
/// F(a) = e^zeta (e^a - 1) / (e^{a+zeta} - 1) for the geometric gain law.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apdcorr/scalar_search.hpp"
#include "apdcorr/signal_model.hpp"
#include "apdcorr/special_functions.hpp"

namespace apdcorr {

/// FA exponent theta^2/(N0 P). With N0 = 0 there is no thermal noise and the FA
/// probability of the dark-free detector is zero: `noise_free` is set and `value` is +inf.
struct FaExponent {
  double value;
  bool noise_free;
};

FaExponent fa_exponent(double theta, double power, double N0);

struct ChernoffExponent {
  double exponent;
  /// Maximizing Chernoff parameter; 0 when the supremum is attained at s = 0.
  double s_opt;
};

/// Gain-averaged Chernoff integrand F(a) for a = s q_e w(t). Returns -inf where the
/// moment generating function diverges (a <= -zeta for the geometric law).
double md_integrand(double a, const GainModel& gain);

/// MD exponent of a fixed correlator. w is used as given (its own power enters the
/// thermal term), so callers comparing correlators should normalize first.
ChernoffExponent md_exponent_for_correlator(const SampledWaveform& w, double theta,
                                            const RateFunction& rate, const GainModel& gain,
                                            const ReceiverConfig& cfg,
                                            const LogGridSearch& search = {});

/// Lagrange constant of the optimal correlator, held as log c because c overflows
/// double precision for moderately large s.
struct PowerConstant {
  double log_c;
  double value() const;
};

/// Finds c with \int p^2[c lambda(t)] dt = s^2 q_e^2 P T (p_zeta for the geometric law).
PowerConstant solve_power_constant(double s, const RateFunction& rate, const GainModel& gain,
                                   const ReceiverConfig& cfg,
                                   const InversionSettings& settings = {});

struct DetectorDesign {
  SampledWaveform w_star;
  double s_star;
  PowerConstant c_star;
  double e_md;
  FaExponent e_fa;
  double theta;
};

/// Optimal correlator w*(t) = p[c lambda(t)] / (s q_e) (p_zeta for the geometric law),
/// maximized over s, returned power-normalized to cfg.power_budget.
DetectorDesign design_detector(double theta, const RateFunction& rate, const GainModel& gain,
                               const ReceiverConfig& cfg, const LogGridSearch& search = {});

/// Design-objective value at a given s, i.e. the bracket of the MD exponent with
/// w = w*(s). Exposed for tests and for plotting the s landscape.
double design_objective(double s, double theta, const RateFunction& rate, const GainModel& gain,
                        const ReceiverConfig& cfg);

/// Optical matched filter lambda / (lambda + N0 / (2 q_e^2 E{g^2})), power-normalized.
SampledWaveform omf_correlator(const RateFunction& rate, const GainModel& gain,
                               const ReceiverConfig& cfg);

/// Same, before power normalization.
SampledWaveform omf_shape(const RateFunction& rate, const GainModel& gain,
                          const ReceiverConfig& cfg);

/// A curve column: a fixed correlator, or the optimal correlator redesigned at every theta
/// when `fixed` is empty.
struct CorrelatorSpec {
  std::string label;
  std::optional<SampledWaveform> fixed;
};

struct ExponentCurve {
  std::vector<double> theta;
  std::vector<double> e_fa;
  std::vector<std::string> labels;
  /// e_md[k][j]: correlator k at theta[j].
  std::vector<std::vector<double>> e_md;
  /// Parameters of the first redesigned (optimal) column, empty if there is none.
  std::vector<double> s_opt;
  std::vector<double> log_c_opt;

  const std::vector<double>& column(const std::string& label) const;
};

/// Sweeps theta (non-negative, increasing). Fixed correlators are power-normalized
/// before evaluation. Parallel over theta; results do not depend on the worker count.
ExponentCurve exponent_tradeoff_curve(std::span<const double> theta_grid,
                                      const std::vector<CorrelatorSpec>& correlators,
                                      const RateFunction& rate, const GainModel& gain,
                                      const ReceiverConfig& cfg, unsigned workers = 0);

/// Curve with the two standard columns "optimal" and "omf".
ExponentCurve standard_tradeoff_curve(std::span<const double> theta_grid,
                                      const RateFunction& rate, const GainModel& gain,
                                      const ReceiverConfig& cfg, unsigned workers = 0);

/// CSV with header theta,E_FA,E_MD_optimal,E_MD_omf,s_opt,c_opt and %.12g numbers.
std::string tradeoff_csv(const ExponentCurve& curve);

// --- dark current -----------------------------------------------------------------

/// FA exponent when H0 carries Poisson dark arrivals at rate lambda_d:
///   sup_{0 <= s, s q_e w_max < zeta} [ s theta - s^2 N0 P_w / 4
///        - (lambda_d e^zeta / T) \int (e^{s q_e w} - 1) / (e^zeta - e^{s q_e w}) dt ].
/// The deterministic gain uses the limit (lambda_d / T) \int (e^{s q_e w} - 1) dt.
ChernoffExponent fa_exponent_dark(double theta, const SampledWaveform& w, double dark_rate,
                                  const GainModel& gain, const ReceiverConfig& cfg,
                                  const LogGridSearch& search = {});

struct DarkLagrangianPoint {
  double s;      // FA Chernoff parameter
  double sigma;  // MD Chernoff parameter
  double theta;
  double mu;     // Lagrange multiplier of the FA constraint
};

/// Joint objective E_MD-bound + mu * E_FA-bound at fixed Chernoff parameters.
/// lambda(t) is rate.waveform(), lambda_d is rate.dark_rate().
double dark_lagrangian_objective(const DarkLagrangianPoint& point, const SampledWaveform& w,
                                 const RateFunction& rate, const GainModel& gain,
                                 const ReceiverConfig& cfg);

/// Deterministic-gain stationary correlator of the dark Lagrangian integrand,
///   w(t) = ln[sigma lambda(t) / (lambda_d mu s)] / ((sigma + s) q_e),
/// i.e. the logarithmic correlator up to scale. Ignores the thermal power term.
SampledWaveform dark_stationary_correlator(double sigma, double s, double mu,
                                           const RateFunction& rate, const ReceiverConfig& cfg);

struct DarkGridAxes {
  std::vector<double> s;
  std::vector<double> sigma;
  std::vector<double> theta;
};

struct DarkGridOptimum {
  DarkLagrangianPoint point;
  std::size_t candidate;
  double value;
};

/// Exhaustive search of dark_lagrangian_objective over s x sigma x theta x candidate
/// correlators at fixed mu. Infeasible s for a candidate is skipped. Coarse exploration
/// only; no optimality guarantee.
DarkGridOptimum dark_tradeoff_grid_search(const DarkGridAxes& axes, double mu,
                                          const std::vector<SampledWaveform>& candidates,
                                          const RateFunction& rate, const GainModel& gain,
                                          const ReceiverConfig& cfg);

}  // namespace apdcorr
