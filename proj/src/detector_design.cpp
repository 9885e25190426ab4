// SPDX-License-Identifier: Apache-2.0
#include "apdcorr/detector_design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

#include "apdcorr/errors.hpp"
#include "apdcorr/parallel.hpp"

namespace apdcorr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Beyond this Chernoff argument e^{-a} is below double resolution of 1.
constexpr double kSaturatedArgument = 700.0;

// Inverse map p (or p_zeta) together with the log of its forward map, as needed by
// the Newton iteration on log c.
struct CorrelatorLaw {
  const GainModel& gain;
  const InversionSettings& settings;

  double invert_log(double log_y) const {
    return gain.is_deterministic() ? lambert_p_from_log(log_y, settings)
                                   : p_zeta_from_log(log_y, gain.zeta(), settings);
  }
  // d ln b / dx
  double log_slope(double x) const {
    const double base = 1.0 / x + 1.0;
    return gain.is_deterministic() ? base : base + 2.0 / std::expm1(x + gain.zeta());
  }
};

// Distinct positive rate values with their total quadrature weight.
struct RateLevels {
  std::vector<double> level;
  std::vector<double> log_level;
  std::vector<double> weight;
  std::vector<std::size_t> level_of_sample;  // npos for zero-rate samples
  double positive_weight = 0.0;
};

constexpr std::size_t kNoLevel = static_cast<std::size_t>(-1);

RateLevels compress_levels(const RateFunction& rate) {
  RateLevels out;
  const auto values = rate.waveform().values();
  std::map<double, std::size_t> index;
  for (double v : values) {
    if (v > 0.0) index.emplace(v, 0);
  }
  if (index.empty()) throw DomainError("rate is identically zero; nothing to detect");
  for (auto& [v, idx] : index) {
    idx = out.level.size();
    out.level.push_back(v);
    out.log_level.push_back(std::log(v));
    out.weight.push_back(0.0);
  }
  const double dt = rate.grid().dt();
  out.level_of_sample.resize(values.size(), kNoLevel);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0) {
      const std::size_t k = index.at(values[i]);
      out.level_of_sample[i] = k;
      out.weight[k] += dt;
      out.positive_weight += dt;
    }
  }
  return out;
}

// Positive root of q2 s^2 + theta s = bound, or +inf when neither term grows.
double penalty_crossing(double quadratic, double theta, double bound) {
  if (quadratic <= 0.0 && theta <= 0.0) return kInf;
  return 2.0 * bound / (theta + std::sqrt(theta * theta + 4.0 * quadratic * bound));
}

ChernoffExponent finish(const ScalarMaximum& best) {
  if (!(best.value > 0.0)) return {0.0, 0.0};
  return {best.value, best.argument};
}

struct LevelSolution {
  double log_c;
  std::vector<double> p;  // per level
};

LevelSolution solve_levels(double s, const RateLevels& levels, const CorrelatorLaw& law,
                           const ReceiverConfig& cfg) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("Chernoff parameter s must be positive and finite");
  }
  const double target = s * s * cfg.q_e * cfg.q_e * cfg.power_budget * cfg.horizon;
  const double log_target = std::log(target);
  const std::size_t m = levels.level.size();
  std::vector<double> p(m);

  // residual(L) = ln \int p^2[e^L lambda] - ln target, increasing in L
  auto evaluate = [&](double log_c, double& slope) {
    double h = 0.0, dh = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      p[k] = law.invert_log(log_c + levels.log_level[k]);
      h += levels.weight[k] * p[k] * p[k];
      dh += 2.0 * levels.weight[k] * p[k] / law.log_slope(p[k]);
    }
    slope = dh / h;
    return std::log(h) - log_target;
  };

  // start where a flat correlator would meet the budget
  double mean_log_level = 0.0;
  for (std::size_t k = 0; k < m; ++k) mean_log_level += levels.weight[k] * levels.log_level[k];
  mean_log_level /= levels.positive_weight;
  const double x0 = s * cfg.q_e * std::sqrt(cfg.power_budget * cfg.horizon / levels.positive_weight);
  const double phi0 = law.gain.is_deterministic() ? std::log(x0) + x0
                                                  : log_b_zeta(x0, law.gain.zeta());
  double log_c = phi0 - mean_log_level;

  double slope = 0.0;
  double r = evaluate(log_c, slope);
  double lo = -kInf, hi = kInf;
  for (int iter = 0; iter < 200; ++iter) {
    if (r < 0.0) {
      lo = log_c;
    } else {
      hi = log_c;
    }
    if (std::abs(r) <= 1e-13) return {log_c, p};
    double next = log_c - r / slope;
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        next = 0.5 * (lo + hi);
      } else {
        next = std::isfinite(lo) ? lo + std::max(1.0, std::abs(lo)) : hi - std::max(1.0, std::abs(hi));
      }
    }
    if (std::isfinite(lo) && std::isfinite(hi) && hi - lo <= 1e-15 * std::max(1.0, std::abs(log_c))) {
      break;
    }
    log_c = next;
    r = evaluate(log_c, slope);
  }
  if (std::abs(r) <= 1e-9) return {log_c, p};
  throw NumericError("power constant did not converge for s = " + std::to_string(s));
}

double design_value(double s, double theta, const RateLevels& levels, const CorrelatorLaw& law,
                    const ReceiverConfig& cfg, LevelSolution* keep = nullptr) {
  LevelSolution sol = solve_levels(s, levels, law, cfg);
  double gain_term = 0.0;
  for (std::size_t k = 0; k < levels.level.size(); ++k) {
    gain_term += levels.weight[k] * levels.level[k] * md_integrand(sol.p[k], law.gain);
  }
  const double value = gain_term / cfg.horizon - s * theta -
                       s * s * cfg.N0 * cfg.power_budget / 4.0;
  if (keep) *keep = std::move(sol);
  return value;
}

double dark_term(double a, const GainModel& gain) {
  if (gain.is_deterministic()) return std::expm1(a);
  if (a >= gain.zeta()) return kInf;
  return std::expm1(a) / -std::expm1(a - gain.zeta());
}

void check_nan(double value, const SampledWaveform& w, std::size_t i, const char* what) {
  if (std::isnan(value)) {
    throw NumericError(std::string(what) + " integrand is not finite at t = " +
                       std::to_string(w.grid().time(i)));
  }
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

FaExponent fa_exponent(double theta, double power, double N0) {
  if (!(power > 0.0)) throw DomainError("correlator power must be positive");
  if (!(N0 >= 0.0)) throw DomainError("N0 must be non-negative");
  if (N0 == 0.0) return {kInf, true};
  return {theta * theta / (N0 * power), false};
}

double md_integrand(double a, const GainModel& gain) {
  if (gain.is_deterministic()) return -std::expm1(-a);
  if (a + gain.zeta() <= 0.0) return -kInf;
  return -std::expm1(-a) / -std::expm1(-a - gain.zeta());
}

ChernoffExponent md_exponent_for_correlator(const SampledWaveform& w, double theta,
                                            const RateFunction& rate, const GainModel& gain,
                                            const ReceiverConfig& cfg,
                                            const LogGridSearch& search) {
  require_same_grid(w, rate.waveform());
  require_matching_horizon(cfg, w.grid());
  const double T = cfg.horizon;
  const double dt = w.grid().dt();
  const double power = w.power();
  const double w_abs = std::max(std::abs(w.max()), std::abs(w.min()));
  const double bound = rate.expected_count() / T;
  if (!(bound > 0.0) || !(w_abs > 0.0)) return {0.0, 0.0};

  auto objective = [&](double s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (rate[i] == 0.0) continue;
      const double term = rate[i] * md_integrand(s * cfg.q_e * w[i], gain);
      check_nan(term, w, i, "MD");
      sum += term;
    }
    return sum * dt / T - s * theta - s * s * cfg.N0 * power / 4.0;
  };

  double s_hi = penalty_crossing(cfg.N0 * power / 4.0, theta, bound);
  if (!std::isfinite(s_hi)) s_hi = kSaturatedArgument / (cfg.q_e * w_abs);
  if (!gain.is_deterministic() && w.min() < 0.0) {
    s_hi = std::min(s_hi, gain.zeta() / (cfg.q_e * -w.min()) * (1.0 - 1e-9));
  }
  return finish(maximize_on_log_grid(objective, 1e-6 * s_hi, s_hi, search));
}

double PowerConstant::value() const { return std::exp(log_c); }

PowerConstant solve_power_constant(double s, const RateFunction& rate, const GainModel& gain,
                                   const ReceiverConfig& cfg, const InversionSettings& settings) {
  require_matching_horizon(cfg, rate.grid());
  const RateLevels levels = compress_levels(rate);
  return {solve_levels(s, levels, CorrelatorLaw{gain, settings}, cfg).log_c};
}

double design_objective(double s, double theta, const RateFunction& rate, const GainModel& gain,
                        const ReceiverConfig& cfg) {
  require_matching_horizon(cfg, rate.grid());
  const InversionSettings settings;
  return design_value(s, theta, compress_levels(rate), CorrelatorLaw{gain, settings}, cfg);
}

DetectorDesign design_detector(double theta, const RateFunction& rate, const GainModel& gain,
                               const ReceiverConfig& cfg, const LogGridSearch& search) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw DomainError("threshold theta must be non-negative");
  }
  require_matching_horizon(cfg, rate.grid());
  const RateLevels levels = compress_levels(rate);
  const InversionSettings settings;
  const CorrelatorLaw law{gain, settings};
  const double P = cfg.power_budget;

  double s_hi = penalty_crossing(cfg.N0 * P / 4.0, theta, rate.expected_count() / cfg.horizon);
  if (!std::isfinite(s_hi)) s_hi = 1e4 / (cfg.q_e * std::sqrt(P));

  const auto best = maximize_on_log_grid(
      [&](double s) { return design_value(s, theta, levels, law, cfg); }, 1e-6 * s_hi, s_hi,
      search);
  const FaExponent e_fa = fa_exponent(theta, P, cfg.N0);

  if (!(best.value > 0.0)) {
    // s* = 0: the limiting shape p[c lambda] ~ c lambda is the matched correlator
    return {normalize_power(rate.waveform(), P, cfg.horizon), 0.0, PowerConstant{-kInf}, 0.0,
            e_fa, theta};
  }

  LevelSolution sol;
  const double e_md = design_value(best.argument, theta, levels, law, cfg, &sol);
  std::vector<double> w(rate.grid().size(), 0.0);
  const double scale = 1.0 / (best.argument * cfg.q_e);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t k = levels.level_of_sample[i];
    if (k != kNoLevel) w[i] = sol.p[k] * scale;
  }
  return {normalize_power(SampledWaveform(rate.grid(), std::move(w)), P, cfg.horizon),
          best.argument,
          PowerConstant{sol.log_c},
          e_md,
          e_fa,
          theta};
}

SampledWaveform omf_shape(const RateFunction& rate, const GainModel& gain,
                          const ReceiverConfig& cfg) {
  const double floor = cfg.N0 / (2.0 * cfg.q_e * cfg.q_e * gain_moments(gain).second_moment);
  return rate.waveform().map([floor](double l) { return l > 0.0 ? l / (l + floor) : 0.0; });
}

SampledWaveform omf_correlator(const RateFunction& rate, const GainModel& gain,
                               const ReceiverConfig& cfg) {
  require_matching_horizon(cfg, rate.grid());
  return normalize_power(omf_shape(rate, gain, cfg), cfg.power_budget, cfg.horizon);
}

const std::vector<double>& ExponentCurve::column(const std::string& label) const {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == label) return e_md[k];
  }
  throw DomainError("exponent curve has no column '" + label + "'");
}

ExponentCurve exponent_tradeoff_curve(std::span<const double> theta_grid,
                                      const std::vector<CorrelatorSpec>& correlators,
                                      const RateFunction& rate, const GainModel& gain,
                                      const ReceiverConfig& cfg, unsigned workers) {
  if (theta_grid.empty()) throw DomainError("theta grid is empty");
  for (std::size_t j = 0; j < theta_grid.size(); ++j) {
    if (!(theta_grid[j] >= 0.0)) throw DomainError("theta values must be non-negative");
    if (j > 0 && !(theta_grid[j] > theta_grid[j - 1])) {
      throw DomainError("theta values must be increasing");
    }
  }
  require_matching_horizon(cfg, rate.grid());

  std::vector<std::optional<SampledWaveform>> fixed;
  std::ptrdiff_t designed = -1;
  ExponentCurve curve;
  for (std::size_t k = 0; k < correlators.size(); ++k) {
    const auto& spec = correlators[k];
    curve.labels.push_back(spec.label);
    if (spec.fixed) {
      require_same_grid(*spec.fixed, rate.waveform());
      fixed.emplace_back(normalize_power(*spec.fixed, cfg.power_budget, cfg.horizon));
    } else {
      fixed.emplace_back(std::nullopt);
      if (designed < 0) designed = static_cast<std::ptrdiff_t>(k);
    }
  }

  const std::size_t n = theta_grid.size();
  curve.theta.assign(theta_grid.begin(), theta_grid.end());
  curve.e_fa.resize(n);
  curve.e_md.assign(correlators.size(), std::vector<double>(n, 0.0));
  if (designed >= 0) {
    curve.s_opt.resize(n);
    curve.log_c_opt.resize(n);
  }

  parallel_for(
      n,
      [&](std::size_t j) {
        const double theta = theta_grid[j];
        curve.e_fa[j] = fa_exponent(theta, cfg.power_budget, cfg.N0).value;
        for (std::size_t k = 0; k < correlators.size(); ++k) {
          if (fixed[k]) {
            curve.e_md[k][j] =
                md_exponent_for_correlator(*fixed[k], theta, rate, gain, cfg).exponent;
          } else {
            const DetectorDesign d = design_detector(theta, rate, gain, cfg);
            curve.e_md[k][j] = d.e_md;
            if (static_cast<std::ptrdiff_t>(k) == designed) {
              curve.s_opt[j] = d.s_star;
              curve.log_c_opt[j] = d.c_star.log_c;
            }
          }
        }
      },
      workers);
  return curve;
}

ExponentCurve standard_tradeoff_curve(std::span<const double> theta_grid,
                                      const RateFunction& rate, const GainModel& gain,
                                      const ReceiverConfig& cfg, unsigned workers) {
  return exponent_tradeoff_curve(
      theta_grid, {{"optimal", std::nullopt}, {"omf", omf_correlator(rate, gain, cfg)}}, rate,
      gain, cfg, workers);
}

std::string tradeoff_csv(const ExponentCurve& curve) {
  const auto& opt = curve.column("optimal");
  const auto& omf = curve.column("omf");
  if (curve.s_opt.size() != curve.theta.size()) {
    throw DomainError("curve has no redesigned column parameters");
  }
  std::string out = "theta,E_FA,E_MD_optimal,E_MD_omf,s_opt,c_opt\n";
  for (std::size_t j = 0; j < curve.theta.size(); ++j) {
    out += format_number(curve.theta[j]) + ',' + format_number(curve.e_fa[j]) + ',' +
           format_number(opt[j]) + ',' + format_number(omf[j]) + ',' +
           format_number(curve.s_opt[j]) + ',' + format_number(std::exp(curve.log_c_opt[j])) +
           '\n';
  }
  return out;
}

ChernoffExponent fa_exponent_dark(double theta, const SampledWaveform& w, double dark_rate,
                                  const GainModel& gain, const ReceiverConfig& cfg,
                                  const LogGridSearch& search) {
  if (!(theta > 0.0)) throw DomainError("dark-current FA exponent needs theta > 0");
  if (!(dark_rate >= 0.0)) throw DomainError("dark rate must be non-negative");
  require_matching_horizon(cfg, w.grid());
  const double w_max = w.max();
  if (!(w_max > 0.0)) {
    throw DomainError("feasible Chernoff interval s q_e w_max < zeta is undefined for w_max <= 0");
  }
  const double T = cfg.horizon;
  const double dt = w.grid().dt();
  const double power = w.power();

  auto objective = [&](double s) {
    double dark = 0.0;
    if (dark_rate > 0.0) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double term = dark_term(s * cfg.q_e * w[i], gain);
        check_nan(term, w, i, "dark FA");
        dark += term;
      }
      dark *= dark_rate * dt / T;
    }
    return s * theta - s * s * cfg.N0 * power / 4.0 - dark;
  };

  double s_hi = cfg.N0 > 0.0 ? 4.0 * theta / (cfg.N0 * power) : kInf;
  if (!gain.is_deterministic()) {
    s_hi = std::min(s_hi, gain.zeta() / (cfg.q_e * w_max) * (1.0 - 1e-12));
  }
  if (!std::isfinite(s_hi)) {
    if (dark_rate == 0.0) {
      throw DomainError("FA exponent is unbounded without thermal noise or dark current");
    }
    s_hi = 1.0 / (cfg.q_e * w_max);
    for (int k = 0; k < 200 && objective(s_hi) >= 0.0; ++k) s_hi *= 2.0;
  }
  return finish(maximize_on_log_grid(objective, 1e-6 * s_hi, s_hi, search));
}

double dark_lagrangian_objective(const DarkLagrangianPoint& point, const SampledWaveform& w,
                                 const RateFunction& rate, const GainModel& gain,
                                 const ReceiverConfig& cfg) {
  const auto& [s, sigma, theta, mu] = point;
  if (!(s >= 0.0) || !(sigma >= 0.0) || !(theta >= 0.0) || !(mu >= 0.0)) {
    throw DomainError("Lagrangian parameters s, sigma, theta, mu must be non-negative");
  }
  require_same_grid(w, rate.waveform());
  require_matching_horizon(cfg, w.grid());
  if (!gain.is_deterministic() && !(s * cfg.q_e * w.max() < gain.zeta())) {
    throw DomainError("infeasible s: s q_e w_max must stay below zeta");
  }
  const double lambda_d = rate.dark_rate();
  double integral = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double term = 0.0;
    if (rate[i] > 0.0) term += rate[i] * md_integrand(sigma * cfg.q_e * w[i], gain);
    if (mu > 0.0 && lambda_d > 0.0) term -= mu * lambda_d * dark_term(s * cfg.q_e * w[i], gain);
    check_nan(term, w, i, "dark Lagrangian");
    integral += term;
  }
  const double power = w.power();
  return integral * w.grid().dt() / cfg.horizon + (mu * s - sigma) * theta -
         (sigma * sigma + mu * s * s) * cfg.N0 * power / 4.0;
}

SampledWaveform dark_stationary_correlator(double sigma, double s, double mu,
                                           const RateFunction& rate, const ReceiverConfig& cfg) {
  if (!(sigma > 0.0) || !(s > 0.0) || !(mu > 0.0)) {
    throw DomainError("stationary correlator needs sigma, s, mu > 0");
  }
  if (!(rate.dark_rate() > 0.0)) throw DomainError("stationary correlator needs a dark rate");
  const double offset = std::log(sigma / (rate.dark_rate() * mu * s));
  const double scale = 1.0 / ((sigma + s) * cfg.q_e);
  return rate.waveform().map([&](double l) { return (offset + std::log(l)) * scale; });
}

DarkGridOptimum dark_tradeoff_grid_search(const DarkGridAxes& axes, double mu,
                                          const std::vector<SampledWaveform>& candidates,
                                          const RateFunction& rate, const GainModel& gain,
                                          const ReceiverConfig& cfg) {
  if (candidates.empty() || axes.s.empty() || axes.sigma.empty() || axes.theta.empty()) {
    throw DomainError("dark grid search needs non-empty axes and candidates");
  }
  DarkGridOptimum best{{0.0, 0.0, 0.0, mu}, 0, -kInf};
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double w_max = candidates[c].max();
    for (double s : axes.s) {
      if (!gain.is_deterministic() && !(s * cfg.q_e * w_max < gain.zeta())) continue;
      for (double sigma : axes.sigma) {
        for (double theta : axes.theta) {
          const DarkLagrangianPoint point{s, sigma, theta, mu};
          const double v = dark_lagrangian_objective(point, candidates[c], rate, gain, cfg);
          if (v > best.value) best = {point, c, v};
        }
      }
    }
  }
  if (!std::isfinite(best.value)) throw DomainError("no feasible point on the dark search grid");
  return best;
}

}  // namespace apdcorr
