// SPDX-License-Identifier: Apache-2.0
#include "apdcorr/delay_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apdcorr/errors.hpp"

namespace apdcorr {

namespace {

double l2_norm(const SampledWaveform& w) { return std::sqrt(w.energy()); }

}  // namespace

double crossover_rate(const RateFunction& rate, const GainModel& gain, const ReceiverConfig& cfg) {
  const double g2 = gain_moments(gain).second_moment;
  return cfg.N0 / (2.0 * g2 * cfg.q_e * cfg.q_e) + rate.dark_rate();
}

void require_vanishing_boundary(const RateFunction& rate) {
  const SampledWaveform signal = rate.signal_component();
  const double peak = signal.max();
  const BoundaryValues edge = boundary_values(signal);
  // The extrapolation itself is only accurate to about one third difference of the
  // edge samples; without that allowance smooth pulses on coarse grids are rejected.
  const auto v = signal.values();
  const std::size_t n = v.size();
  const double slack_start = std::abs(v[3] - 3.0 * v[2] + 3.0 * v[1] - v[0]);
  const double slack_end = std::abs(v[n - 4] - 3.0 * v[n - 3] + 3.0 * v[n - 2] - v[n - 1]);
  if (std::abs(edge.start) > 1e-9 * peak + slack_start) {
    throw PreconditionError("rate must vanish at t = 0 (extrapolated value " +
                                std::to_string(edge.start) + ")",
                            edge.start);
  }
  if (std::abs(edge.end) > 1e-9 * peak + slack_end) {
    throw PreconditionError("rate must vanish at t = T (extrapolated value " +
                                std::to_string(edge.end) + ")",
                            edge.end);
  }
}

SampledWaveform optimal_delay_correlator(const RateFunction& rate, const GainModel& gain,
                                         const ReceiverConfig& cfg) {
  require_matching_horizon(cfg, rate.grid());
  require_vanishing_boundary(rate);
  const double lambda0 = crossover_rate(rate, gain, cfg);
  if (!(lambda0 > 0.0)) {
    throw DomainError("log correlator needs N0 > 0 or a dark rate (crossover rate is zero)");
  }
  const SampledWaveform w =
      rate.signal_component().map([lambda0](double l) { return std::log1p(std::max(l, 0.0) / lambda0); });
  return normalize_power(w, cfg.power_budget, cfg.horizon);
}

DelayMse delay_mse(const SampledWaveform& w, const RateFunction& rate, const GainModel& gain,
                   const ReceiverConfig& cfg) {
  require_same_grid(w, rate.waveform());
  require_matching_horizon(cfg, w.grid());
  const SampledWaveform& lambda = rate.waveform();
  const SampledWaveform w1 = derivative(w);
  const SampledWaveform w2 = second_derivative(w);

  const double drift = inner_product(lambda, w1);
  if (std::abs(drift) > 1e-6 * l2_norm(lambda) * l2_norm(w1)) {
    throw PreconditionError("correlation does not peak at zero lag: \\int lambda w' = " +
                                std::to_string(drift),
                            drift);
  }

  const GainMoments g = gain_moments(gain);
  const double q = cfg.q_e;
  const double curvature = g.mean * q * inner_product(lambda, w2);
  if (std::abs(curvature) <= 1e-12 * g.mean * q * l2_norm(lambda) * l2_norm(w2)) {
    throw DomainError("flat correlation peak: \\int lambda w'' vanishes");
  }

  double variance = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    variance += (0.5 * cfg.N0 + g.second_moment * q * q * lambda[i]) * w1[i] * w1[i];
  }
  variance *= w.grid().dt();
  return {variance / (curvature * curvature), {curvature, variance}};
}

MseClosedForms mse_closed_forms(const RateFunction& rate, const GainModel& gain,
                                const ReceiverConfig& cfg) {
  require_matching_horizon(cfg, rate.grid());
  require_vanishing_boundary(rate);
  const SampledWaveform signal = rate.signal_component();
  const SampledWaveform slope = derivative(signal);
  const double lambda0 = crossover_rate(rate, gain, cfg);
  const GainMoments g = gain_moments(gain);

  double sq = 0.0, weighted = 0.0, inverse_weighted = 0.0;
  for (std::size_t i = 0; i < slope.size(); ++i) {
    const double d2 = slope[i] * slope[i];
    if (d2 == 0.0) continue;
    const double level = lambda0 + std::max(signal[i], 0.0);
    sq += d2;
    weighted += level * d2;
    inverse_weighted += d2 / level;
  }
  if (sq == 0.0) throw DomainError("rate has no slope: the delay carries no timing information");
  const double dt = rate.grid().dt();
  sq *= dt;
  weighted *= dt;
  inverse_weighted *= dt;
  const double k = g.second_moment / (g.mean * g.mean);
  return {k * weighted / (sq * sq), k / inverse_weighted};
}

NoiseKernel NoiseKernel::white_thermal(const Grid& grid, double N0) {
  if (!(N0 >= 0.0)) throw DomainError("N0 must be non-negative");
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  k.diagonal().setConstant(0.5 * N0 / grid.dt());
  return {grid, std::move(k)};
}

NoiseKernel NoiseKernel::white_shot(const RateFunction& rate, const GainModel& gain,
                                    const ReceiverConfig& cfg) {
  NoiseKernel k = white_thermal(rate.grid(), cfg.N0);
  const double shot = gain_moments(gain).second_moment * cfg.q_e * cfg.q_e / rate.grid().dt();
  for (std::size_t i = 0; i < rate.grid().size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    k.values_(idx, idx) += shot * rate[i];
  }
  return k;
}

NoiseKernel& NoiseKernel::add_colored(const std::function<double(double, double)>& covariance) {
  const auto n = values_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      values_(i, j) += covariance(grid_.time(static_cast<std::size_t>(i)),
                                  grid_.time(static_cast<std::size_t>(j)));
    }
  }
  return *this;
}

KernelSolve solve_nonwhite_correlator(const NoiseKernel& kernel, const RateFunction& rate,
                                      const ReceiverConfig& cfg) {
  if (!(kernel.grid() == rate.grid())) throw DomainError("kernel and rate grids differ");
  require_matching_horizon(cfg, rate.grid());
  require_vanishing_boundary(rate);

  const Eigen::MatrixXd& K = kernel.values();
  const double scale = K.cwiseAbs().maxCoeff();
  if (!((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale)) {
    throw DomainError("noise kernel is not symmetric");
  }

  const double dt = rate.grid().dt();
  const Eigen::MatrixXd M = K * dt;
  const SampledWaveform slope = derivative(rate.waveform());
  const Eigen::Map<const Eigen::VectorXd> rhs(slope.values().data(),
                                              static_cast<Eigen::Index>(slope.size()));

  bool regularized = false;
  Eigen::VectorXd v;
  double rcond = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() == Eigen::Success) {
    rcond = llt.rcond();
    v = llt.solve(rhs);
  }
  if (llt.info() != Eigen::Success || !(rcond > 1e-14)) {
    regularized = true;
    const double eps = 1e-10 * M.trace() / static_cast<double>(M.rows());
    Eigen::MatrixXd shifted = M;
    shifted.diagonal().array() += eps;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(shifted);
    rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
    if (!(rcond > 1e-14)) {
      throw NumericError("noise kernel is singular or ill-conditioned (reciprocal condition " +
                         std::to_string(rcond) + ")");
    }
    v = ldlt.solve(rhs);
  }

  const double rhs_norm = rhs.cwiseAbs().maxCoeff();
  const double residual =
      rhs_norm > 0.0 ? (M * v - rhs).cwiseAbs().maxCoeff() / rhs_norm : 0.0;
  SampledWaveform derivative_w(rate.grid(), std::vector<double>(v.data(), v.data() + v.size()));
  SampledWaveform w = normalize_power(cumulative_integral(derivative_w), cfg.power_budget,
                                      cfg.horizon);
  return {std::move(w), std::move(derivative_w), residual, rcond, regularized};
}

SampledWaveform nonwhite_optimal_correlator(const NoiseKernel& kernel, const RateFunction& rate,
                                            const ReceiverConfig& cfg) {
  return solve_nonwhite_correlator(kernel, rate, cfg).w;
}

double pulse_fwhm(const RateFunction& rate) {
  const SampledWaveform signal = rate.signal_component();
  const double half = 0.5 * signal.max();
  if (!(half > 0.0)) throw DomainError("rate has no pulse");
  std::size_t count = 0;
  for (double v : signal.values()) count += v >= half ? 1 : 0;
  return static_cast<double>(count) * rate.grid().dt();
}

}  // namespace apdcorr
