// SPDX-License-Identifier: Apache-2.0
#pragma once

/// \file delay_estimation.hpp
/// High-SNR analysis of the correlation delay estimator
///   theta_hat = argmax_theta \int y(t) w(t - theta) dt.
///
/// Linearizing around the true delay gives
///   MSE ~ \int [N0/2 + E{g^2} q_e^2 lambda] w'^2 dt / (gbar^2 q_e^2 [\int lambda w'' dt]^2).
///
/// Throughout, lambda_0 denotes the crossover rate N0 / (2 E{g^2} q_e^2) at which shot
/// noise and thermal noise contribute equally; a dark rate lambda_d acts as extra white
/// noise and moves it to lambda_0 + lambda_d.

#include <Eigen/Dense>
#include <functional>

#include "apdcorr/signal_model.hpp"

namespace apdcorr {

/// Numerator/denominator split of the linearized error U_n / A.
struct DelayLinearization {
  /// A = gbar q_e \int lambda w'' dt
  double curvature;
  /// E{U_n^2} = \int [N0/2 + E{g^2} q_e^2 lambda] w'^2 dt
  double noise_variance;
};

struct DelayMse {
  double mse;
  DelayLinearization linearization;
};

/// N0 / (2 E{g^2} q_e^2) + lambda_d.
double crossover_rate(const RateFunction& rate, const GainModel& gain, const ReceiverConfig& cfg);

/// Throws PreconditionError unless the signal part of the rate vanishes at t = 0 and t = T
/// (quadratic extrapolation of the samples, tolerance 1e-9 max lambda plus the size of the
/// third difference of the edge samples, which bounds the extrapolation error).
void require_vanishing_boundary(const RateFunction& rate);

/// w*(t) = ln(1 + lambda_s(t) / lambda_0), power-normalized to cfg.power_budget;
/// lambda_s is the rate without its dark component.
SampledWaveform optimal_delay_correlator(const RateFunction& rate, const GainModel& gain,
                                         const ReceiverConfig& cfg);

/// Linearized MSE of an arbitrary twice-differentiable correlator.
/// Requires |\int lambda w'| <= 1e-6 |lambda| |w'| (the correlation peaks at zero lag).
DelayMse delay_mse(const SampledWaveform& w, const RateFunction& rate, const GainModel& gain,
                   const ReceiverConfig& cfg);

struct MseClosedForms {
  double matched;
  double optimal;
};

/// Closed forms of the linearized MSE for w = lambda_s (matched) and for w*:
///   matched = k lambda_0 \int (1 + lambda_s/lambda_0) lambda_s'^2 / [\int lambda_s'^2]^2
///   optimal = k lambda_0 / \int lambda_s'^2 / (1 + lambda_s/lambda_0)
/// with k = E{g^2} / gbar^2 (1 for a deterministic gain).
MseClosedForms mse_closed_forms(const RateFunction& rate, const GainModel& gain,
                                const ReceiverConfig& cfg);

/// Discretized noise autocorrelation kernel R0(s, t) on a grid. Delta functions are
/// represented as 1/dt on the diagonal.
class NoiseKernel {
 public:
  /// N0/2 delta(s - t): thermal noise only.
  static NoiseKernel white_thermal(const Grid& grid, double N0);
  /// N0/2 delta + E{g^2} q_e^2 lambda(t) delta: thermal plus shot and excess noise.
  static NoiseKernel white_shot(const RateFunction& rate, const GainModel& gain,
                                const ReceiverConfig& cfg);

  /// Adds a smooth (colored) thermal component R_n(s, t).
  NoiseKernel& add_colored(const std::function<double(double, double)>& covariance);

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

 private:
  NoiseKernel(Grid grid, Eigen::MatrixXd values) : grid_(grid), values_(std::move(values)) {}
  Grid grid_;
  Eigen::MatrixXd values_;
};

struct KernelSolve {
  SampledWaveform w;
  /// v = w' solving \int R0(s, t) v(t) dt = lambda'(s)
  SampledWaveform derivative;
  /// max-norm residual of the discretized system, relative to |lambda'|
  double relative_residual;
  double rcond;
  bool regularized;
};

/// Optimal delay correlator for a general noise kernel; the result is power-normalized.
/// For white kernels it reduces to the closed-form correlators.
KernelSolve solve_nonwhite_correlator(const NoiseKernel& kernel, const RateFunction& rate,
                                      const ReceiverConfig& cfg);

SampledWaveform nonwhite_optimal_correlator(const NoiseKernel& kernel, const RateFunction& rate,
                                            const ReceiverConfig& cfg);

/// Full width at half maximum of the signal part of the rate.
double pulse_fwhm(const RateFunction& rate);

}  // namespace apdcorr
