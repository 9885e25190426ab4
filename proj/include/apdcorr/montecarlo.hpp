// SPDX-License-Identifier: Apache-2.0
#pragma once

// Direct simulation of the receiver: Poisson photo-electron arrivals, avalanche gains,
// impulse deposits and white Gaussian thermal noise on the sampling grid. Nothing here
// uses the analytic exponents; the simulator is an independent check on them.

#include <cstdint>
#include <optional>
#include <vector>

#include "apdcorr/philox.hpp"
#include "apdcorr/signal_model.hpp"

namespace apdcorr {

inline constexpr double kWilsonZ = 1.959963984540054;

struct SimConfig {
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  /// 0 selects worker_count(); results never depend on it.
  unsigned workers = 0;

  void validate() const;
};

struct WilsonInterval {
  double center;
  double half_width;
  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
};

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z = kWilsonZ);

/// Standard normal tail Q(x) = P{N(0,1) > x}.
double gaussian_tail(double x);

struct DelayStatistics {
  double mse;
  double bias;
  /// Standard error of the MSE estimate.
  double mse_stderr;
  double anomaly_fraction;
  /// Anomaly threshold used (the rate's FWHM).
  double anomaly_threshold;
};

struct MonteCarloReport {
  std::size_t trials;
  /// Decision errors (detection) or anomalies (delay estimation).
  std::size_t error_count;
  double empirical_rate;
  WilsonInterval wilson;
  std::optional<DelayStatistics> delay;
};

/// One-sided check of an exponential upper bound P <= exp(log_bound):
/// log(rate) <= log_bound + sigmas * half_width / rate. Zero observed errors always pass.
bool consistent_with_bound(const MonteCarloReport& report, double log_bound, double sigmas = 3.0);

/// |rate - p| <= sigmas * sqrt(p (1 - p) / trials); for p = 0 only zero errors pass.
bool consistent_with_probability(const MonteCarloReport& report, double p, double sigmas = 3.0);

/// Inverse-CDF sampler for the piecewise-constant density lambda_i / Lambda on a grid.
class ArrivalSampler {
 public:
  explicit ArrivalSampler(const SampledWaveform& rate);

  double expected_count() const noexcept { return total_; }
  /// Poisson(Lambda) many i.i.d. times in [0, T), in draw order.
  std::vector<double> sample(Philox4x64& rng) const;

 private:
  Grid grid_;
  std::vector<double> cumulative_;  // cumulative_[i] = dt * sum_{j < i} lambda_j
  double total_;
};

std::vector<double> sample_arrivals(const RateFunction& rate, Philox4x64& rng);

/// g = 1, or 1 + floor(-ln U / zeta) for the geometric law.
std::uint64_t sample_gain(const GainModel& gain, Philox4x64& rng);

/// y_i = sum over arrivals in bin i of q_e g / dt, plus N(0, N0 / (2 dt)) per bin.
SampledWaveform synthesize_signal(const std::vector<double>& arrivals, const GainModel& gain,
                                  const ReceiverConfig& cfg, const Grid& grid, Philox4x64& rng);

enum class Hypothesis { H0, H1 };

/// Empirical error rate of the test  \int w y dt > theta T.
/// H0: thermal noise plus dark arrivals (if rate.dark_rate() > 0); counts statistic > theta T.
/// H1: arrivals from the full rate; counts statistic <= theta T.
MonteCarloReport detection_experiment(const SampledWaveform& w, double theta, Hypothesis hypothesis,
                                      const RateFunction& rate, const GainModel& gain,
                                      const ReceiverConfig& cfg, const SimConfig& sim);

struct DelayWindow {
  double lo;
  double hi;
};

/// Per trial: the signal part of the rate is shifted by true_delay (dark arrivals stay
/// uniform), theta_hat maximizes \int y(t) w(t - theta) dt over lags k dt in the window,
/// refined by a parabola through the discrete peak. `error_count` counts anomalies,
/// |theta_hat - true_delay| > FWHM of the rate.
MonteCarloReport delay_experiment(const SampledWaveform& w, const RateFunction& rate,
                                  double true_delay, DelayWindow window, const GainModel& gain,
                                  const ReceiverConfig& cfg, const SimConfig& sim);

}  // namespace apdcorr
