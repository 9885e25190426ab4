// SPDX-License-Identifier: Apache-2.0
#pragma once

/// \file signal_model.hpp
/// Sampled waveforms on a uniform midpoint grid, Poisson rate functions,
/// avalanche gain laws and receiver constants.
///
/// Every integral in the library is the midpoint rule on the grid:
/// \f$ \int_0^T f \approx \sum_i f(t_i)\,dt \f$ with \f$ t_i = (i + 1/2)\,dt \f$.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace apdcorr {

/// Reduced Planck constant, J*s.
inline constexpr double kHbar = 1.054571817e-34;

class Grid {
 public:
  static constexpr std::size_t kMinSamples = 16;
  static constexpr std::size_t kDefaultSamples = 4096;

  Grid(double horizon, std::size_t samples);

  double horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return samples_; }
  double dt() const noexcept { return dt_; }
  double time(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * dt_; }

  bool operator==(const Grid&) const = default;

 private:
  double horizon_;
  std::size_t samples_;
  double dt_;
};

class SampledWaveform {
 public:
  SampledWaveform(Grid grid, std::vector<double> values);

  static SampledWaveform from_function(const Grid& grid, const std::function<double(double)>& f);
  static SampledWaveform constant(const Grid& grid, double value);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double integral() const;
  /// \f$ \int w^2 \f$
  double energy() const;
  /// energy / horizon
  double power() const;
  double max() const;
  double min() const;

  SampledWaveform scaled(double factor) const;
  SampledWaveform map(const std::function<double(double)>& f) const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Throws DomainError when the two waveforms live on different grids.
void require_same_grid(const SampledWaveform& a, const SampledWaveform& b);

/// \f$ \int a\,b \f$ on the shared grid.
double inner_product(const SampledWaveform& a, const SampledWaveform& b);

/// First derivative: central differences inside, second-order one-sided stencils at the ends.
SampledWaveform derivative(const SampledWaveform& w);

/// Second derivative with the same stencil policy as derivative().
SampledWaveform second_derivative(const SampledWaveform& w);

/// W(t_i) = \int_0^{t_i} w, midpoint convention (half a cell for the current sample).
SampledWaveform cumulative_integral(const SampledWaveform& w);

/// Quadratic extrapolation of the samples to t = 0 and t = T.
struct BoundaryValues {
  double start;
  double end;
};
BoundaryValues boundary_values(const SampledWaveform& w);

/// Pearson correlation of the sample vectors. Only samples with mask[i] set are used
/// when a mask is given.
double pearson_correlation(const SampledWaveform& a, const SampledWaveform& b,
                           std::span<const bool> mask = {});

/// Photo-electron arrival intensity lambda(t), in 1/s. `waveform` is the total rate and
/// already contains the dark rate.
class RateFunction {
 public:
  explicit RateFunction(SampledWaveform total, double dark_rate = 0.0);

  const SampledWaveform& waveform() const noexcept { return waveform_; }
  const Grid& grid() const noexcept { return waveform_.grid(); }
  double dark_rate() const noexcept { return dark_rate_; }
  double operator[](std::size_t i) const noexcept { return waveform_[i]; }

  /// Lambda = \int lambda, expected number of arrivals on [0, T).
  double expected_count() const { return waveform_.integral(); }
  /// lambda(t) - lambda_d.
  SampledWaveform signal_component() const;

 private:
  SampledWaveform waveform_;
  double dark_rate_;
};

/// Avalanche gain law: g = 1 (PIN diode) or Pr{g} = (e^zeta - 1) e^{-zeta g}, g = 1, 2, ...
class GainModel {
 public:
  static GainModel deterministic() { return GainModel(0.0); }
  static GainModel geometric(double zeta);

  bool is_deterministic() const noexcept { return zeta_ == 0.0; }
  /// Only meaningful for the geometric law.
  double zeta() const noexcept { return zeta_; }

 private:
  explicit GainModel(double zeta) : zeta_(zeta) {}
  double zeta_;  // 0 encodes the deterministic law
};

struct GainMoments {
  double mean;
  double second_moment;
  double variance() const { return second_moment - mean * mean; }
};

GainMoments gain_moments(const GainModel& gain);

/// Thermal noise n(t) has two-sided spectral density N0 / 2.
struct ReceiverConfig {
  double N0;
  double q_e;
  double power_budget;
  double horizon;

  ReceiverConfig(double N0, double q_e, double power_budget, double horizon);
  /// q_e = 1 units, as used when only N0 / q_e^2 is known.
  static ReceiverConfig normalized(double N0_over_qe2, double power_budget, double horizon);

  ReceiverConfig with_N0(double value) const;
};

/// Throws DomainError if the config horizon disagrees with the grid.
void require_matching_horizon(const ReceiverConfig& cfg, const Grid& grid);

/// lambda(t) = eta P(t) / (hbar omega) + lambda_d.
RateFunction rate_from_physical(const SampledWaveform& optical_power, double eta, double omega,
                                double dark_rate);

/// lambda_1 on [0, T/2), lambda_2 on [T/2, T).
RateFunction two_level_rate(double lambda1, double lambda2, const Grid& grid);

/// amplitude (1 - cos(2 pi (t - start) / width)) on [start, start + width], zero elsewhere,
/// plus a constant dark rate.
RateFunction raised_cosine_rate(double amplitude, double start, double width, const Grid& grid,
                                double dark_rate = 0.0);

/// Scales w so that \int w^2 = P T.
SampledWaveform normalize_power(const SampledWaveform& w, double power_budget, double horizon);

}  // namespace apdcorr
