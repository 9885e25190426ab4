// SPDX-License-Identifier: Apache-2.0
#include "apdcorr/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "apdcorr/errors.hpp"

namespace apdcorr {

Grid::Grid(double horizon, std::size_t samples)
    : horizon_(horizon), samples_(samples), dt_(horizon / static_cast<double>(samples)) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("grid horizon must be positive and finite");
  }
  if (samples < kMinSamples) {
    throw DomainError("grid needs at least " + std::to_string(kMinSamples) + " samples, got " +
                      std::to_string(samples));
  }
}

SampledWaveform::SampledWaveform(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DomainError("waveform has " + std::to_string(values_.size()) +
                      " samples but the grid has " + std::to_string(grid_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DomainError("waveform sample " + std::to_string(i) + " is not finite");
    }
  }
}

SampledWaveform SampledWaveform::from_function(const Grid& grid,
                                               const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.time(i));
  return {grid, std::move(v)};
}

SampledWaveform SampledWaveform::constant(const Grid& grid, double value) {
  return {grid, std::vector<double>(grid.size(), value)};
}

double SampledWaveform::integral() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum * grid_.dt();
}

double SampledWaveform::energy() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return sum * grid_.dt();
}

double SampledWaveform::power() const { return energy() / grid_.horizon(); }

double SampledWaveform::max() const { return *std::max_element(values_.begin(), values_.end()); }

double SampledWaveform::min() const { return *std::min_element(values_.begin(), values_.end()); }

SampledWaveform SampledWaveform::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return {grid_, std::move(v)};
}

SampledWaveform SampledWaveform::map(const std::function<double(double)>& f) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), f);
  return {grid_, std::move(v)};
}

void require_same_grid(const SampledWaveform& a, const SampledWaveform& b) {
  if (!(a.grid() == b.grid())) throw DomainError("waveforms are sampled on different grids");
}

double inner_product(const SampledWaveform& a, const SampledWaveform& b) {
  require_same_grid(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum * a.grid().dt();
}

SampledWaveform derivative(const SampledWaveform& w) {
  const std::size_t n = w.size();
  const double h = w.grid().dt();
  std::vector<double> d(n);
  d[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
  d[n - 1] = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (w[i + 1] - w[i - 1]) / (2.0 * h);
  return {w.grid(), std::move(d)};
}

SampledWaveform second_derivative(const SampledWaveform& w) {
  const std::size_t n = w.size();
  const double h2 = w.grid().dt() * w.grid().dt();
  std::vector<double> d(n);
  d[0] = (2.0 * w[0] - 5.0 * w[1] + 4.0 * w[2] - w[3]) / h2;
  d[n - 1] = (2.0 * w[n - 1] - 5.0 * w[n - 2] + 4.0 * w[n - 3] - w[n - 4]) / h2;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / h2;
  return {w.grid(), std::move(d)};
}

SampledWaveform cumulative_integral(const SampledWaveform& w) {
  const double h = w.grid().dt();
  std::vector<double> out(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = acc + 0.5 * h * w[i];
    acc += h * w[i];
  }
  return {w.grid(), std::move(out)};
}

BoundaryValues boundary_values(const SampledWaveform& w) {
  // Lagrange weights of the nodes 1/2, 3/2, 5/2 (in units of dt) evaluated at 0.
  const std::size_t n = w.size();
  return {(15.0 * w[0] - 10.0 * w[1] + 3.0 * w[2]) / 8.0,
          (15.0 * w[n - 1] - 10.0 * w[n - 2] + 3.0 * w[n - 3]) / 8.0};
}

double pearson_correlation(const SampledWaveform& a, const SampledWaveform& b,
                           std::span<const bool> mask) {
  require_same_grid(a, b);
  if (!mask.empty() && mask.size() != a.size()) {
    throw DomainError("correlation mask length does not match the grid");
  }
  auto used = [&](std::size_t i) { return mask.empty() || mask[i]; };
  double count = 0.0, mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!used(i)) continue;
    count += 1.0;
    mean_a += a[i];
    mean_b += b[i];
  }
  if (count < 2.0) throw DomainError("correlation needs at least two samples");
  mean_a /= count;
  mean_b /= count;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!used(i)) continue;
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw DomainError("correlation of a constant waveform");
  return sab / std::sqrt(saa * sbb);
}

RateFunction::RateFunction(SampledWaveform total, double dark_rate)
    : waveform_(std::move(total)), dark_rate_(dark_rate) {
  if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate)) {
    throw DomainError("dark rate must be non-negative");
  }
  for (std::size_t i = 0; i < waveform_.size(); ++i) {
    if (waveform_[i] < 0.0) {
      throw DomainError("rate is negative at t = " + std::to_string(waveform_.grid().time(i)));
    }
  }
}

SampledWaveform RateFunction::signal_component() const {
  const double d = dark_rate_;
  return waveform_.map([d](double v) { return v - d; });
}

GainModel GainModel::geometric(double zeta) {
  if (!(zeta > 0.0) || !std::isfinite(zeta)) {
    throw DomainError("geometric gain needs zeta > 0, got " + std::to_string(zeta));
  }
  return GainModel(zeta);
}

GainMoments gain_moments(const GainModel& gain) {
  if (gain.is_deterministic()) return {1.0, 1.0};
  const double q = std::exp(-gain.zeta());
  const double one_minus_q = -std::expm1(-gain.zeta());
  return {1.0 / one_minus_q, (1.0 + q) / (one_minus_q * one_minus_q)};
}

ReceiverConfig::ReceiverConfig(double N0_, double q_e_, double power_budget_, double horizon_)
    : N0(N0_), q_e(q_e_), power_budget(power_budget_), horizon(horizon_) {
  if (!(N0 >= 0.0) || !std::isfinite(N0)) throw DomainError("N0 must be non-negative");
  if (!(q_e > 0.0) || !std::isfinite(q_e)) throw DomainError("q_e must be positive");
  if (!(power_budget > 0.0) || !std::isfinite(power_budget)) {
    throw DomainError("power budget P must be positive");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon T must be positive");
}

ReceiverConfig ReceiverConfig::normalized(double N0_over_qe2, double power_budget,
                                          double horizon) {
  return {N0_over_qe2, 1.0, power_budget, horizon};
}

ReceiverConfig ReceiverConfig::with_N0(double value) const {
  return {value, q_e, power_budget, horizon};
}

void require_matching_horizon(const ReceiverConfig& cfg, const Grid& grid) {
  if (std::abs(cfg.horizon - grid.horizon()) > 1e-12 * grid.horizon()) {
    throw DomainError("receiver horizon " + std::to_string(cfg.horizon) +
                      " does not match grid horizon " + std::to_string(grid.horizon()));
  }
}

RateFunction rate_from_physical(const SampledWaveform& optical_power, double eta, double omega,
                                double dark_rate) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("quantum efficiency must lie in (0, 1]");
  if (!(omega > 0.0)) throw DomainError("optical angular frequency must be positive");
  if (!(dark_rate >= 0.0)) throw DomainError("dark rate must be non-negative");
  for (std::size_t i = 0; i < optical_power.size(); ++i) {
    if (optical_power[i] < 0.0) {
      throw DomainError("optical power is negative at sample " + std::to_string(i));
    }
  }
  const double per_watt = eta / (kHbar * omega);
  return RateFunction(optical_power.map([&](double p) { return per_watt * p + dark_rate; }),
                      dark_rate);
}

RateFunction two_level_rate(double lambda1, double lambda2, const Grid& grid) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw DomainError("rate levels must be >= 0");
  const double half = 0.5 * grid.horizon();
  return RateFunction(SampledWaveform::from_function(
      grid, [=](double t) { return t < half ? lambda1 : lambda2; }));
}

RateFunction raised_cosine_rate(double amplitude, double start, double width, const Grid& grid,
                                double dark_rate) {
  if (!(amplitude >= 0.0)) throw DomainError("raised-cosine amplitude must be >= 0");
  if (!(width > 0.0)) throw DomainError("raised-cosine width must be positive");
  if (start < 0.0 || start + width > grid.horizon() * (1.0 + 1e-12)) {
    throw DomainError("raised-cosine pulse must lie inside [0, T]");
  }
  const double k = 2.0 * std::numbers::pi / width;
  return RateFunction(SampledWaveform::from_function(grid,
                                                     [=](double t) {
                                                       const double u = t - start;
                                                       const double pulse =
                                                           (u >= 0.0 && u <= width)
                                                               ? amplitude * (1.0 - std::cos(k * u))
                                                               : 0.0;
                                                       return pulse + dark_rate;
                                                     }),
                      dark_rate);
}

SampledWaveform normalize_power(const SampledWaveform& w, double power_budget, double horizon) {
  if (!(power_budget > 0.0)) throw DomainError("power budget must be positive");
  const double e = w.energy();
  if (!(e > 0.0)) throw DomainError("cannot normalize an identically zero waveform");
  const double alpha = std::sqrt(power_budget * horizon / e);
  return w.scaled(alpha);
}

}  // namespace apdcorr
