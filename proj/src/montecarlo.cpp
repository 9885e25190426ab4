// SPDX-License-Identifier: Apache-2.0
#include "apdcorr/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "apdcorr/delay_estimation.hpp"
#include "apdcorr/errors.hpp"
#include "apdcorr/parallel.hpp"

namespace apdcorr {

namespace {

double uniform_closed_open(Philox4x64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> uniform_arrivals(double rate, double horizon, Philox4x64& rng) {
  std::vector<double> t;
  if (!(rate > 0.0)) return t;
  std::poisson_distribution<long long> count(rate * horizon);
  const long long k = count(rng);
  t.reserve(static_cast<std::size_t>(k));
  for (long long i = 0; i < k; ++i) t.push_back(uniform_closed_open(rng) * horizon);
  return t;
}

MonteCarloReport rate_report(std::size_t errors, std::size_t trials) {
  return {trials, errors, static_cast<double>(errors) / static_cast<double>(trials),
          wilson_interval(errors, trials), std::nullopt};
}

struct Support {
  std::size_t first;
  std::size_t last;
};

Support support_of(const SampledWaveform& w, const char* what) {
  std::size_t first = w.size(), last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == w.size()) throw DomainError(std::string(what) + " is identically zero");
  return {first, last};
}

}  // namespace

void SimConfig::validate() const {
  if (trials < 1) throw DomainError("simulation needs at least one trial");
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw DomainError("Wilson interval of zero trials");
  if (successes > trials) throw DomainError("more successes than trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {center, half};
}

double gaussian_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

bool consistent_with_bound(const MonteCarloReport& report, double log_bound, double sigmas) {
  if (report.error_count == 0) return true;
  const double p = report.empirical_rate;
  return std::log(p) <= log_bound + sigmas * report.wilson.half_width / p;
}

bool consistent_with_probability(const MonteCarloReport& report, double p, double sigmas) {
  if (p <= 0.0) return report.error_count == 0;
  const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(report.trials));
  return std::abs(report.empirical_rate - p) <= sigmas * sd;
}

ArrivalSampler::ArrivalSampler(const SampledWaveform& rate)
    : grid_(rate.grid()), cumulative_(rate.size() + 1, 0.0), total_(0.0) {
  const double dt = grid_.dt();
  for (std::size_t i = 0; i < rate.size(); ++i) {
    if (rate[i] < 0.0) throw DomainError("arrival rate is negative at sample " + std::to_string(i));
    cumulative_[i + 1] = cumulative_[i] + rate[i] * dt;
  }
  total_ = cumulative_.back();
}

std::vector<double> ArrivalSampler::sample(Philox4x64& rng) const {
  std::vector<double> t;
  if (!(total_ > 0.0)) return t;
  std::poisson_distribution<long long> count(total_);
  const long long k = count(rng);
  t.reserve(static_cast<std::size_t>(k));
  const double dt = grid_.dt();
  const std::size_t n = grid_.size();
  for (long long a = 0; a < k; ++a) {
    const double target = uniform_closed_open(rng) * total_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t bin = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    bin = std::min(bin, n - 1);
    const double mass = cumulative_[bin + 1] - cumulative_[bin];
    double frac = mass > 0.0 ? (target - cumulative_[bin]) / mass : 0.5;
    frac = std::clamp(frac, 0.0, std::nextafter(1.0, 0.0));
    t.push_back((static_cast<double>(bin) + frac) * dt);
  }
  return t;
}

std::vector<double> sample_arrivals(const RateFunction& rate, Philox4x64& rng) {
  return ArrivalSampler(rate.waveform()).sample(rng);
}

std::uint64_t sample_gain(const GainModel& gain, Philox4x64& rng) {
  if (gain.is_deterministic()) return 1;
  const double excess = std::floor(-std::log(uniform_open_closed(rng)) / gain.zeta());
  return 1 + static_cast<std::uint64_t>(excess);
}

SampledWaveform synthesize_signal(const std::vector<double>& arrivals, const GainModel& gain,
                                  const ReceiverConfig& cfg, const Grid& grid, Philox4x64& rng) {
  const double dt = grid.dt();
  const std::size_t n = grid.size();
  std::vector<double> y(n, 0.0);
  const double impulse = cfg.q_e / dt;
  for (double t : arrivals) {
    if (!(t >= 0.0 && t < grid.horizon())) {
      throw DomainError("arrival time " + std::to_string(t) + " outside [0, T)");
    }
    const std::size_t bin = std::min(static_cast<std::size_t>(t / dt), n - 1);
    y[bin] += impulse * static_cast<double>(sample_gain(gain, rng));
  }
  if (cfg.N0 > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.N0 / (2.0 * dt)));
    for (double& v : y) v += noise(rng);
  }
  return {grid, std::move(y)};
}

MonteCarloReport detection_experiment(const SampledWaveform& w, double theta, Hypothesis hypothesis,
                                      const RateFunction& rate, const GainModel& gain,
                                      const ReceiverConfig& cfg, const SimConfig& sim) {
  sim.validate();
  require_same_grid(w, rate.waveform());
  require_matching_horizon(cfg, w.grid());
  const Grid& grid = w.grid();
  const double threshold = theta * grid.horizon();
  const ArrivalSampler signal(rate.waveform());

  std::vector<unsigned char> error(sim.trials, 0);
  parallel_for(
      sim.trials,
      [&](std::size_t trial) {
        Philox4x64 rng = trial_stream(sim.seed, trial);
        const std::vector<double> arrivals =
            hypothesis == Hypothesis::H1 ? signal.sample(rng)
                                         : uniform_arrivals(rate.dark_rate(), grid.horizon(), rng);
        const double stat = inner_product(w, synthesize_signal(arrivals, gain, cfg, grid, rng));
        error[trial] = hypothesis == Hypothesis::H1 ? stat <= threshold : stat > threshold;
      },
      sim.workers);

  std::size_t count = 0;
  for (unsigned char e : error) count += e;
  return rate_report(count, sim.trials);
}

MonteCarloReport delay_experiment(const SampledWaveform& w, const RateFunction& rate,
                                  double true_delay, DelayWindow window, const GainModel& gain,
                                  const ReceiverConfig& cfg, const SimConfig& sim) {
  sim.validate();
  require_same_grid(w, rate.waveform());
  require_matching_horizon(cfg, w.grid());
  if (!(window.lo <= true_delay && true_delay <= window.hi)) {
    throw DomainError("true delay lies outside the search window");
  }
  const Grid& grid = w.grid();
  const double dt = grid.dt();
  const double T = grid.horizon();
  const SampledWaveform signal_rate = rate.signal_component();

  const Support rs = support_of(signal_rate, "signal rate");
  const Support ws = support_of(w, "correlator");
  const double slack = 1e-9 * dt;
  for (const Support& s : {rs, ws}) {
    const double begin = static_cast<double>(s.first) * dt;
    const double end = static_cast<double>(s.last + 1) * dt;
    if (begin + window.lo < -slack || end + window.hi > T + slack) {
      throw DomainError("search window shifts the pulse or the correlator outside [0, T]");
    }
  }

  const auto lag_lo = static_cast<long long>(std::ceil(window.lo / dt - 1e-9));
  const auto lag_hi = static_cast<long long>(std::floor(window.hi / dt + 1e-9));
  if (lag_hi < lag_lo) throw DomainError("search window contains no grid lag");
  const std::size_t lags = static_cast<std::size_t>(lag_hi - lag_lo + 1);
  const double fwhm = pulse_fwhm(rate);
  const ArrivalSampler sampler(signal_rate);

  std::vector<double> errors(sim.trials, 0.0);
  parallel_for(
      sim.trials,
      [&](std::size_t trial) {
        Philox4x64 rng = trial_stream(sim.seed, trial);
        std::vector<double> arrivals = sampler.sample(rng);
        for (double& t : arrivals) t = std::min(t + true_delay, std::nextafter(T, 0.0));
        const std::vector<double> dark = uniform_arrivals(rate.dark_rate(), T, rng);
        arrivals.insert(arrivals.end(), dark.begin(), dark.end());
        const SampledWaveform y = synthesize_signal(arrivals, gain, cfg, grid, rng);

        std::vector<double> q(lags, 0.0);
        for (std::size_t j = 0; j < lags; ++j) {
          const long long lag = lag_lo + static_cast<long long>(j);
          double acc = 0.0;
          for (std::size_t m = ws.first; m <= ws.last; ++m) {
            acc += w[m] * y[static_cast<std::size_t>(static_cast<long long>(m) + lag)];
          }
          q[j] = acc * dt;
        }
        const std::size_t peak =
            static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
        double offset = 0.0;
        if (peak > 0 && peak + 1 < lags) {
          const double curv = q[peak - 1] - 2.0 * q[peak] + q[peak + 1];
          if (curv < 0.0) offset = 0.5 * (q[peak - 1] - q[peak + 1]) / curv;
        }
        const double estimate = (static_cast<double>(lag_lo + static_cast<long long>(peak)) + offset) * dt;
        errors[trial] = estimate - true_delay;
      },
      sim.workers);

  double sum = 0.0, sum_sq = 0.0, sum_quad = 0.0;
  std::size_t anomalies = 0;
  for (double e : errors) {
    sum += e;
    sum_sq += e * e;
    sum_quad += e * e * e * e;
    anomalies += std::abs(e) > fwhm ? 1 : 0;
  }
  const double n = static_cast<double>(sim.trials);
  const double mse = sum_sq / n;
  const double var_sq = std::max(sum_quad / n - mse * mse, 0.0);
  MonteCarloReport report = rate_report(anomalies, sim.trials);
  report.delay = DelayStatistics{mse, sum / n, std::sqrt(var_sq / n),
                                 static_cast<double>(anomalies) / n, fwhm};
  return report;
}

}  // namespace apdcorr
