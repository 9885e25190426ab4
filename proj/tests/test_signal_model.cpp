// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "apdcorr/errors.hpp"
#include "apdcorr/signal_model.hpp"
#include "oracles.hpp"

using namespace apdcorr;

TEST_CASE("grid geometry") {
  const Grid g(2.0, 16);
  CHECK(g.dt() == 0.125);
  CHECK(g.time(0) == 0.0625);
  CHECK(g.time(15) == doctest::Approx(2.0 - 0.0625));
  CHECK_THROWS_AS(Grid(1.0, 15), DomainError);
  CHECK_THROWS_AS(Grid(0.0, 64), DomainError);
  CHECK_THROWS_AS(Grid(-1.0, 64), DomainError);
}

TEST_CASE("waveforms reject non-finite samples and mismatched grids") {
  const Grid g(1.0, 16);
  std::vector<double> v(16, 1.0);
  v[3] = std::nan("");
  CHECK_THROWS_AS(SampledWaveform(g, v), DomainError);
  CHECK_THROWS_AS(SampledWaveform(g, std::vector<double>(15, 1.0)), DomainError);
  const auto a = SampledWaveform::constant(g, 1.0);
  const auto b = SampledWaveform::constant(Grid(1.0, 32), 1.0);
  CHECK_THROWS_AS(inner_product(a, b), DomainError);
}

TEST_CASE("rate_from_physical") {
  const Grid g(1.0, 64);
  const auto zero = SampledWaveform::constant(g, 0.0);
  const RateFunction dark_only = rate_from_physical(zero, 0.5, 1e15, 5.0);
  CHECK(dark_only.waveform().min() == 5.0);
  CHECK(dark_only.waveform().max() == 5.0);
  CHECK(dark_only.dark_rate() == 5.0);

  const auto p1 = SampledWaveform::from_function(g, [](double t) { return 1e-9 * (1 + t); });
  const RateFunction r1 = rate_from_physical(p1, 0.8, 1.216e15, 0.0);
  const RateFunction r2 = rate_from_physical(p1.scaled(2.0), 0.8, 1.216e15, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(r2[i] == doctest::Approx(2 * r1[i]).epsilon(1e-15));

  // 0.8 * 1e-9 / (1.054571817e-34 * 1.216e15), computed separately: 6.2385010317e9
  const RateFunction r = rate_from_physical(SampledWaveform::constant(g, 1e-9), 0.8, 1.216e15, 0.0);
  CHECK(r[0] == doctest::Approx(6.2385010317e9).epsilon(1e-9));

  std::vector<double> neg(64, 1e-9);
  neg[10] = -1e-12;
  CHECK_THROWS_AS(rate_from_physical(SampledWaveform(g, neg), 0.8, 1e15, 0.0), DomainError);
  CHECK_THROWS_AS(rate_from_physical(p1, 0.8, 0.0, 0.0), DomainError);
}

TEST_CASE("gain moments") {
  const auto det = gain_moments(GainModel::deterministic());
  CHECK(det.mean == 1.0);
  CHECK(det.second_moment == 1.0);

  const auto [m1, m2] = oracle::geometric_moments_series(0.1);
  const auto geo = gain_moments(GainModel::geometric(0.1));
  CHECK(geo.mean == doctest::Approx(m1).epsilon(1e-12));
  CHECK(geo.second_moment == doctest::Approx(m2).epsilon(1e-12));
  CHECK(geo.mean == doctest::Approx(10.50833).epsilon(1e-6));
  CHECK(geo.second_moment == doctest::Approx(210.3417485784).epsilon(1e-10));

  const auto big = gain_moments(GainModel::geometric(20.0));
  CHECK(std::abs(big.mean - 1) < 1e-8);
  CHECK(std::abs(big.second_moment - 1) < 1e-8);

  // monotone approach to (1, 1)
  double prev1 = 1e300, prev2 = 1e300;
  for (double z : {0.05, 0.2, 1.0, 3.0, 10.0, 30.0}) {
    const auto m = gain_moments(GainModel::geometric(z));
    CHECK(m.mean < prev1);
    CHECK(m.second_moment < prev2);
    CHECK(m.variance() >= 0.0);
    prev1 = m.mean;
    prev2 = m.second_moment;
  }
  CHECK_THROWS_AS(GainModel::geometric(0.0), DomainError);
  CHECK_THROWS_AS(GainModel::geometric(-0.5), DomainError);
}

TEST_CASE("two-level rate") {
  const Grid g(3.0, 64);
  const RateFunction r = two_level_rate(1.0, 10.0, g);
  CHECK(r[0] == 1.0);
  CHECK(r[31] == 1.0);
  CHECK(r[32] == 10.0);
  CHECK(r.expected_count() == doctest::Approx(3.0 * 11.0 / 2.0).epsilon(1e-14));
  const RateFunction c = two_level_rate(4.0, 4.0, g);
  CHECK(c.waveform().min() == 4.0);
  CHECK(c.waveform().max() == 4.0);
  CHECK_THROWS_AS(two_level_rate(-1.0, 1.0, g), DomainError);
}

TEST_CASE("normalize_power") {
  const Grid g(1.0, 128);
  const auto w = normalize_power(SampledWaveform::constant(g, 1.0), 10.0, 1.0);
  CHECK(w[0] == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
  CHECK(w.energy() == doctest::Approx(10.0).epsilon(1e-14));

  const auto shape = SampledWaveform::from_function(g, [](double t) { return std::sin(3 * t) + 0.2; });
  const auto n1 = normalize_power(shape, 2.5, 1.0);
  const double alpha = std::sqrt(2.5 / shape.energy());
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(n1[i] == doctest::Approx(alpha * shape[i]).epsilon(1e-14));
  const auto n2 = normalize_power(n1, 2.5, 1.0);
  const auto n3 = normalize_power(shape.scaled(17.0), 2.5, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(n2[i] == doctest::Approx(n1[i]).epsilon(1e-12));
    CHECK(n3[i] == doctest::Approx(n1[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normalize_power(SampledWaveform::constant(g, 0.0), 1.0, 1.0), DomainError);
}

TEST_CASE("midpoint quadrature is second order" * doctest::description("property")) {
  auto err = [](std::size_t n) {
    const Grid g(1.0, n);
    return std::abs(SampledWaveform::from_function(g, [](double t) { return std::exp(t); }).integral() -
                    (std::numbers::e - 1.0));
  };
  for (std::size_t n : {16u, 64u, 256u}) CHECK(err(n) / err(2 * n) == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("derivatives") {
  const Grid g(1.0, 256);
  const auto f = SampledWaveform::from_function(g, [](double t) { return t * t * t; });
  const auto d1 = derivative(f);
  const auto d2 = second_derivative(f);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double t = g.time(i);
    CHECK(d1[i] == doctest::Approx(3 * t * t).epsilon(1e-3).scale(1.0));
    CHECK(d2[i] == doctest::Approx(6 * t).epsilon(1e-6).scale(1.0));
  }
  // exact for quadratics, including the one-sided end stencils
  const auto q = SampledWaveform::from_function(g, [](double t) { return 2 * t * t - t; });
  const auto dq = derivative(q);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(dq[i] == doctest::Approx(4 * g.time(i) - 1).epsilon(1e-9));

  const auto c = cumulative_integral(SampledWaveform::constant(g, 2.0));
  CHECK(c[0] == doctest::Approx(g.dt()));
  CHECK(c[255] == doctest::Approx(2.0 * g.time(255)));

  const auto b = boundary_values(q);
  CHECK(b.start == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(b.end == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pearson correlation") {
  const Grid g(1.0, 64);
  const auto a = SampledWaveform::from_function(g, [](double t) { return t; });
  CHECK(pearson_correlation(a, a.scaled(3.0)) == doctest::Approx(1.0));
  CHECK(pearson_correlation(a, a.scaled(-1.0)) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson_correlation(a, SampledWaveform::constant(g, 1.0)), DomainError);
}

TEST_CASE("receiver config validation") {
  CHECK_THROWS_AS(ReceiverConfig(-1.0, 1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(ReceiverConfig(1.0, 0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(ReceiverConfig(1.0, 1.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(ReceiverConfig(1.0, 1.0, 1.0, 0.0), DomainError);
  const auto cfg = ReceiverConfig::normalized(1e-4, 10.0, 1.0);
  CHECK(cfg.q_e == 1.0);
  CHECK(cfg.with_N0(2.0).N0 == 2.0);
  CHECK_THROWS_AS(require_matching_horizon(cfg, Grid(2.0, 16)), DomainError);
}
