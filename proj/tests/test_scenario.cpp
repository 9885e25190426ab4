// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <string>

#include "apdcorr/scenario.hpp"

using namespace apdcorr;

namespace {

const char* kBase = R"([grid]
T = 1
n = 32

[rate]
kind = two_level   # Example shape
lambda1 = 1
lambda2 = 10

[receiver]
N0_over_qe2 = 0.0001
P = 10
)";

std::size_t error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  FAIL("expected a parse error");
  return 0;
}

std::string error_text(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

}  // namespace

TEST_CASE("minimal scenario with defaults") {
  const Scenario s = parse_scenario(kBase, "pulse");
  CHECK(s.name == "pulse");
  CHECK(s.grid.size() == 32);
  CHECK(s.rate_kind == RateKind::TwoLevel);
  CHECK(s.rate[0] == 1.0);
  CHECK(s.rate[31] == 10.0);
  CHECK(s.gain.is_deterministic());
  CHECK(s.receiver.q_e == 1.0);
  CHECK(s.receiver.N0 == 1e-4);
  CHECK(s.receiver.horizon == 1.0);
  CHECK(s.theta.empty());
  CHECK_FALSE(s.estimation.has_value());
  CHECK(s.simulation.trials == 1000);
  CHECK(s.simulation.seed == 0);
}

TEST_CASE("full scenario") {
  const std::string text = std::string(kBase) + R"(
[gain]
model = geometric
zeta = 0.1
[detection]
theta = 0, 2.5,  7
[estimation]
window = 0.05
true_delay = 0.01
[simulation]
trials = 12
seed = 18446744073709551615
)";
  const Scenario s = parse_scenario(text);
  CHECK(s.gain.zeta() == 0.1);
  CHECK(s.theta == std::vector<double>{0.0, 2.5, 7.0});
  CHECK(s.estimation->window == 0.05);
  CHECK(s.estimation->true_delay == 0.01);
  CHECK(s.simulation.trials == 12);
  CHECK(s.simulation.seed == 18446744073709551615ULL);
}

TEST_CASE("rate kinds") {
  const Scenario rc = parse_scenario(R"([grid]
T = 2
n = 64
[rate]
kind = raised_cosine
amplitude = 3
start = 0.5
width = 1
dark = 0.25
[receiver]
N0 = 1e-20
q_e = 1.602176634e-19
P = 1
)");
  CHECK(rc.rate.dark_rate() == 0.25);
  CHECK(rc.rate[0] == 0.25);
  CHECK(rc.rate.waveform().max() > 5.9);
  CHECK(rc.receiver.q_e == 1.602176634e-19);

  std::string table = "[grid]\nT = 1\nn = 16\n[rate]\nkind = table\nsamples = ";
  for (int i = 0; i < 16; ++i) table += std::to_string(i) + (i < 15 ? ", " : "\n");
  table += "[receiver]\nN0_over_qe2 = 1\nP = 1\n";
  const Scenario t = parse_scenario(table);
  CHECK(t.rate[15] == 15.0);

  std::string optical = "[grid]\nT = 1\nn = 16\n[rate]\nkind = optical\neta = 0.8\nomega = 1.216e15\npower = ";
  for (int i = 0; i < 16; ++i) optical += std::string("1e-9") + (i < 15 ? "," : "\n");
  optical += "[receiver]\nN0_over_qe2 = 1\nP = 1\n";
  const Scenario o = parse_scenario(optical);
  CHECK(o.rate[0] == doctest::Approx(0.8e-9 / (kHbar * 1.216e15)));
}

TEST_CASE("errors carry line numbers") {
  const std::string base = kBase;
  CHECK(error_line(base + "bogus = 1\n") == 13);
  CHECK(error_line(base + "P = 3\n") == 13);
  CHECK(error_line(base + "[gain]\nmodel = lognormal\n") == 14);
  CHECK(error_line(base + "[gain]\nmodel = geometric\nzeta = -1\n") == 15);
  CHECK(error_line(base + "[gain]\nzeta = 1\n") == 14);
  CHECK(error_line(base + "[detection]\ntheta = 1, x\n") == 14);
  CHECK(error_line(base + "[detection]\ntheta = 1,,2\n") == 14);
  CHECK(error_line(base + "[detection]\ntheta = -1\n") == 14);
  CHECK(error_line(base + "[colour]\n") == 13);
  CHECK(error_line(base + "[grid]\n") == 13);
  CHECK(error_line(base + "just words\n") == 13);
  CHECK(error_line("T = 1\n" + base) == 1);
  CHECK(error_line(base + "[receiver\n") == 13);
  CHECK(error_line(base + "[estimation]\nwindow = 0\n") == 14);
  CHECK(error_line(base + "[simulation]\ntrials = 0\n") == 14);
  CHECK(error_line(base + "[simulation]\nseed = -3\n") == 14);
  CHECK(error_line(base + "[simulation]\ntrials = 1e3\n") == 14);
}

TEST_CASE("missing and conflicting keys") {
  CHECK(error_text("[grid]\nT = 1\n[rate]\nkind = two_level\nlambda1 = 1\n[receiver]\nP = 1\nN0_over_qe2 = 1\n")
            .find("'lambda2'") != std::string::npos);
  CHECK(error_text("[grid]\nn = 16\n").find("'T'") != std::string::npos);
  CHECK(error_text("[grid]\nT = 1\n").find("[rate]") != std::string::npos);
  const std::string mixed =
      "[grid]\nT = 1\nn = 16\n[rate]\nkind = two_level\nlambda1 = 1\nlambda2 = 1\n"
      "[receiver]\nP = 1\nN0_over_qe2 = 1\nq_e = 2\n";
  CHECK(error_line(mixed) == 11);
  const std::string partial =
      "[grid]\nT = 1\nn = 16\n[rate]\nkind = two_level\nlambda1 = 1\nlambda2 = 1\n[receiver]\nP = 1\nN0 = 1\n";
  CHECK(error_line(partial) == 8);
  CHECK(error_line("[grid]\nT = 1\nn = 8\n[rate]\nkind = two_level\nlambda1 = 1\nlambda2 = 1\n"
                   "[receiver]\nP = 1\nN0_over_qe2 = 1\n") == 1);
  CHECK(error_line("[grid]\nT = 1\nn = 16\n[rate]\nkind = table\nsamples = 1, 2\n[receiver]\nP = 1\n"
                   "N0_over_qe2 = 1\n") == 6);
  CHECK(error_line("[grid]\nT = 1\nn = 16\n[rate]\nkind = sawtooth\n[receiver]\nP = 1\nN0_over_qe2 = 1\n") == 5);
  // keys of another rate kind are rejected
  CHECK(error_line(std::string(kBase) + "[rate]\n") == 13);
  CHECK(error_line(R"([grid]
T = 1
n = 16
[rate]
kind = two_level
lambda1 = 1
lambda2 = 1
amplitude = 4
[receiver]
P = 1
N0_over_qe2 = 1
)") == 8);
}

TEST_CASE("load_scenario reports unreadable files") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/dir/x.scn"), ParseError);
}
