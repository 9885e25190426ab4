// SPDX-License-Identifier: Apache-2.0
#include "apdcorr/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "apdcorr/delay_estimation.hpp"
#include "apdcorr/detector_design.hpp"
#include "apdcorr/errors.hpp"
#include "apdcorr/montecarlo.hpp"
#include "apdcorr/scenario.hpp"

namespace apdcorr {

namespace {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

const char* yes_no(bool v) { return v ? "yes" : "no"; }

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << content)) throw OutputError("cannot write " + path);
}

// ---------------------------------------------------------------------------------

struct DesignArgs {
  std::string scenario;
  std::optional<double> theta;
  std::string output = "w_star.csv";
};

void cmd_design(const DesignArgs& args, std::ostream& out) {
  const Scenario sc = load_scenario(args.scenario);
  double theta = 0.0;
  if (args.theta) {
    theta = *args.theta;
  } else if (!sc.theta.empty()) {
    theta = sc.theta.front();
  } else {
    throw ParseError("no --theta given and the scenario has no [detection] theta", 0);
  }

  const DetectorDesign d = design_detector(theta, sc.rate, sc.gain, sc.receiver);
  const SampledWaveform omf = omf_correlator(sc.rate, sc.gain, sc.receiver);
  const ChernoffExponent e_omf = md_exponent_for_correlator(omf, theta, sc.rate, sc.gain, sc.receiver);

  out << "scenario: " << sc.name << '\n'
      << "theta: " << num(theta) << '\n'
      << "E_FA: " << num(d.e_fa.value) << '\n'
      << "E_MD: " << num(d.e_md) << '\n'
      << "E_MD_omf: " << num(e_omf.exponent) << '\n'
      << "s_star: " << num(d.s_star) << '\n'
      << "c_star: " << num(d.c_star.value()) << '\n'
      << "log_c_star: " << num(d.c_star.log_c) << '\n';
  if (sc.rate_kind == RateKind::TwoLevel) {
    const double first = d.w_star[0];
    const double second = d.w_star[d.w_star.size() - 1];
    out << "level_1: " << num(first) << '\n'
        << "level_2: " << num(second) << '\n'
        << "level_sum_of_squares: " << num(first * first + second * second) << '\n';
  }

  std::string csv = "t,lambda,w_star,w_omf\n";
  for (std::size_t i = 0; i < sc.grid.size(); ++i) {
    csv += num(sc.grid.time(i)) + ',' + num(sc.rate[i]) + ',' + num(d.w_star[i]) + ',' +
           num(omf[i]) + '\n';
  }
  emit(args.output, csv, out);
  if (args.output != "-") out << "waveforms: " << args.output << '\n';
}

// ---------------------------------------------------------------------------------

struct TradeoffArgs {
  std::string scenario;
  double theta_min = 0.0;
  double theta_max = 0.0;
  std::size_t points = 0;
  std::string output = "-";
};

void cmd_tradeoff(const TradeoffArgs& args, std::ostream& out) {
  const Scenario sc = load_scenario(args.scenario);
  if (args.points < 1) throw ParseError("--points must be at least 1", 0);
  if (args.theta_min < 0.0) throw ParseError("--theta-min must be non-negative", 0);
  if (args.points == 1 ? args.theta_max < args.theta_min : !(args.theta_max > args.theta_min)) {
    throw ParseError("--theta-max must exceed --theta-min", 0);
  }
  std::vector<double> theta(args.points);
  for (std::size_t j = 0; j < args.points; ++j) {
    theta[j] = args.points == 1
                   ? args.theta_min
                   : args.theta_min + (args.theta_max - args.theta_min) * static_cast<double>(j) /
                                          static_cast<double>(args.points - 1);
  }
  const ExponentCurve curve = standard_tradeoff_curve(theta, sc.rate, sc.gain, sc.receiver);
  emit(args.output, tradeoff_csv(curve), out);
}

// ---------------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string mode;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::string csv;
};

void simulate_detect(const Scenario& sc, const SimConfig& sim, std::ostream& out,
                     std::string& csv) {
  if (sc.theta.empty()) throw ParseError("detect mode needs [detection] theta", 0);
  const double T = sc.grid.horizon();
  const bool dark = sc.rate.dark_rate() > 0.0;
  csv = "scenario,mode,theta,hypothesis,trials,errors,empirical_rate,half_width,analytic,pass\n";
  for (double theta : sc.theta) {
    const DetectorDesign d = design_detector(theta, sc.rate, sc.gain, sc.receiver);
    const MonteCarloReport h0 =
        detection_experiment(d.w_star, theta, Hypothesis::H0, sc.rate, sc.gain, sc.receiver, sim);
    const MonteCarloReport h1 =
        detection_experiment(d.w_star, theta, Hypothesis::H1, sc.rate, sc.gain, sc.receiver, sim);

    // H0: exact Gaussian tail without dark current, Chernoff bound with it.
    double fa_analytic;
    bool fa_pass;
    const char* fa_kind;
    if (dark) {
      const ChernoffExponent e =
          fa_exponent_dark(theta, d.w_star, sc.rate.dark_rate(), sc.gain, sc.receiver);
      fa_analytic = std::exp(-T * e.exponent);
      fa_pass = consistent_with_bound(h0, -T * e.exponent);
      fa_kind = "chernoff_bound";
    } else {
      const double energy = d.w_star.energy();
      fa_analytic = sc.receiver.N0 > 0.0
                        ? gaussian_tail(theta * T / std::sqrt(sc.receiver.N0 * energy / 2.0))
                        : (theta * T < 0.0 ? 1.0 : 0.0);
      fa_pass = consistent_with_probability(h0, fa_analytic);
      fa_kind = "gaussian_tail";
    }
    const double md_bound = std::exp(-T * d.e_md);
    const bool md_pass = consistent_with_bound(h1, -T * d.e_md);

    out << "theta " << num(theta) << ": E_FA " << num(d.e_fa.value) << ", E_MD " << num(d.e_md)
        << '\n'
        << "  H0 false alarm: " << num(h0.empirical_rate) << " +- " << num(h0.wilson.half_width)
        << " (" << h0.error_count << '/' << h0.trials << "), " << fa_kind << ' '
        << num(fa_analytic) << ", consistent " << yes_no(fa_pass) << '\n'
        << "  H1 miss: " << num(h1.empirical_rate) << " +- " << num(h1.wilson.half_width) << " ("
        << h1.error_count << '/' << h1.trials << "), chernoff_bound " << num(md_bound)
        << ", chernoff_valid " << yes_no(md_pass) << '\n';
    csv += sc.name + ",detect," + num(theta) + ",H0," + std::to_string(h0.trials) + ',' +
           std::to_string(h0.error_count) + ',' + num(h0.empirical_rate) + ',' +
           num(h0.wilson.half_width) + ',' + num(fa_analytic) + ',' + (fa_pass ? "1" : "0") + '\n';
    csv += sc.name + ",detect," + num(theta) + ",H1," + std::to_string(h1.trials) + ',' +
           std::to_string(h1.error_count) + ',' + num(h1.empirical_rate) + ',' +
           num(h1.wilson.half_width) + ',' + num(md_bound) + ',' + (md_pass ? "1" : "0") + '\n';
  }
}

void simulate_delay(const Scenario& sc, const SimConfig& sim, std::ostream& out,
                    std::string& csv) {
  if (!sc.estimation) throw ParseError("delay mode needs an [estimation] section", 0);
  const EstimationSpec& est = *sc.estimation;
  const DelayWindow window{est.true_delay - est.window, est.true_delay + est.window};
  const double P = sc.receiver.power_budget;
  const double T = sc.grid.horizon();

  struct Candidate {
    const char* label;
    SampledWaveform w;
  };
  const std::vector<Candidate> candidates{
      {"log", optimal_delay_correlator(sc.rate, sc.gain, sc.receiver)},
      {"matched", normalize_power(sc.rate.signal_component(), P, T)}};

  csv = "scenario,mode,correlator,trials,empirical_mse,mse_stderr,analytic_mse,bias,"
        "anomaly_fraction,pass\n";
  out << "true delay " << num(est.true_delay) << ", window +- " << num(est.window)
      << ", anomaly threshold (FWHM) " << num(pulse_fwhm(sc.rate)) << '\n';
  for (const Candidate& c : candidates) {
    const MonteCarloReport r =
        delay_experiment(c.w, sc.rate, est.true_delay, window, sc.gain, sc.receiver, sim);
    const double analytic = delay_mse(c.w, sc.rate, sc.gain, sc.receiver).mse;
    const DelayStatistics& s = *r.delay;
    const double ratio = s.mse / analytic;
    const bool pass = ratio >= 0.5 && ratio <= 2.0;
    out << "  " << c.label << ": MSE " << num(s.mse) << " +- " << num(s.mse_stderr)
        << ", linearized " << num(analytic) << ", ratio " << num(ratio) << ", bias "
        << num(s.bias) << ", anomalies " << num(s.anomaly_fraction) << ", within factor 2 "
        << yes_no(pass) << '\n';
    csv += sc.name + ",delay," + c.label + ',' + std::to_string(r.trials) + ',' + num(s.mse) +
           ',' + num(s.mse_stderr) + ',' + num(analytic) + ',' + num(s.bias) + ',' +
           num(s.anomaly_fraction) + ',' + (pass ? "1" : "0") + '\n';
  }
}

void cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const Scenario sc = load_scenario(args.scenario);
  SimConfig sim = sc.simulation;
  if (args.trials) sim.trials = *args.trials;
  if (args.seed) sim.seed = *args.seed;
  if (sim.trials < 1) throw ParseError("--trials must be at least 1", 0);

  out << "scenario " << sc.name << ", mode " << args.mode << ", trials " << sim.trials
      << ", seed " << sim.seed << '\n';
  std::string csv;
  if (args.mode == "detect") {
    simulate_detect(sc, sim, out, csv);
  } else {
    simulate_delay(sc, sim, out, csv);
  }
  if (!args.csv.empty()) emit(args.csv, csv, out);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal correlators for avalanche-photodiode receivers", "apdcorr"};
  app.require_subcommand(1);

  DesignArgs design;
  auto* design_cmd = app.add_subcommand("design", "Design the optimal correlator at one threshold");
  design_cmd->add_option("scenario", design.scenario, "Scenario file")->required();
  design_cmd->add_option("--theta", design.theta, "Threshold (default: first [detection] theta)");
  design_cmd->add_option("-o,--output", design.output, "Waveform CSV path, '-' for stdout")
      ->capture_default_str();

  TradeoffArgs tradeoff;
  auto* tradeoff_cmd =
      app.add_subcommand("tradeoff", "MD exponent of the optimal and OMF correlators vs threshold");
  tradeoff_cmd->add_option("scenario", tradeoff.scenario, "Scenario file")->required();
  tradeoff_cmd->add_option("--theta-min", tradeoff.theta_min)->required();
  tradeoff_cmd->add_option("--theta-max", tradeoff.theta_max)->required();
  tradeoff_cmd->add_option("--points", tradeoff.points)->required();
  tradeoff_cmd->add_option("-o,--output", tradeoff.output, "CSV path, '-' for stdout")
      ->capture_default_str();

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo check of the analytic results");
  simulate_cmd->add_option("scenario", simulate.scenario, "Scenario file")->required();
  simulate_cmd->add_option("--mode", simulate.mode, "detect or delay")
      ->required()
      ->check(CLI::IsMember({"detect", "delay"}));
  simulate_cmd->add_option("--trials", simulate.trials, "Override [simulation] trials");
  simulate_cmd->add_option("--seed", simulate.seed, "Override [simulation] seed");
  simulate_cmd->add_option("--csv", simulate.csv, "Also write a CSV report ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*design_cmd) cmd_design(design, out);
    if (*tradeoff_cmd) cmd_tradeoff(tradeoff, out);
    if (*simulate_cmd) cmd_simulate(simulate, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  out.flush();
  return kExitOk;
}

}  // namespace apdcorr
