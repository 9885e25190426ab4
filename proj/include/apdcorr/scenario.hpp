// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scenario files: sectioned key = value text, '#' starts a comment.
//
//   [grid]        T, n
//   [rate]        kind = two_level | raised_cosine | table | optical, plus per-kind keys, dark
//   [gain]        model = deterministic | geometric, zeta
//   [receiver]    P and either N0_over_qe2 or (N0, q_e)
//   [detection]   theta = comma-separated list
//   [estimation]  true_delay, window
//   [simulation]  trials, seed
//
// The README lists every key with its default.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "apdcorr/montecarlo.hpp"
#include "apdcorr/signal_model.hpp"

namespace apdcorr {

/// Malformed or invalid scenario text. line() is 1-based, 0 when the problem is not tied
/// to a single line (a missing section, say).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class RateKind { TwoLevel, RaisedCosine, Table, Optical };

struct EstimationSpec {
  double true_delay;
  /// Half-width of the delay search window around true_delay.
  double window;
};

struct Scenario {
  std::string name;
  Grid grid;
  RateKind rate_kind;
  RateFunction rate;
  GainModel gain;
  ReceiverConfig receiver;
  std::vector<double> theta;
  std::optional<EstimationSpec> estimation;
  SimConfig simulation;
};

Scenario parse_scenario(std::string_view text, const std::string& name = "scenario");

/// Reads and parses a file; the scenario name is the file stem.
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace apdcorr
