// SPDX-License-Identifier: Apache-2.0
#include "apdcorr/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "apdcorr/errors.hpp"

namespace apdcorr {

ParseError::ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

namespace {

const char* const kSections[] = {"grid",      "rate",       "gain",      "receiver",
                                 "detection", "estimation", "simulation"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  std::size_t line;
  bool used = false;
};

struct Section {
  std::size_t line = 0;
  std::map<std::string, Entry> keys;
};

class Document {
 public:
  explicit Document(std::string_view text) {
    std::size_t line_no = 0;
    Section* current = nullptr;
    std::string current_name;
    while (!text.empty()) {
      const auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;

      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError("unterminated section header", line_no);
        const std::string name(trim(line.substr(1, line.size() - 2)));
        if (std::find(std::begin(kSections), std::end(kSections), name) == std::end(kSections)) {
          throw ParseError("unknown section [" + name + "]", line_no);
        }
        if (sections_.count(name) != 0) throw ParseError("duplicate section [" + name + "]", line_no);
        current = &sections_[name];
        current->line = line_no;
        current_name = name;
        continue;
      }

      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
      if (current == nullptr) throw ParseError("key outside of any section", line_no);
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ParseError("empty key", line_no);
      if (value.empty()) throw ParseError("empty value for '" + key + "'", line_no);
      if (!current->keys.emplace(key, Entry{value, line_no}).second) {
        throw ParseError("duplicate key '" + key + "' in [" + current_name + "]", line_no);
      }
    }
  }

  bool has_section(const std::string& s) const { return sections_.count(s) != 0; }

  std::size_t section_line(const std::string& s) const {
    const auto it = sections_.find(s);
    return it == sections_.end() ? 0 : it->second.line;
  }

  Entry* find(const std::string& section, const std::string& key) {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.keys.find(key);
    if (k == s->second.keys.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  Entry& require(const std::string& section, const std::string& key) {
    if (!has_section(section)) {
      throw ParseError("missing section [" + section + "] (needed for '" + key + "')", 0);
    }
    Entry* e = find(section, key);
    if (e == nullptr) {
      throw ParseError("missing required key '" + key + "' in [" + section + "]",
                       section_line(section));
    }
    return *e;
  }

  void reject_unused() const {
    for (const auto& [name, section] : sections_) {
      for (const auto& [key, entry] : section.keys) {
        if (!entry.used) throw ParseError("unknown key '" + key + "' in [" + name + "]", entry.line);
      }
    }
  }

 private:
  std::map<std::string, Section> sections_;
};

double to_number(const Entry& e, const std::string& key) {
  double v = 0.0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError("'" + key + "' is not a finite number: " + e.value, e.line);
  }
  return v;
}

std::uint64_t to_unsigned(const Entry& e, const std::string& key) {
  std::uint64_t v = 0;
  const char* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("'" + key + "' is not a non-negative integer: " + e.value, e.line);
  }
  return v;
}

std::vector<double> to_list(const Entry& e, const std::string& key) {
  std::vector<double> out;
  std::string_view rest = e.value;
  while (true) {
    const auto comma = rest.find(',');
    const std::string item(trim(rest.substr(0, comma)));
    if (item.empty()) throw ParseError("empty item in list '" + key + "'", e.line);
    out.push_back(to_number(Entry{item, e.line}, key));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

double number_or(Document& doc, const std::string& section, const std::string& key,
                 double fallback) {
  const Entry* e = doc.find(section, key);
  return e == nullptr ? fallback : to_number(*e, key);
}

// Runs a model constructor and reports its validation failure against a scenario line.
template <class F>
auto validated(std::size_t line, F&& build) {
  try {
    return build();
  } catch (const DomainError& ex) {
    throw ParseError(ex.what(), line);
  }
}

SampledWaveform list_waveform(Document& doc, const Grid& grid, const std::string& key) {
  const Entry& e = doc.require("rate", key);
  std::vector<double> v = to_list(e, key);
  if (v.size() != grid.size()) {
    throw ParseError("'" + key + "' has " + std::to_string(v.size()) + " samples, grid n is " +
                         std::to_string(grid.size()),
                     e.line);
  }
  return validated(e.line, [&] { return SampledWaveform(grid, std::move(v)); });
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& name) {
  Document doc(text);

  const Entry& horizon = doc.require("grid", "T");
  const double T = to_number(horizon, "T");
  const Entry* n_entry = doc.find("grid", "n");
  const std::size_t n = n_entry ? to_unsigned(*n_entry, "n") : Grid::kDefaultSamples;
  const Grid grid = validated(doc.section_line("grid"), [&] { return Grid(T, n); });

  const Entry& kind_entry = doc.require("rate", "kind");
  const std::size_t rate_line = doc.section_line("rate");
  const double dark = number_or(doc, "rate", "dark", 0.0);
  if (dark < 0.0) throw ParseError("dark rate must be non-negative", rate_line);
  RateKind kind;
  std::optional<RateFunction> rate;
  const auto with_dark = [&](const SampledWaveform& signal) {
    return validated(rate_line, [&] {
      return RateFunction(signal.map([dark](double v) { return v + dark; }), dark);
    });
  };
  if (kind_entry.value == "two_level") {
    kind = RateKind::TwoLevel;
    const double l1 = to_number(doc.require("rate", "lambda1"), "lambda1");
    const double l2 = to_number(doc.require("rate", "lambda2"), "lambda2");
    rate = with_dark(validated(rate_line, [&] { return two_level_rate(l1, l2, grid); }).waveform());
  } else if (kind_entry.value == "raised_cosine") {
    kind = RateKind::RaisedCosine;
    const double amplitude = to_number(doc.require("rate", "amplitude"), "amplitude");
    const double start = number_or(doc, "rate", "start", 0.0);
    const double width = number_or(doc, "rate", "width", T);
    rate = validated(rate_line,
                     [&] { return raised_cosine_rate(amplitude, start, width, grid, dark); });
  } else if (kind_entry.value == "table") {
    kind = RateKind::Table;
    rate = with_dark(list_waveform(doc, grid, "samples"));
  } else if (kind_entry.value == "optical") {
    kind = RateKind::Optical;
    const SampledWaveform power = list_waveform(doc, grid, "power");
    const double eta = to_number(doc.require("rate", "eta"), "eta");
    const double omega = to_number(doc.require("rate", "omega"), "omega");
    rate = validated(rate_line, [&] { return rate_from_physical(power, eta, omega, dark); });
  } else {
    throw ParseError("unknown rate kind '" + kind_entry.value +
                         "' (expected two_level, raised_cosine, table or optical)",
                     kind_entry.line);
  }

  GainModel gain = GainModel::deterministic();
  if (const Entry* model = doc.find("gain", "model")) {
    const Entry* zeta = doc.find("gain", "zeta");
    if (model->value == "geometric") {
      if (zeta == nullptr) throw ParseError("geometric gain needs 'zeta'", model->line);
      const double z = to_number(*zeta, "zeta");
      gain = validated(zeta->line, [&] { return GainModel::geometric(z); });
    } else if (model->value == "deterministic") {
      if (zeta != nullptr) throw ParseError("'zeta' given for a deterministic gain", zeta->line);
    } else {
      throw ParseError("unknown gain model '" + model->value +
                           "' (expected deterministic or geometric)",
                       model->line);
    }
  } else if (const Entry* zeta = doc.find("gain", "zeta")) {
    throw ParseError("'zeta' needs model = geometric", zeta->line);
  }

  const double P = to_number(doc.require("receiver", "P"), "P");
  const std::size_t receiver_line = doc.section_line("receiver");
  const Entry* normalized = doc.find("receiver", "N0_over_qe2");
  const Entry* N0 = doc.find("receiver", "N0");
  const Entry* q_e = doc.find("receiver", "q_e");
  std::optional<ReceiverConfig> receiver;
  if (normalized != nullptr) {
    if (N0 != nullptr || q_e != nullptr) {
      throw ParseError("give either N0_over_qe2 or N0 and q_e, not both",
                       (N0 ? N0 : q_e)->line);
    }
    const double v = to_number(*normalized, "N0_over_qe2");
    receiver = validated(normalized->line, [&] { return ReceiverConfig::normalized(v, P, T); });
  } else {
    if (N0 == nullptr || q_e == nullptr) {
      throw ParseError("[receiver] needs N0_over_qe2, or both N0 and q_e", receiver_line);
    }
    const double n0 = to_number(*N0, "N0");
    const double q = to_number(*q_e, "q_e");
    receiver = validated(receiver_line, [&] { return ReceiverConfig(n0, q, P, T); });
  }

  std::vector<double> theta;
  if (const Entry* e = doc.find("detection", "theta")) {
    theta = to_list(*e, "theta");
    for (double t : theta) {
      if (t < 0.0) throw ParseError("thresholds must be non-negative", e->line);
    }
  }

  std::optional<EstimationSpec> estimation;
  if (doc.has_section("estimation")) {
    const Entry& window = doc.require("estimation", "window");
    const EstimationSpec spec{number_or(doc, "estimation", "true_delay", 0.0),
                              to_number(window, "window")};
    if (!(spec.window > 0.0)) throw ParseError("window must be positive", window.line);
    estimation = spec;
  }

  SimConfig sim;
  sim.trials = 1000;
  if (const Entry* e = doc.find("simulation", "trials")) {
    sim.trials = to_unsigned(*e, "trials");
    if (sim.trials < 1) throw ParseError("trials must be at least 1", e->line);
  }
  if (const Entry* e = doc.find("simulation", "seed")) sim.seed = to_unsigned(*e, "seed");

  doc.reject_unused();
  return Scenario{name,    grid,  kind,       std::move(*rate), gain, *receiver,
                  std::move(theta), estimation, sim};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read scenario file " + path.string(), 0);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.stem().string());
}

}  // namespace apdcorr
