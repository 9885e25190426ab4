// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "apdcorr/commands.hpp"
#include "apdcorr/parallel.hpp"

namespace fs = std::filesystem;
using namespace apdcorr;

namespace {

const fs::path kScenarios = fs::path(APDCORR_SOURCE_DIR) / "scenarios";
const fs::path kGolden = fs::path(APDCORR_SOURCE_DIR) / "tests" / "golden";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "apdcorr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "apdcorr_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

double field(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + ": ");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 2));
}

std::vector<std::vector<double>> csv_rows(const std::string& csv) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

class ThreadCap {
 public:
  explicit ThreadCap(const char* value) { setenv(kThreadsEnv, value, 1); }
  ~ThreadCap() { unsetenv(kThreadsEnv); }
};

}  // namespace

TEST_CASE("design prints the two-level solution") {
  const auto csv = scratch("w_two_level.csv");
  const Run r = cli({"design", (kScenarios / "two_level.scn").string(), "--theta", "2", "-o", csv.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(field(r.out, "level_sum_of_squares") == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(field(r.out, "E_FA") == doctest::Approx(4000.0));
  CHECK(field(r.out, "E_MD") > field(r.out, "E_MD_omf"));
  const std::string wave = slurp(csv);
  CHECK(wave.rfind("t,lambda,w_star,w_omf\n", 0) == 0);
  CHECK(std::count(wave.begin(), wave.end(), '\n') == 513);

  const Run zero = cli({"design", (kScenarios / "two_level.scn").string(), "--theta", "0", "-o", "-"});
  REQUIRE(zero.code == kExitOk);
  CHECK(field(zero.out, "E_FA") == 0.0);
}

TEST_CASE("usage and scenario errors exit with 2") {
  const auto bad = scratch("missing_p.scn");
  std::ofstream(bad) << "[grid]\nT = 1\nn = 16\n[rate]\nkind = two_level\nlambda1 = 1\nlambda2 = 2\n"
                        "[receiver]\nN0_over_qe2 = 1\n";
  const Run r = cli({"design", bad.string(), "--theta", "1", "-o", "-"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("'P'") != std::string::npos);
  CHECK(r.err.find("line 8") != std::string::npos);

  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"simulate", (kScenarios / "two_level.scn").string(), "--mode", "sideways"}).code == kExitUsage);
  CHECK(cli({"tradeoff", (kScenarios / "two_level.scn").string(), "--theta-min", "1"}).code == kExitUsage);
  CHECK(cli({"tradeoff", (kScenarios / "two_level.scn").string(), "--theta-min", "3", "--theta-max", "1",
             "--points", "4"})
            .code == kExitUsage);
  CHECK(cli({"design", "/no/such/file.scn"}).code == kExitUsage);
  CHECK(cli({"simulate", (kScenarios / "two_level.scn").string(), "--mode", "delay"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("domain errors exit with 3") {
  const auto s = scratch("step_delay.scn");
  std::ofstream(s) << "[grid]\nT = 1\nn = 64\n[rate]\nkind = two_level\nlambda1 = 1\nlambda2 = 2\n"
                      "[receiver]\nN0_over_qe2 = 1\nP = 1\n[estimation]\nwindow = 0.1\n";
  const Run r = cli({"simulate", s.string(), "--mode", "delay", "--trials", "5"});
  CHECK(r.code == kExitNumeric);
  CHECK(r.err.find("vanish") != std::string::npos);
}

TEST_CASE("tradeoff ordering for both gain laws") {
  for (const char* name : {"two_level.scn", "two_level_geometric.scn"}) {
    const double top = std::string(name) == "two_level.scn" ? 17.0 : 180.0;
    const Run r = cli({"tradeoff", (kScenarios / name).string(), "--theta-min", "0", "--theta-max",
                       std::to_string(top), "--points", "12"});
    REQUIRE(r.code == kExitOk);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 12);
    for (const auto& row : rows) CHECK(row[2] >= row[3]);
    CHECK(rows[0][1] == 0.0);
  }
  const Run one = cli({"tradeoff", (kScenarios / "two_level.scn").string(), "--theta-min", "4", "--theta-max",
                       "4", "--points", "1"});
  REQUIRE(one.code == kExitOk);
  CHECK(csv_rows(one.out).size() == 1);
}

TEST_CASE("tradeoff golden output") {
  const Run r = cli({"tradeoff", (kScenarios / "two_level.scn").string(), "--theta-min", "0", "--theta-max",
                     "16", "--points", "5"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out == slurp(kGolden / "two_level_tradeoff.csv"));
}

TEST_CASE("simulate reports analytic comparisons") {
  const Run d = cli({"simulate", (kScenarios / "two_level.scn").string(), "--mode", "detect", "--trials", "2000"});
  REQUIRE(d.code == kExitOk);
  CHECK(d.out.find("gaussian_tail") != std::string::npos);
  CHECK(d.out.find("chernoff_valid yes") != std::string::npos);
  CHECK(d.out.find("chernoff_valid no") == std::string::npos);

  const auto csv = scratch("delay.csv");
  const Run e = cli({"simulate", (kScenarios / "delay.scn").string(), "--mode", "delay", "--trials", "200",
                     "--csv", csv.string()});
  REQUIRE(e.code == kExitOk);
  CHECK(e.out.find("linearized") != std::string::npos);
  CHECK(e.out.find("anomalies") != std::string::npos);
  CHECK(slurp(csv).rfind("scenario,mode,correlator,", 0) == 0);
}

TEST_CASE("outputs are identical across runs and thread counts" * doctest::description("property")) {
  const std::vector<std::vector<std::string>> commands{
      {"tradeoff", (kScenarios / "two_level_geometric.scn").string(), "--theta-min", "0", "--theta-max", "150", "--points", "7"},
      {"simulate", (kScenarios / "two_level.scn").string(), "--mode", "detect", "--trials", "1500"},
      {"simulate", (kScenarios / "delay.scn").string(), "--mode", "delay", "--trials", "150"},
      {"design", (kScenarios / "two_level_geometric.scn").string(), "-o", "-"}};
  for (const auto& cmd : commands) {
    std::string single, many, again;
    {
      ThreadCap cap("1");
      single = cli(cmd).out;
    }
    {
      ThreadCap cap("4");
      many = cli(cmd).out;
      again = cli(cmd).out;
    }
    CHECK(single == many);
    CHECK(many == again);
  }
}
