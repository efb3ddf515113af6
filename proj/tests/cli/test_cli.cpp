// End-to-end tests of the qabsorb binary: exit codes, file sets, CSV/JSON
// contracts, and agreement of emitted numbers with the closed-form library
// values. The binary path and the bundled scenario directory come in as
// compile definitions.
#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "qabsorb/packet_analytic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qabsorb;

namespace {

struct CommandResult {
  int exit_code;
  std::string out;
  std::string err;
};

fs::path scratch_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() /
                 ("qabsorb-cli-" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path fresh_dir(const std::string& label) {
  static int counter = 0;
  fs::path p = scratch_root() / (label + "-" + std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CommandResult run_cli(const std::string& args) {
  const fs::path dir = fresh_dir("cmd");
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(QABSORB_BIN) + " " + args + " 1>" +
                          out.string() + " 2>" + err.string();
  const int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  return {WEXITSTATUS(rc), slurp(out), slurp(err)};
}

fs::path write_fixture(const std::string& name, const std::string& text) {
  const fs::path p = fresh_dir("fixture") / name;
  std::ofstream f(p, std::ios::binary);
  f << text;
  REQUIRE(f.good());
  return p;
}

fs::path scenario(const std::string& name) {
  return fs::path(QABSORB_SCENARIO_DIR) / (name + ".json");
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("list names every bundled scenario", "[cli]") {
  const CommandResult r = run_cli("list");
  CHECK(r.exit_code == 0);
  for (const char* name : {"box-beats", "packet-reflection", "slit-screen",
                           "slit-lateral", "oracle-check"})
    CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("bundled box and packet scenarios run clean", "[cli]") {
  for (const std::string name : {"box-beats", "packet-reflection"}) {
    const fs::path out = fresh_dir(name);
    const CommandResult r =
        run_cli("run --config " + scenario(name).string() + " --out " + out.string());
    INFO(name << ": " << r.err);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out / "survival.csv"));
    CHECK(fs::exists(out / "results.json"));
  }
}

TEST_CASE("bundled slit scenarios run clean", "[cli][slow]") {
  {
    const fs::path out = fresh_dir("slit-screen");
    const CommandResult r = run_cli("run --config " + scenario("slit-screen").string() +
                                    " --out " + out.string());
    INFO(r.err);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out / "survival.csv"));
    CHECK(fs::exists(out / "pattern.csv"));
  }
  {
    const fs::path out = fresh_dir("slit-lateral");
    const CommandResult r = run_cli("run --config " + scenario("slit-lateral").string() +
                                    " --out " + out.string());
    INFO(r.err);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out / "survival.csv"));
    CHECK(fs::exists(out / "pattern.csv"));
    CHECK(fs::exists(out / "histogram.csv"));
  }
}

TEST_CASE("bundled oracle scenario and subcommand pass", "[cli]") {
  const fs::path out = fresh_dir("oracle");
  const CommandResult r = run_cli("run --config " + scenario("oracle-check").string() +
                                  " --out " + out.string());
  INFO(r.err);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("[PASS]") != std::string::npos);
  CHECK(r.out.find("[FAIL]") == std::string::npos);
  const json report = json::parse(slurp(out / "oracle_report.json"));
  CHECK(report.at("all-passed").get<bool>());
  CHECK(report.at("checks").size() >= 8);

  const fs::path out2 = fresh_dir("oracle-quick");
  const CommandResult q = run_cli("oracle-check --quick --out " + out2.string());
  CHECK(q.exit_code == 0);
  CHECK(fs::exists(out2 / "oracle_report.json"));
}

TEST_CASE("survival csv carries the exact header and zero-rate identity", "[cli]") {
  const fs::path cfg = write_fixture("zero-rate.json", R"({
  "schema_version": 1,
  "kind": "box",
  "name": "zero-rate",
  "physical": {"lambda_left": 0.0, "lambda_right": 0.0},
  "box": {"width": 1.0, "modes": [{"n": 1, "re": 1.0, "im": 0.0}]},
  "numerics": {"dt": 0.01, "t_max": 0.2},
  "outputs": {"survival": true}
})");
  const fs::path out = fresh_dir("zero-rate");
  const CommandResult r =
      run_cli("run --config " + cfg.string() + " --out " + out.string());
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  const auto rows = read_csv(out / "survival.csv");
  REQUIRE(rows.size() == 22);  // header + 21 samples
  REQUIRE(rows[0] == std::vector<std::string>{"t", "S", "exponent", "current"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][1] == "1");  // no absorption: survival is exactly one
    CHECK(rows[i][2] == "0");
    CHECK(rows[i][3] == "0");
  }
}

TEST_CASE("packet survival tail matches the closed-form reflection limit", "[cli]") {
  const fs::path out = fresh_dir("packet");
  const CommandResult r = run_cli("run --config " + scenario("packet-reflection").string() +
                                  " --out " + out.string());
  REQUIRE(r.exit_code == 0);
  const auto rows = read_csv(out / "survival.csv");
  REQUIRE(rows[0] == std::vector<std::string>{"t", "S", "exponent", "current"});
  const auto& last = rows.back();
  const double t_max = std::stod(last[0]);
  const double s_final = std::stod(last[1]);
  REQUIRE(t_max == 20.0);

  PhysicalParams ph;
  ph.lambda_left = 1.0;
  const GaussianPacketParams p(1.0, 5.0, 5.0, ph);
  const double r_inf = reflection_coefficient(p, QuadratureControl{});
  // independently paneled quadrature of the exponent accumulated by t_max
  double exponent = 0.0;
  const std::vector<double> edges = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, t_max};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const std::function<double(double)> rate = [&](double t) {
      return boundary_flux_rate(t, p);
    };
    exponent += adaptive_integrate<double>(rate, edges[i], edges[i + 1], 1e-13);
  }
  CHECK(s_final == Catch::Approx(std::exp(-exponent)).epsilon(1e-9));
  // the run stops at t_max, so a sliver of flux tail remains un-absorbed
  CHECK(s_final > r_inf);
  const double tail_bound = flux_tail_coefficient(p) / (2.0 * t_max * t_max);
  CHECK(s_final < r_inf * std::exp(tail_bound));

  const auto pattern = read_csv(out / "pattern.csv");
  REQUIRE(pattern[0] == std::vector<std::string>{"coordinate", "density"});
  REQUIRE(pattern.size() == 302);
}

TEST_CASE("schema violations exit 2 with line anchors", "[cli]") {
  struct Case {
    const char* label;
    const char* text;
    const char* needle;
  };
  const std::vector<Case> cases = {
      {"malformed", "{\n  \"schema_version\": 1,\n", ""},
      {"bad-version", R"({"schema_version": 2, "kind": "box", "name": "x",
 "physical": {}, "box": {"width": 1.0, "modes": [{"n": 1, "re": 1.0, "im": 0.0}]},
 "numerics": {"dt": 0.01, "t_max": 0.1}, "outputs": {"survival": true}})",
       "schema_version"},
      {"bad-kind", R"({"schema_version": 1, "kind": "ring", "name": "x",
 "numerics": {"quick": true}})",
       "kind"},
      {"unknown-key", R"({"schema_version": 1, "kind": "box", "name": "x",
 "physical": {}, "box": {"width": 1.0, "modes": [{"n": 1, "re": 1.0, "im": 0.0}]},
 "numerics": {"dt": 0.01, "t_max": 0.1, "n_modes": 4},
 "outputs": {"survival": true}})",
       "n_modes"},
      {"missing-modes", R"({"schema_version": 1, "kind": "box", "name": "x",
 "physical": {}, "box": {"width": 1.0},
 "numerics": {"dt": 0.01, "t_max": 0.1}, "outputs": {"survival": true}})",
       "modes"},
      {"negative-dt", R"({"schema_version": 1, "kind": "box", "name": "x",
 "physical": {}, "box": {"width": 1.0, "modes": [{"n": 1, "re": 1.0, "im": 0.0}]},
 "numerics": {"dt": -0.01, "t_max": 0.1}, "outputs": {"survival": true}})",
       "dt"},
      {"box-pattern-output", R"({"schema_version": 1, "kind": "box", "name": "x",
 "physical": {}, "box": {"width": 1.0, "modes": [{"n": 1, "re": 1.0, "im": 0.0}]},
 "numerics": {"dt": 0.01, "t_max": 0.1}, "outputs": {"survival": true, "pattern": true}})",
       "pattern"},
  };
  for (const Case& c : cases) {
    const fs::path cfg = write_fixture(std::string(c.label) + ".json", c.text);
    const fs::path out = fresh_dir(c.label);
    const CommandResult r =
        run_cli("run --config " + cfg.string() + " --out " + out.string());
    INFO(c.label << " stderr: " << r.err);
    CHECK(r.exit_code == 2);
    // line-anchored diagnostic: "<path>:<line>: <message>"
    const std::string prefix = cfg.string() + ":";
    REQUIRE(r.err.rfind(prefix, 0) == 0);
    const std::size_t colon = r.err.find(':', prefix.size());
    REQUIRE(colon != std::string::npos);
    const std::string line_field = r.err.substr(prefix.size(), colon - prefix.size());
    CHECK(std::stoi(line_field) >= 1);
    if (*c.needle)
      CHECK(r.err.find(c.needle) != std::string::npos);
    CHECK(fs::is_empty(out));  // nothing written on rejection
  }
}

TEST_CASE("unresolved series truncation exits 3", "[cli][slow]") {
  const fs::path cfg = write_fixture("tight-series.json", R"({
  "schema_version": 1,
  "kind": "slit-lateral",
  "name": "tight-series",
  "physical": {},
  "slit": {"sigma_x": 0.5, "sigma_y": 1.0, "x0": 5.0, "v0": 5.0, "y0": 2.0,
           "lambda_screen": 1.0, "lambda_lateral": 1.0},
  "numerics": {"dt": 0.01, "t_max": 0.1, "n_modes": 13, "series-tolerance": 1e-6,
               "abs_tol": 1e-6},
  "outputs": {"histogram": true, "histogram-points": 3, "histogram-range": [-1.0, 1.0]}
})");
  const fs::path out = fresh_dir("tight-series");
  const CommandResult r =
      run_cli("run --config " + cfg.string() + " --out " + out.string());
  INFO(r.err);
  CHECK(r.exit_code == 3);
  CHECK(!r.err.empty());
}

TEST_CASE("missing config exits 4", "[cli]") {
  const CommandResult r = run_cli("run --config " +
                                  (scratch_root() / "does-not-exist.json").string());
  CHECK(r.exit_code == 4);
  CHECK(!r.err.empty());
}

TEST_CASE("results json round-trips byte-identically", "[cli]") {
  const fs::path out = fresh_dir("roundtrip");
  REQUIRE(run_cli("run --config " + scenario("box-beats").string() + " --out " +
                  out.string()).exit_code == 0);
  const std::string raw = slurp(out / "results.json");
  const json parsed = json::parse(raw);
  CHECK(parsed.dump(2) + "\n" == raw);
  CHECK(parsed.at("schema_version").get<int>() == 1);
  CHECK(parsed.at("runtime-seconds").is_null());
  CHECK(parsed.at("series").at("survival").at("rows").size() == 1701);
}

TEST_CASE("reruns are byte-identical", "[cli]") {
  const fs::path a = fresh_dir("stable-a");
  const fs::path b = fresh_dir("stable-b");
  const std::string base = "run --config " + scenario("box-beats").string() + " --out ";
  REQUIRE(run_cli(base + a.string()).exit_code == 0);
  REQUIRE(run_cli(base + b.string()).exit_code == 0);
  CHECK(slurp(a / "survival.csv") == slurp(b / "survival.csv"));
  CHECK(slurp(a / "results.json") == slurp(b / "results.json"));
}

TEST_CASE("format flag selects the emitted file set", "[cli]") {
  const fs::path c = fresh_dir("fmt-csv");
  REQUIRE(run_cli("run --config " + scenario("box-beats").string() + " --out " +
                  c.string() + " --format csv").exit_code == 0);
  CHECK(fs::exists(c / "survival.csv"));
  CHECK(!fs::exists(c / "results.json"));

  const fs::path j = fresh_dir("fmt-json");
  REQUIRE(run_cli("run --config " + scenario("box-beats").string() + " --out " +
                  j.string() + " --format json").exit_code == 0);
  CHECK(!fs::exists(j / "survival.csv"));
  CHECK(fs::exists(j / "results.json"));

  const CommandResult bad = run_cli("run --config " + scenario("box-beats").string() +
                                    " --format yaml");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("timing flag reports a runtime number", "[cli]") {
  const fs::path out = fresh_dir("timing");
  REQUIRE(run_cli("run --config " + scenario("box-beats").string() + " --out " +
                  out.string() + " --timing").exit_code == 0);
  const json parsed = json::parse(slurp(out / "results.json"));
  REQUIRE(parsed.at("runtime-seconds").is_number());
  CHECK(parsed.at("runtime-seconds").get<double>() >= 0.0);
}
