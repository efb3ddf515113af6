#include <chrono>
#include <cstdio>

#include <CLI11.hpp>

#include "embedded_scenarios.hpp"
#include "scenario_runner.hpp"

namespace {

using namespace qabsorb;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw cli::IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (!f && !f.eof()) throw cli::IoError("read failed for " + path);
  return ss.str();
}

int run_scenario_text(const std::string& raw, const std::string& label,
                      const std::string& out_dir, const std::string& format,
                      bool timing) {
  const auto t0 = std::chrono::steady_clock::now();
  const cli::Scenario s = cli::parse_scenario(raw);
  const cli::RunResult r = cli::execute(s);
  std::optional<double> runtime;
  if (timing)
    runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count();
  const std::vector<std::string> written =
      cli::write_outputs(s, r, out_dir, format, runtime);
  for (const std::string& p : written) std::printf("wrote %s\n", p.c_str());
  if (s.kind == cli::Kind::oracle_check) {
    for (const cli::OracleCheck& c : r.checks)
      std::printf("[%s] %-22s measured=%s bound=%s\n", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), cli::format_double(c.measured).c_str(),
                  cli::format_double(c.bound).c_str());
    if (!r.checks_passed) {
      std::fprintf(stderr, "%s: oracle checks failed\n", label.c_str());
      return 3;
    }
  }
  return 0;
}

int dispatch(const std::string& config_path, const std::string& out_dir,
             const std::string& format, bool timing) {
  std::string raw;
  try {
    raw = read_file(config_path);
  } catch (const cli::IoError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  }
  try {
    return run_scenario_text(raw, config_path, out_dir, format, timing);
  } catch (const cli::SchemaError& e) {
    std::fprintf(stderr, "%s:%d: %s\n", config_path.c_str(), e.line, e.what());
    return 2;
  } catch (const cli::IoError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s:1: %s\n", config_path.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: %s\n", config_path.c_str(), e.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"absorbing-boundary quantum scenario runner"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", format;
  bool timing = false, quick = false;

  CLI::App* run = app.add_subcommand("run", "execute a scenario configuration");
  run->add_option("--config", config_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory (default: current)");
  run->add_option("--format", format, "csv or json (default: both)")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--timing", timing,
                "record wall-clock runtime in results metadata");

  CLI::App* list = app.add_subcommand("list", "list bundled scenarios");

  CLI::App* oracle =
      app.add_subcommand("oracle-check", "run the numerical oracle suites");
  oracle->add_option("--out", out_dir, "output directory (default: current)");
  oracle->add_flag("--quick", quick, "smaller grids, looser bounds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (run->parsed()) return dispatch(config_path, out_dir, format, timing);

  if (list->parsed()) {
    for (const qabsorb_tools::EmbeddedScenario& s :
         qabsorb_tools::embedded_scenarios()) {
      const auto parsed = qabsorb::cli::parse_scenario(s.text);
      std::printf("%-18s %-13s %s\n", s.name, parsed.kind_name.c_str(),
                  parsed.description.c_str());
    }
    return 0;
  }

  // oracle-check subcommand: synthesize the scenario inline
  const std::string raw = std::string("{\"schema_version\": 1, \"kind\": "
                                      "\"oracle-check\", \"numerics\": {\"quick\": ") +
                          (quick ? "true" : "false") + "}}";
  try {
    return run_scenario_text(raw, "oracle-check", out_dir, "", false);
  } catch (const qabsorb::cli::IoError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "oracle-check: %s\n", e.what());
    return 3;
  }
}
