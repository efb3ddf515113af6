#pragma once

// Scenario front end: JSON configuration -> computation modules -> CSV/JSON
// result files. Errors carry the process exit semantics: schema violations
// (exit 2, line-anchored), convergence or non-finite results (exit 3), I/O
// failures (exit 4).

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qabsorb/box_modes.hpp"
#include "qabsorb/oracle_solvers.hpp"
#include "qabsorb/slit_experiment.hpp"

namespace qabsorb::cli {

using nlohmann::json;

struct SchemaError : std::runtime_error {
  int line;
  SchemaError(int line_, const std::string& msg)
      : std::runtime_error(msg), line(line_) {}
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 1-based line containing the given byte offset.
inline int line_of_offset(const std::string& raw, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < raw.size(); ++i)
    if (raw[i] == '\n') ++line;
  return line;
}

// 1-based line of the first occurrence of "key" (quoted) in the raw text;
// line 1 when the key is absent (e.g. reporting a missing key).
inline int line_of_key(const std::string& raw, const std::string& key) {
  const std::string needle = "\"" + key + "\"";
  const std::size_t pos = raw.find(needle);
  if (pos == std::string::npos) return 1;
  return line_of_offset(raw, pos);
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

enum class Kind { box, packet, slit, slit_lateral, oracle_check };

struct OutputRequest {
  bool survival = false;
  bool pattern = false;
  bool histogram = false;
  std::size_t pattern_points = 81;
  double pattern_lo = 0.0, pattern_hi = 1.0;
  std::size_t histogram_points = 41;
  double histogram_lo = 0.0, histogram_hi = 1.0;
};

struct Scenario {
  int schema_version = 1;
  Kind kind = Kind::box;
  std::string kind_name;
  std::string name;
  std::string description;
  PhysicalParams physical;

  double box_width = 1.0;
  std::vector<BoxMode> box_modes;

  double packet_width_a = 1.0, packet_x0 = 5.0, packet_k0 = 5.0;

  double slit_sigma_x = 0.5, slit_sigma_y = 1.0, slit_x0 = 5.0, slit_v0 = 5.0;
  double slit_y0 = 2.0, slit_lambda_screen = 1.0, slit_lambda_lateral = 1.0;

  double dt = 1e-3, t_max = 1.0;
  int n_modes = 25;
  double k_max = 15.0;
  double abs_tol = 1e-8;
  double series_tolerance = 1e-6;
  RateConvention conv = RateConvention::pi_m;
  WallPatternMode wall_mode = WallPatternMode::flux;
  bool consistent_energies = false;
  bool quick = false;

  OutputRequest outputs;
  json echo;  // the parsed configuration, for result metadata
};

namespace detail {

inline const json& need(const json& obj, const char* key, const std::string& raw,
                        const std::string& section) {
  if (!obj.contains(key))
    throw SchemaError(line_of_key(raw, section),
                      section + ": missing key '" + key + "'");
  return obj.at(key);
}

inline double need_number(const json& obj, const char* key,
                          const std::string& raw, const std::string& section) {
  const json& v = need(obj, key, raw, section);
  if (!v.is_number())
    throw SchemaError(line_of_key(raw, key),
                      section + "." + key + " must be a number");
  return v.get<double>();
}

inline double opt_number(const json& obj, const char* key, double fallback,
                         const std::string& raw, const std::string& section) {
  if (!obj.contains(key)) return fallback;
  return need_number(obj, key, raw, section);
}

inline bool opt_bool(const json& obj, const char* key, bool fallback,
                     const std::string& raw, const std::string& section) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean())
    throw SchemaError(line_of_key(raw, key),
                      section + "." + key + " must be a boolean");
  return v.get<bool>();
}

inline std::string opt_string(const json& obj, const char* key,
                              const std::string& fallback,
                              const std::string& raw,
                              const std::string& section) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string())
    throw SchemaError(line_of_key(raw, key),
                      section + "." + key + " must be a string");
  return v.get<std::string>();
}

inline void forbid_unknown(const json& obj,
                           std::initializer_list<const char*> allowed,
                           const std::string& raw, const std::string& section) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known)
      throw SchemaError(line_of_key(raw, it.key()),
                        section + ": unknown key '" + it.key() + "'");
  }
}

inline void check_positive(double v, const char* what, const std::string& raw,
                           const char* key) {
  if (!(v > 0.0) || !is_finite(v))
    throw SchemaError(line_of_key(raw, key),
                      std::string(what) + " must be positive and finite");
}

inline std::pair<double, double> need_range(const json& obj, const char* key,
                                            const std::string& raw,
                                            const std::string& section) {
  const json& v = need(obj, key, raw, section);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw SchemaError(line_of_key(raw, key),
                      section + "." + key + " must be [low, high]");
  const double lo = v[0].get<double>(), hi = v[1].get<double>();
  if (!(lo < hi))
    throw SchemaError(line_of_key(raw, key),
                      section + "." + key + " must satisfy low < high");
  return {lo, hi};
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& raw) {
  json root;
  try {
    root = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw SchemaError(line_of_offset(raw, e.byte > 0 ? e.byte - 1 : 0),
                      std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError(1, "top level must be an object");

  using namespace detail;
  forbid_unknown(root,
                 {"schema_version", "kind", "name", "description", "physical",
                  "box", "packet", "slit", "numerics", "outputs"},
                 raw, "scenario");

  Scenario s;
  s.echo = root;

  const json& ver = need(root, "schema_version", raw, "scenario");
  if (!ver.is_number_integer() || ver.get<int>() != 1)
    throw SchemaError(line_of_key(raw, "schema_version"),
                      "schema_version must be the integer 1");

  const json& kindv = need(root, "kind", raw, "scenario");
  if (!kindv.is_string())
    throw SchemaError(line_of_key(raw, "kind"), "kind must be a string");
  s.kind_name = kindv.get<std::string>();
  if (s.kind_name == "box") s.kind = Kind::box;
  else if (s.kind_name == "packet") s.kind = Kind::packet;
  else if (s.kind_name == "slit") s.kind = Kind::slit;
  else if (s.kind_name == "slit-lateral") s.kind = Kind::slit_lateral;
  else if (s.kind_name == "oracle-check") s.kind = Kind::oracle_check;
  else
    throw SchemaError(line_of_key(raw, "kind"),
                      "kind must be one of box, packet, slit, slit-lateral, "
                      "oracle-check");

  s.name = opt_string(root, "name", "", raw, "scenario");
  s.description = opt_string(root, "description", "", raw, "scenario");

  if (root.contains("physical")) {
    const json& ph = root.at("physical");
    if (!ph.is_object())
      throw SchemaError(line_of_key(raw, "physical"),
                        "physical must be an object");
    forbid_unknown(ph, {"hbar", "mass", "lambda_left", "lambda_right"}, raw,
                   "physical");
    s.physical.hbar = opt_number(ph, "hbar", 1.0, raw, "physical");
    s.physical.mass = opt_number(ph, "mass", 1.0, raw, "physical");
    s.physical.lambda_left = opt_number(ph, "lambda_left", 0.0, raw, "physical");
    s.physical.lambda_right = opt_number(ph, "lambda_right", 0.0, raw, "physical");
    try {
      s.physical.validate();
    } catch (const std::invalid_argument& e) {
      throw SchemaError(line_of_key(raw, "physical"), e.what());
    }
  }

  // numerics (accepted keys depend on kind)
  const json numerics =
      root.contains("numerics") ? root.at("numerics") : json::object();
  if (!numerics.is_object())
    throw SchemaError(line_of_key(raw, "numerics"), "numerics must be an object");
  switch (s.kind) {
    case Kind::box:
      forbid_unknown(numerics, {"dt", "t_max", "abs_tol", "rate-convention"},
                     raw, "numerics");
      break;
    case Kind::packet:
      forbid_unknown(numerics,
                     {"dt", "t_max", "k_max", "abs_tol", "rate-convention"},
                     raw, "numerics");
      break;
    case Kind::slit:
      forbid_unknown(numerics, {"dt", "t_max", "abs_tol", "rate-convention"},
                     raw, "numerics");
      break;
    case Kind::slit_lateral:
      forbid_unknown(numerics,
                     {"dt", "t_max", "n_modes", "abs_tol", "series-tolerance",
                      "rate-convention", "wall-pattern", "consistent-energies"},
                     raw, "numerics");
      break;
    case Kind::oracle_check:
      forbid_unknown(numerics, {"quick"}, raw, "numerics");
      break;
  }

  s.dt = opt_number(numerics, "dt", s.dt, raw, "numerics");
  s.t_max = opt_number(numerics, "t_max", s.t_max, raw, "numerics");
  s.abs_tol = opt_number(numerics, "abs_tol", s.abs_tol, raw, "numerics");
  s.series_tolerance = opt_number(numerics, "series-tolerance",
                                  s.series_tolerance, raw, "numerics");
  s.k_max = opt_number(numerics, "k_max", s.k_max, raw, "numerics");
  s.quick = detail::opt_bool(numerics, "quick", false, raw, "numerics");
  s.consistent_energies = detail::opt_bool(numerics, "consistent-energies",
                                           false, raw, "numerics");
  if (numerics.contains("n_modes")) {
    const json& nm = numerics.at("n_modes");
    if (!nm.is_number_integer() || nm.get<int>() < 1)
      throw SchemaError(line_of_key(raw, "n_modes"),
                        "numerics.n_modes must be a positive integer");
    s.n_modes = nm.get<int>();
  }
  {
    const std::string conv = detail::opt_string(numerics, "rate-convention",
                                                "pi_m", raw, "numerics");
    if (conv == "pi_m") s.conv = RateConvention::pi_m;
    else if (conv == "two_pi_m") s.conv = RateConvention::two_pi_m;
    else
      throw SchemaError(line_of_key(raw, "rate-convention"),
                        "rate-convention must be pi_m or two_pi_m");
  }
  {
    const std::string wp = detail::opt_string(numerics, "wall-pattern", "flux",
                                              raw, "numerics");
    if (wp == "flux") s.wall_mode = WallPatternMode::flux;
    else if (wp == "verbatim") s.wall_mode = WallPatternMode::verbatim;
    else
      throw SchemaError(line_of_key(raw, "wall-pattern"),
                        "wall-pattern must be flux or verbatim");
  }
  if (s.kind != Kind::oracle_check) {
    detail::check_positive(s.dt, "numerics.dt", raw, "dt");
    detail::check_positive(s.t_max, "numerics.t_max", raw, "t_max");
    if (!(s.t_max > s.dt))
      throw SchemaError(line_of_key(raw, "t_max"),
                        "numerics.t_max must exceed numerics.dt");
    if (s.t_max / s.dt > 2e7)
      throw SchemaError(line_of_key(raw, "dt"),
                        "numerics.t_max / numerics.dt exceeds 2e7 samples");
    detail::check_positive(s.abs_tol, "numerics.abs_tol", raw, "abs_tol");
    detail::check_positive(s.series_tolerance, "numerics.series-tolerance", raw,
                           "series-tolerance");
    detail::check_positive(s.k_max, "numerics.k_max", raw, "k_max");
  }

  // kind-specific parameter blocks
  if (s.kind == Kind::box) {
    const json& box = need(root, "box", raw, "scenario");
    if (!box.is_object())
      throw SchemaError(line_of_key(raw, "box"), "box must be an object");
    forbid_unknown(box, {"width", "modes"}, raw, "box");
    s.box_width = need_number(box, "width", raw, "box");
    detail::check_positive(s.box_width, "box.width", raw, "width");
    const json& modes = need(box, "modes", raw, "box");
    if (!modes.is_array() || modes.empty())
      throw SchemaError(line_of_key(raw, "modes"),
                        "box.modes must be a non-empty array");
    for (const json& m : modes) {
      if (!m.is_object())
        throw SchemaError(line_of_key(raw, "modes"),
                          "box.modes entries must be objects");
      forbid_unknown(m, {"n", "re", "im"}, raw, "box.modes");
      const json& n = need(m, "n", raw, "modes");
      if (!n.is_number_integer() || n.get<int>() < 1)
        throw SchemaError(line_of_key(raw, "modes"),
                          "box mode index n must be a positive integer");
      const double re = need_number(m, "re", raw, "modes");
      const double im = opt_number(m, "im", 0.0, raw, "modes");
      s.box_modes.push_back({n.get<int>(), cdouble(re, im)});
    }
    for (std::size_t i = 0; i < s.box_modes.size(); ++i)
      for (std::size_t j = i + 1; j < s.box_modes.size(); ++j)
        if (s.box_modes[i].n == s.box_modes[j].n)
          throw SchemaError(line_of_key(raw, "modes"),
                            "box.modes indices must be distinct");
  } else if (s.kind == Kind::packet) {
    const json& p = need(root, "packet", raw, "scenario");
    if (!p.is_object())
      throw SchemaError(line_of_key(raw, "packet"), "packet must be an object");
    forbid_unknown(p, {"width_a", "x0", "k0"}, raw, "packet");
    s.packet_width_a = need_number(p, "width_a", raw, "packet");
    s.packet_x0 = need_number(p, "x0", raw, "packet");
    s.packet_k0 = need_number(p, "k0", raw, "packet");
    detail::check_positive(s.packet_width_a, "packet.width_a", raw, "width_a");
    detail::check_positive(s.packet_x0, "packet.x0", raw, "x0");
    if (!is_finite(s.packet_k0))
      throw SchemaError(line_of_key(raw, "k0"), "packet.k0 must be finite");
  } else if (s.kind == Kind::slit || s.kind == Kind::slit_lateral) {
    const json& sl = need(root, "slit", raw, "scenario");
    if (!sl.is_object())
      throw SchemaError(line_of_key(raw, "slit"), "slit must be an object");
    forbid_unknown(sl,
                   {"sigma_x", "sigma_y", "x0", "v0", "y0", "lambda_screen",
                    "lambda_lateral"},
                   raw, "slit");
    s.slit_sigma_x = need_number(sl, "sigma_x", raw, "slit");
    s.slit_sigma_y = need_number(sl, "sigma_y", raw, "slit");
    s.slit_x0 = need_number(sl, "x0", raw, "slit");
    s.slit_v0 = need_number(sl, "v0", raw, "slit");
    s.slit_y0 = opt_number(sl, "y0", 2.0, raw, "slit");
    s.slit_lambda_screen = opt_number(sl, "lambda_screen", 1.0, raw, "slit");
    s.slit_lambda_lateral = opt_number(sl, "lambda_lateral", 1.0, raw, "slit");
    try {
      SlitConfig probe(s.slit_sigma_x, s.slit_sigma_y, s.slit_x0, s.slit_v0,
                       s.slit_y0, s.slit_lambda_screen, s.slit_lambda_lateral,
                       s.physical);
      if (s.kind == Kind::slit_lateral) probe.require_lateral();
    } catch (const std::invalid_argument& e) {
      throw SchemaError(line_of_key(raw, "slit"), e.what());
    }
  }

  // outputs
  const json outs = root.contains("outputs") ? root.at("outputs") : json::object();
  if (!outs.is_object())
    throw SchemaError(line_of_key(raw, "outputs"), "outputs must be an object");
  switch (s.kind) {
    case Kind::box:
      forbid_unknown(outs, {"survival"}, raw, "outputs");
      break;
    case Kind::packet:
      forbid_unknown(outs, {"survival", "pattern", "pattern-points"}, raw,
                     "outputs");
      break;
    case Kind::slit:
      forbid_unknown(outs, {"survival", "pattern", "pattern-points", "pattern-range"},
                     raw, "outputs");
      break;
    case Kind::slit_lateral:
      forbid_unknown(outs,
                     {"survival", "pattern", "pattern-points", "pattern-range",
                      "histogram", "histogram-points", "histogram-range"},
                     raw, "outputs");
      break;
    case Kind::oracle_check:
      forbid_unknown(outs, {}, raw, "outputs");
      break;
  }
  s.outputs.survival = detail::opt_bool(outs, "survival", false, raw, "outputs");
  s.outputs.pattern = detail::opt_bool(outs, "pattern", false, raw, "outputs");
  s.outputs.histogram = detail::opt_bool(outs, "histogram", false, raw, "outputs");
  auto points_of = [&](const char* key, std::size_t fallback) -> std::size_t {
    if (!outs.contains(key)) return fallback;
    const json& v = outs.at(key);
    if (!v.is_number_integer() || v.get<int>() < 2)
      throw SchemaError(line_of_key(raw, key),
                        std::string("outputs.") + key + " must be an integer >= 2");
    return static_cast<std::size_t>(v.get<int>());
  };
  s.outputs.pattern_points = points_of("pattern-points", s.outputs.pattern_points);
  s.outputs.histogram_points =
      points_of("histogram-points", s.outputs.histogram_points);
  if (outs.contains("pattern-range")) {
    auto [lo, hi] = detail::need_range(outs, "pattern-range", raw, "outputs");
    s.outputs.pattern_lo = lo;
    s.outputs.pattern_hi = hi;
  } else if (s.kind == Kind::slit) {
    s.outputs.pattern_lo = -8.0;
    s.outputs.pattern_hi = 8.0;
  } else if (s.kind == Kind::slit_lateral) {
    s.outputs.pattern_lo = 0.0;
    s.outputs.pattern_hi = s.slit_x0;
  }
  if (outs.contains("histogram-range")) {
    auto [lo, hi] = detail::need_range(outs, "histogram-range", raw, "outputs");
    s.outputs.histogram_lo = lo;
    s.outputs.histogram_hi = hi;
  } else if (s.kind == Kind::slit_lateral) {
    s.outputs.histogram_lo = -0.95 * s.slit_y0;
    s.outputs.histogram_hi = 0.95 * s.slit_y0;
  }
  if (s.kind == Kind::slit_lateral &&
      (s.outputs.histogram_lo < -s.slit_y0 || s.outputs.histogram_hi > s.slit_y0))
    throw SchemaError(line_of_key(raw, "histogram-range"),
                      "outputs.histogram-range must lie within [-y0, y0]");
  if (s.kind == Kind::slit_lateral && s.outputs.pattern_lo < 0.0)
    throw SchemaError(line_of_key(raw, "pattern-range"),
                      "outputs.pattern-range must start at x >= 0");

  if (s.kind != Kind::oracle_check && !s.outputs.survival &&
      !s.outputs.pattern && !s.outputs.histogram)
    throw SchemaError(line_of_key(raw, "outputs"),
                      "outputs: request at least one of survival, pattern, "
                      "histogram");
  if (s.kind == Kind::box && !s.outputs.survival)
    throw SchemaError(line_of_key(raw, "outputs"),
                      "outputs: box scenarios emit survival only");

  return s;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct OracleCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct RunResult {
  // insertion-ordered artifact tables keyed by file stem (survival, pattern,
  // histogram)
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<OracleCheck> checks;
  bool checks_passed = true;
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * double(i) / double(n - 1);
  v.back() = hi;
  return v;
}

inline TimeGrid output_grid(const Scenario& s) {
  const auto n = static_cast<std::size_t>(s.t_max / s.dt + 1e-9);
  return TimeGrid{0.0, s.dt, std::max<std::size_t>(n, 1)};
}

inline Table run_box(const Scenario& s) {
  const BoxExpansion e(s.box_width, s.box_modes, s.physical);
  const TimeGrid grid = output_grid(s);
  WallFlux left{"left", s.physical.lambda_left, {}};
  WallFlux right{"right", s.physical.lambda_right, {}};
  left.values.resize(grid.size());
  right.values.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    left.values[j] = boundary_flux(e, grid.time(j), Wall::left);
    right.values[j] = boundary_flux(e, grid.time(j), Wall::right);
  }
  const FluxSeries flux(grid, {left, right});
  const SurvivalSeries surv = survival_from_flux(flux, s.physical, s.conv);
  const std::vector<double> current =
      absorption_current(flux, surv, s.physical, s.conv);
  Table t;
  t.columns = {"t", "S", "exponent", "current"};
  for (std::size_t j = 0; j < grid.size(); ++j)
    t.rows.push_back({grid.time(j), surv.S[j], surv.exponent[j], current[j]});
  return t;
}

inline Table packet_survival(const Scenario& s, const GaussianPacketParams& p) {
  const TimeGrid grid = output_grid(s);
  // accumulate the exponent interval by interval; each panel is adaptive
  std::vector<double> expo(grid.size(), 0.0);
  for (std::size_t j = 1; j < grid.size(); ++j) {
    const std::function<double(double)> rate = [&](double t) {
      return boundary_flux_rate(t, p, s.conv);
    };
    expo[j] = expo[j - 1] +
              adaptive_integrate<double>(rate, grid.time(j - 1), grid.time(j),
                                         1e-13);
  }
  Table t;
  t.columns = {"t", "S", "exponent", "current"};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double S = std::exp(-expo[j]);
    t.rows.push_back({grid.time(j), S, expo[j],
                      boundary_flux_rate(grid.time(j), p, s.conv) * S});
  }
  return t;
}

inline Table packet_mode_density(const Scenario& s,
                                 const GaussianPacketParams& p) {
  Table t;
  t.columns = {"coordinate", "density"};
  for (double k : linspace(0.0, s.k_max, s.outputs.pattern_points))
    t.rows.push_back({k, sine_coefficient_squared(k, p)});
  return t;
}

inline SlitConfig slit_config(const Scenario& s) {
  return SlitConfig(s.slit_sigma_x, s.slit_sigma_y, s.slit_x0, s.slit_v0,
                    s.slit_y0, s.slit_lambda_screen, s.slit_lambda_lateral,
                    s.physical);
}

inline RunResult run_slit(const Scenario& s) {
  const SlitConfig cfg = slit_config(s);
  const GaussianPacketParams p = packet_for_slit(cfg);
  const ScreenFactor factor = make_screen_factor(p, s.conv);
  RunResult r;
  if (s.outputs.survival) {
    const TimeGrid grid = output_grid(s);
    Table t;
    t.columns = {"t", "S", "exponent", "current"};
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double time = grid.time(j);
      const double S = factor.survival(time);
      t.rows.push_back({time, S, factor.exponent(time), factor.rate(time) * S});
    }
    r.tables.emplace_back("survival", std::move(t));
  }
  if (s.outputs.pattern) {
    Table t;
    t.columns = {"coordinate", "density"};
    for (double y : linspace(s.outputs.pattern_lo, s.outputs.pattern_hi,
                             s.outputs.pattern_points))
      t.rows.push_back({y, cumulative_pattern(y, cfg, factor, s.abs_tol)});
    r.tables.emplace_back("pattern", std::move(t));
  }
  return r;
}

inline RunResult run_slit_lateral(const Scenario& s) {
  const SlitConfig cfg = slit_config(s);
  const GaussianPacketParams p = packet_for_slit(cfg);
  RunResult r;
  if (s.outputs.survival) {
    const TimeGrid grid = output_grid(s);
    const double kappa = kappa_factor(cfg.params, cfg.lambda_lateral, s.conv);
    Table t;
    t.columns = {"t", "S", "exponent", "current"};
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double time = grid.time(j);
      const double expo = 2.0 * kappa *
                          lateral_flux_integral(time, cfg, s.n_modes,
                                                s.consistent_energies);
      const double S = std::exp(-expo);
      const double current = 2.0 * kappa *
                             lateral_wall_flux(time, cfg, s.n_modes,
                                               s.consistent_energies) *
                             S;
      t.rows.push_back({time, S, expo, current});
    }
    r.tables.emplace_back("survival", std::move(t));
  }
  if (s.outputs.pattern) {
    const std::vector<double> xs = linspace(
        s.outputs.pattern_lo, s.outputs.pattern_hi, s.outputs.pattern_points);
    std::vector<double> coarse, fine;
    for (double x : xs) {
      coarse.push_back(lateral_wall_pattern(x, cfg, p, s.n_modes, s.wall_mode,
                                            s.conv, s.consistent_energies,
                                            s.abs_tol));
      fine.push_back(lateral_wall_pattern(x, cfg, p, 2 * s.n_modes, s.wall_mode,
                                          s.conv, s.consistent_energies,
                                          s.abs_tol));
    }
    const double change = truncation_change(coarse, fine);
    if (change > s.series_tolerance)
      throw ConvergenceError(
          "wall pattern not converged: doubling n_modes moves it by " +
          format_double(change) + " relative L2 (tolerance " +
          format_double(s.series_tolerance) + "); raise n_modes or the "
          "series tolerance");
    Table t;
    t.columns = {"coordinate", "density"};
    for (std::size_t i = 0; i < xs.size(); ++i)
      t.rows.push_back({xs[i], fine[i]});
    r.tables.emplace_back("pattern", std::move(t));
  }
  if (s.outputs.histogram) {
    const std::vector<double> ys =
        linspace(s.outputs.histogram_lo, s.outputs.histogram_hi,
                 s.outputs.histogram_points);
    std::vector<double> coarse, fine;
    for (double y : ys) {
      coarse.push_back(lateral_screen_histogram(y, cfg, p, s.n_modes,
                                                s.consistent_energies, s.abs_tol));
      fine.push_back(lateral_screen_histogram(y, cfg, p, 2 * s.n_modes,
                                              s.consistent_energies, s.abs_tol));
    }
    const double change = truncation_change(coarse, fine);
    if (change > s.series_tolerance)
      throw ConvergenceError(
          "screen histogram not converged: doubling n_modes moves it by " +
          format_double(change) + " relative L2 (tolerance " +
          format_double(s.series_tolerance) + "); raise n_modes or the "
          "series tolerance");
    Table t;
    t.columns = {"coordinate", "density"};
    for (std::size_t i = 0; i < ys.size(); ++i)
      t.rows.push_back({ys[i], fine[i]});
    r.tables.emplace_back("histogram", std::move(t));
  }
  return r;
}

// Two-mode box state shared by the oracle checks (unit norm on width 1).
inline BoxExpansion check_state(const PhysicalParams& ph) {
  return BoxExpansion(1.0, {{1, cdouble(1.0, 0.0)}, {2, cdouble(1.0, 0.0)}}, ph);
}

inline ComplexField sample_expansion(const BoxExpansion& e, const SpaceGrid& g) {
  return evolve(e, g, 0.0);
}

inline RunResult run_oracle_check(const Scenario& s) {
  RunResult r;
  PhysicalParams ph;  // unit constants, no absorption during evolution
  const BoxExpansion state = check_state(ph);

  // 1. Cayley norm conservation
  {
    const std::size_t nodes = s.quick ? 801 : 2001;
    const SpaceGrid g{0.0, 1.0, nodes};
    DirichletProblem prob{g, std::vector<double>(nodes, 0.0), ph,
                          sample_expansion(state, g)};
    CrankNicolson cn(prob, 1e-4);
    const std::size_t steps = s.quick ? 400 : 1000;
    for (std::size_t i = 0; i < steps; ++i) cn.step();
    const double drift = std::abs(cn.norm_squared() - 1.0);
    r.checks.push_back({"cn-norm-conservation", drift, 1e-10, drift < 1e-10});
  }

  // 2. CN wall flux vs the eigenmode series
  {
    const std::size_t nodes = s.quick ? 1001 : 4001;
    const double bound = s.quick ? 1e-4 : 1e-5;
    const SpaceGrid g{0.0, 1.0, nodes};
    DirichletProblem prob{g, std::vector<double>(nodes, 0.0), ph,
                          sample_expansion(state, g)};
    const double dt = s.quick ? 5e-5 : 2e-5;
    CrankNicolson cn(prob, dt);
    const std::size_t steps = s.quick ? 400 : 1500;
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      cn.step();
      const double t = double(i + 1) * dt;
      const double series = boundary_flux(state, t, Wall::left);
      err2 += (cn.flux_left() - series) * (cn.flux_left() - series);
      ref2 += series * series;
    }
    const double rel = std::sqrt(err2 / ref2);
    r.checks.push_back({"cn-flux-vs-series", rel, bound, rel < bound});
  }

  // 3. sliced propagator vs CN interior evolution. The restricted-interval
  // composition approaches the hard-wall evolution like dt^(1/2) (wall-value
  // halving mechanism), so the suite checks the error against a calibrated
  // ceiling at two dt's, the observed convergence order, and the monotone
  // decay of the un-pinned wall value.
  {
    const std::size_t nodes = s.quick ? 601 : 1201;
    const double dt_coarse = s.quick ? 5e-3 : 2.5e-3;
    const double t_total = 0.1;
    const double ceiling = s.quick ? 0.22 : 0.16;
    const SpaceGrid g{0.0, 1.0, nodes};
    const ComplexField psi0 = sample_expansion(state, g);

    DirichletProblem prob{g, std::vector<double>(nodes, 0.0), ph, psi0};
    const double dt_ref = dt_coarse / 100.0;
    CrankNicolson cn(prob, dt_ref);
    const std::size_t ref_steps = static_cast<std::size_t>(t_total / dt_ref + 0.5);
    for (std::size_t i = 0; i < ref_steps; ++i) cn.step();
    const std::vector<cdouble>& ref = cn.values();

    auto slice_error = [&](double dt, double& wall_out) {
      const std::size_t slices = static_cast<std::size_t>(t_total / dt + 0.5);
      SliceKernel kernel{dt, g, 1e-3, ph};
      const ComplexField sliced = feynman_slice_propagate(kernel, psi0, slices);
      wall_out = std::abs(sliced.values.front());
      double diff2 = 0.0, ref2 = 0.0;
      // interior comparison: the sliced walls vanish only in the dt -> 0 limit
      for (std::size_t i = 1; i + 1 < sliced.values.size(); ++i) {
        diff2 += std::norm(sliced.values[i] - ref[i]);
        ref2 += std::norm(ref[i]);
      }
      return std::sqrt(diff2 / ref2);
    };
    double wall_coarse = 0.0, wall_fine = 0.0;
    const double err_coarse = slice_error(dt_coarse, wall_coarse);
    const double err_fine = slice_error(0.5 * dt_coarse, wall_fine);
    const double order_ratio = err_fine / err_coarse;   // ~2^-0.5 expected
    const double wall_ratio = wall_fine / wall_coarse;  // < 1 expected
    r.checks.push_back({"slice-vs-cn-error", err_fine, ceiling, err_fine < ceiling});
    r.checks.push_back({"slice-vs-cn-order", order_ratio, 0.95,
                        order_ratio > 0.55 && order_ratio < 0.95});
    r.checks.push_back({"slice-wall-decay", wall_ratio, 1.0, wall_ratio < 1.0});
  }

  // 4. Fresnel moment limits
  {
    const double alpha = 1e6, eps = 1e-4;
    const double m0 = std::abs(fresnel_moment(0, alpha, 0.0, 1.0, 0.37, eps) -
                               cdouble(1.0, 0.0));
    const double m1 = std::abs(fresnel_moment(1, alpha, 0.0, 1.0, 0.37, eps));
    const double m2 = std::abs(fresnel_moment(2, alpha, 0.0, 1.0, 0.37, eps) -
                               cdouble(1.0, 0.0));
    const double edge = std::abs(fresnel_moment(0, alpha, 0.0, 1.0, 1.0, eps) -
                                 cdouble(0.5, 0.0));
    r.checks.push_back({"fresnel-interior-m0", m0, 1e-3, m0 < 1e-3});
    r.checks.push_back({"fresnel-interior-m1", m1, 1e-3, m1 < 1e-3});
    r.checks.push_back({"fresnel-interior-m2", m2, 1e-2, m2 < 1e-2});
    r.checks.push_back({"fresnel-boundary-m0", edge, 1e-3, edge < 1e-3});
  }

  for (const OracleCheck& c : r.checks)
    if (!c.passed) r.checks_passed = false;
  return r;
}

}  // namespace detail

inline RunResult execute(const Scenario& s) {
  RunResult r;
  switch (s.kind) {
    case Kind::box:
      r.tables.emplace_back("survival", detail::run_box(s));
      return r;
    case Kind::packet: {
      const GaussianPacketParams p(s.packet_width_a, s.packet_x0, s.packet_k0,
                                   s.physical);
      if (s.outputs.survival)
        r.tables.emplace_back("survival", detail::packet_survival(s, p));
      if (s.outputs.pattern)
        r.tables.emplace_back("pattern", detail::packet_mode_density(s, p));
      return r;
    }
    case Kind::slit:
      return detail::run_slit(s);
    case Kind::slit_lateral:
      return detail::run_slit_lateral(s);
    case Kind::oracle_check:
      return detail::run_oracle_check(s);
  }
  throw std::logic_error("unreachable scenario kind");
}

// every emitted value must be finite
inline void require_finite(const RunResult& r) {
  for (const auto& [name, table] : r.tables)
    for (const std::vector<double>& row : table.rows)
      for (double v : row)
        if (!is_finite(v))
          throw ConvergenceError("non-finite value in '" + name + "' output");
  for (const OracleCheck& c : r.checks)
    if (!is_finite(c.measured))
      throw ConvergenceError("non-finite measurement in check '" + c.name + "'");
}

inline std::string render_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out += ',';
    out += t.columns[c];
  }
  out += '\n';
  for (const std::vector<double>& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

inline json render_results_json(const Scenario& s, const RunResult& r,
                                std::optional<double> runtime_seconds) {
  json root;
  root["schema_version"] = 1;
  root["kind"] = s.kind_name;
  root["name"] = s.name;
  root["parameters"] = s.echo;
  root["conventions"] = {
      {"rate-convention",
       s.conv == RateConvention::pi_m ? "pi_m" : "two_pi_m"},
      {"wall-pattern",
       s.wall_mode == WallPatternMode::flux ? "flux" : "verbatim"},
      {"consistent-energies", s.consistent_energies}};
  root["tolerances"] = {{"abs_tol", s.abs_tol},
                        {"series-tolerance", s.series_tolerance}};
  if (runtime_seconds)
    root["runtime-seconds"] = *runtime_seconds;
  else
    root["runtime-seconds"] = nullptr;
  if (s.kind == Kind::oracle_check) {
    json checks = json::array();
    for (const OracleCheck& c : r.checks)
      checks.push_back({{"name", c.name},
                        {"measured", c.measured},
                        {"bound", c.bound},
                        {"passed", c.passed}});
    root["checks"] = checks;
    root["all-passed"] = r.checks_passed;
  } else {
    json series;
    for (const auto& [name, table] : r.tables) {
      json t;
      t["columns"] = table.columns;
      json rows = json::array();
      for (const std::vector<double>& row : table.rows) rows.push_back(row);
      t["rows"] = rows;
      series[name] = t;
    }
    root["series"] = series;
  }
  return root;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << content;
  f.flush();
  if (!f) throw IoError("write failed for " + path.string());
}

// format: "csv", "json", or "" for both
inline std::vector<std::string> write_outputs(const Scenario& s,
                                              const RunResult& r,
                                              const std::filesystem::path& out_dir,
                                              const std::string& format,
                                              std::optional<double> runtime_seconds) {
  require_finite(r);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());
  std::vector<std::string> written;
  if (format != "json" && s.kind != Kind::oracle_check) {
    for (const auto& [name, table] : r.tables) {
      const std::filesystem::path p = out_dir / (name + ".csv");
      write_file(p, render_csv(table));
      written.push_back(p.string());
    }
  }
  if (format != "csv") {
    const json results = render_results_json(s, r, runtime_seconds);
    const std::filesystem::path p =
        out_dir / (s.kind == Kind::oracle_check ? "oracle_report.json"
                                                : "results.json");
    write_file(p, results.dump(2) + "\n");
    written.push_back(p.string());
  }
  return written;
}

}  // namespace qabsorb::cli
