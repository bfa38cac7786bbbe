#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "grad2/cli.hpp"

namespace grad2::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kCommands{"simulate", "sweep",    "basin",  "decay",
                                         "critical", "conserve", "verify", "reproduce"};

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw InputError(field + ": " + what);
}

double parse_real(const std::string& text, const std::string& field) {
  std::string s = text;
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) fail(field, "malformed number '" + text + "'");
  if (!std::isfinite(v)) fail(field, "value must be finite");
  return v;
}

Vec parse_reals(const std::string& text, const std::string& field) {
  Vec out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(parse_real(cell, field));
  if (out.empty() || (!text.empty() && text.back() == ','))
    fail(field, "expected a comma-separated list of reals, got '" + text + "'");
  return out;
}

std::size_t parse_count(const std::string& text, const std::string& field) {
  const double v = parse_real(text, field);
  if (v < 0.0 || v != std::floor(v) || v > 1e9) fail(field, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

AxisGrid parse_axis(const std::string& text, const std::string& field) {
  std::stringstream in(text);
  std::string lo, hi, count, extra;
  if (!std::getline(in, lo, ':') || !std::getline(in, hi, ':') || !std::getline(in, count, ':') ||
      std::getline(in, extra))
    fail(field, "expected lo:hi:count, got '" + text + "'");
  return AxisGrid{parse_real(lo, field), parse_real(hi, field), parse_count(count, field)};
}

double positive(double v, const std::string& field) {
  if (!(v > 0.0)) fail(field, "must be positive");
  return v;
}

// ---------------------------------------------------------------------------
// JSON

double json_real(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "value must be finite");
  return v;
}

Vec json_reals(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  Vec out;
  for (const auto& e : j) out.push_back(json_real(e, field));
  return out;
}

std::string json_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string");
  return j.get<std::string>();
}

PotentialSpec json_potential(const json& j, const std::string& field) {
  PotentialSpec spec;
  if (j.is_string()) {
    spec.kind = j.get<std::string>();
    return spec;
  }
  if (!j.is_object()) fail(field, "expected a kind name or an object");
  for (const auto& [key, value] : j.items()) {
    const std::string sub = field + "." + key;
    if (key == "kind") {
      spec.kind = json_string(value, sub);
    } else if (key == "dimension") {
      spec.dimension = parse_count(std::to_string(json_real(value, sub)), sub);
    } else if (key == "params") {
      if (!value.is_object()) fail(sub, "expected an object of numbers");
      for (const auto& [pk, pv] : value.items()) spec.params[pk] = json_real(pv, sub + "." + pk);
    } else if (key == "inner") {
      spec.inner = std::make_shared<PotentialSpec>(json_potential(value, sub));
    } else if (key == "shift") {
      spec.shift = json_reals(value, sub);
    } else {
      fail(sub, "unknown key");
    }
  }
  return spec;
}

}  // namespace

// ---------------------------------------------------------------------------

Potential PotentialSpec::build(std::size_t dimension_hint) const {
  const std::size_t n = dimension > 0 ? dimension : std::max<std::size_t>(1, dimension_hint);
  if (kind == "shifted") {
    if (!inner) fail("potential.inner", "required for kind 'shifted'");
    if (shift.empty()) fail("potential.shift", "required for kind 'shifted'");
    if (!params.empty()) fail("potential.params", "kind 'shifted' takes no params");
    try {
      return Potential::shifted(inner->build(shift.size()), shift);
    } catch (const InputError& e) {
      fail("potential", e.what());
    }
  }
  if (inner || !shift.empty()) {
    // A plain kind with a shift is shorthand for Shifted(kind, shift).
    if (inner) fail("potential.inner", "only valid for kind 'shifted'");
    PotentialSpec base = *this;
    base.shift.clear();
    try {
      return Potential::shifted(base.build(shift.size()), shift);
    } catch (const InputError& e) {
      fail("potential", e.what());
    }
  }
  try {
    return Potential::from_name(kind, n, params);
  } catch (const InputError& e) {
    fail("potential", e.what());
  }
}

std::size_t RunConfig::dimension() const {
  if (potential.dimension > 0) return potential.dimension;
  if (!potential.shift.empty()) return potential.shift.size();
  if (!ic.empty()) return std::max<std::size_t>(1, ic.size() / 2);
  if (!u_star.empty()) return u_star.size();
  if (!grid.empty()) return std::max<std::size_t>(1, grid.size() / 2);
  return 1;
}

void RunConfig::validate() const {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    fail("command", command.empty() ? "missing (expected one of simulate, sweep, basin, decay, "
                                      "critical, conserve, verify, reproduce)"
                                    : "unknown command '" + command + "'");
  if (command == "reproduce") {
    if (figure != "all" &&
        std::find(kFigureIds.begin(), kFigureIds.end(), figure) == kFigureIds.end())
      fail("figure", "unknown figure id '" + figure + "'");
    return;
  }

  const std::size_t n = dimension();
  const Potential p = potential.build(n);
  if (p.dimension() != n) fail("potential", "dimension disagrees with the initial condition");
  if (!(a >= 0.0) || !std::isfinite(a)) fail("a", "damping must be a finite number >= 0");
  if (!u_star.empty() && u_star.size() != n)
    fail("ustar", "expected " + std::to_string(n) + " values");
  try {
    SystemConfig(p, a, u_star);
  } catch (const InputError& e) {
    fail("ustar", e.what());
  }
  if (!(t_max > 0.0) || !std::isfinite(t_max)) fail("t-max", "must be a positive finite number");
  try {
    settings.validate();
  } catch (const InputError& e) {
    fail("settings", e.what());
  }
  if (!(h > 0.0) || !std::isfinite(h)) fail("h", "must be a positive finite number");
  if (method == Method::kLeapfrog && a != 0.0) fail("method", "leapfrog requires a = 0");

  const bool needs_ic = command != "basin";
  if (needs_ic) {
    if (ic.empty()) fail("ic", "required for '" + command + "'");
    if (ic.size() != 2 * n)
      fail("ic", "expected " + std::to_string(2 * n) + " values (positions then velocities)");
  }
  if (command == "sweep") {
    if (a_values.empty()) fail("a-values", "required for 'sweep'");
    for (double v : a_values)
      if (!(v >= 0.0)) fail("a-values", "every damping value must be >= 0");
  }
  if (command == "basin") {
    if (!(a > 0.0)) fail("a", "basin maps need a > 0");
    if (!grid.empty() && grid.size() != 2 * n)
      fail("grid", "expected " + std::to_string(2 * n) + " axes (positions then velocities)");
    for (const auto& ax : grid) {
      if (ax.count == 0) fail("grid", "axis count must be positive");
      if (!(ax.hi >= ax.lo)) fail("grid", "axis needs lo <= hi");
    }
    positive(conv_tol, "conv-tol");
  }
  if (command == "critical") {
    if (!(a_lo >= 0.0 && a_lo < a_hi)) fail("a-range", "expected 0 <= lo < hi");
    positive(tol, "tol");
  }
  if (command == "decay" && !(a > 0.0)) fail("a", "decay fits need a > 0");
  if (command == "conserve") {
    if (a != 0.0) fail("a", "conserve requires a = 0");
    positive(conv_tol, "conv-tol");
  }
}

void apply_json(RunConfig& c, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("config", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) fail("config", "top level must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "command") c.command = json_string(v, key);
    else if (key == "figure") c.figure = json_string(v, key);
    else if (key == "potential") c.potential = json_potential(v, key);
    else if (key == "a") c.a = json_real(v, key);
    else if (key == "u_star") c.u_star = json_reals(v, key);
    else if (key == "ic") c.ic = json_reals(v, key);
    else if (key == "a_values") c.a_values = json_reals(v, key);
    else if (key == "grid") {
      if (!v.is_array()) fail(key, "expected an array of [lo, hi, count]");
      c.grid.clear();
      for (const auto& ax : v) {
        const Vec r = json_reals(ax, key);
        if (r.size() != 3) fail(key, "expected [lo, hi, count]");
        c.grid.push_back(AxisGrid{r[0], r[1], parse_count(std::to_string(r[2]), key)});
      }
    } else if (key == "a_range") {
      const Vec r = json_reals(v, key);
      if (r.size() != 2) fail(key, "expected [lo, hi]");
      c.a_lo = r[0];
      c.a_hi = r[1];
    } else if (key == "tol") c.tol = json_real(v, key);
    else if (key == "conv_tol") c.conv_tol = json_real(v, key);
    else if (key == "t_max") c.t_max = json_real(v, key);
    else if (key == "stride") c.settings.sample_stride = json_real(v, key);
    else if (key == "rel_tol") c.settings.rel_tol = json_real(v, key);
    else if (key == "abs_tol") c.settings.abs_tol = json_real(v, key);
    else if (key == "h_init") c.settings.h_init = json_real(v, key);
    else if (key == "h_min") c.settings.h_min = json_real(v, key);
    else if (key == "h_max") c.settings.h_max = json_real(v, key);
    else if (key == "method") {
      try {
        c.method = parse_method(json_string(v, key));
      } catch (const InputError& e) {
        fail(key, e.what());
      }
    } else if (key == "h") c.h = json_real(v, key);
    else if (key == "out") c.out_dir = json_string(v, key);
    else if (key == "plot") {
      if (!v.is_boolean()) fail(key, "expected true or false");
      c.plot = v.get<bool>();
    } else if (key == "threads") c.threads = parse_count(std::to_string(json_real(v, key)), key);
    else fail(key, "unknown config key");
  }
}

// ---------------------------------------------------------------------------

namespace {

// CLI11 would read "-1.5,0.5" after "--ic" as a short option; glue such
// values onto their flag.
std::vector<std::string> normalise_args(int argc, const char* const* argv) {
  static const std::set<std::string> valued{
      "--potential", "--param", "--a",   "--ustar",   "--ic",       "--t-max",    "--stride",
      "--rel-tol",   "--abs-tol", "--h-max", "--method", "--h",     "--out",      "--threads",
      "--config",    "--a-values", "--grid", "--a-range", "--tol",  "--conv-tol", "--figure",
      "--shift",     "--dim"};
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (valued.count(arg) && i + 1 < argc) {
      const std::string next = argv[i + 1];
      if (next.size() > 1 && next[0] == '-' &&
          (std::isdigit(static_cast<unsigned char>(next[1])) || next[1] == '.')) {
        out.push_back(arg + "=" + next);
        ++i;
        continue;
      }
    }
    out.push_back(std::move(arg));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RunConfig parse_command_line(int argc, const char* const* argv,
                             std::optional<std::string> env_threads) {
  CLI::App app{"Damped second-order gradient systems: simulation and analysis", "grad2"};
  app.require_subcommand(0, 1);

  std::string config_path, potential, a, ustar, ic, t_max, stride, rel_tol, abs_tol, h_max, method,
      h, out, threads, a_values, a_range, tol, conv_tol, figure, shift, dim;
  std::vector<std::string> params, grid;
  bool plot = true;

  const auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print this help and exit");
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    sub->add_option("--potential", potential,
                    "quadratic, double_well, quartic_symmetric, ginzburg_landau, exponential");
    sub->add_option("--param", params, "potential parameter k=v (repeatable)");
    sub->add_option("--shift", shift, "shift the potential by a vector (csv reals)");
    sub->add_option("--dim", dim, "dimension N (default: inferred from --ic)");
    sub->add_option("--a", a, "damping coefficient a >= 0");
    sub->add_option("--ustar", ustar, "equilibrium u* (csv reals, default origin)");
    sub->add_option("--ic", ic, "initial state: positions then velocities (csv reals)");
    sub->add_option("--t-max", t_max, "final time");
    sub->add_option("--stride", stride, "output sample spacing");
    sub->add_option("--rel-tol", rel_tol, "adaptive relative tolerance");
    sub->add_option("--abs-tol", abs_tol, "adaptive absolute tolerance");
    sub->add_option("--h-max", h_max, "adaptive maximum step");
    sub->add_option("--method", method, "adaptive, rk4 or leapfrog");
    sub->add_option("--h", h, "step for rk4 and leapfrog");
    sub->add_option("--out", out, "output directory");
    sub->add_flag("--plot,!--no-plot", plot, "write SVG phase portraits");
    sub->add_option("--threads", threads, "worker threads (0 = all cores; env GRAD2_THREADS)");
    sub->add_option("--a-values", a_values, "sweep damping values (csv reals)");
    sub->add_option("--grid", grid, "basin axis lo:hi:count (repeat per axis, positions first)");
    sub->add_option("--a-range", a_range, "critical search bracket lo,hi");
    sub->add_option("--tol", tol, "critical search bracket width");
    sub->add_option("--conv-tol", conv_tol, "convergence / return tolerance");
  };

  add_common(&app);
  std::vector<CLI::App*> subs;
  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, "");
    add_common(sub);
    if (name == "reproduce") {
      sub->add_option("figure,--figure", figure, "figure id or 'all'");
    }
    subs.push_back(sub);
  }
  app.get_subcommand("simulate")->description("integrate one trajectory");
  app.get_subcommand("sweep")->description("damping sweep from one initial condition");
  app.get_subcommand("basin")->description("basin-of-attraction map over a phase grid");
  app.get_subcommand("decay")->description("fit the exponential decay rate");
  app.get_subcommand("critical")->description("bisect for the critical damping");
  app.get_subcommand("conserve")->description("conservative case: closed orbits and drift");
  app.get_subcommand("verify")->description("check the Lyapunov and energy statements");
  app.get_subcommand("reproduce")->description("regenerate the reference figures");

  std::vector<std::string> args = normalise_args(argc, argv);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, err;
    if (app.exit(e, o, err) == 0) throw HelpRequested{o.str()};
    std::string msg = e.what();
    throw InputError("arguments: " + msg);
  }

  const auto given = [&](const std::string& name) {
    std::size_t n = app.count(name);
    for (CLI::App* sub : subs) n += sub->count(name);
    return n > 0;
  };

  RunConfig c;
  if (given("--config")) apply_json(c, read_file(config_path));
  for (CLI::App* sub : subs)
    if (sub->parsed()) c.command = sub->get_name();

  if (given("--potential")) {
    c.potential = PotentialSpec{};
    c.potential.kind = potential;
  }
  for (const auto& kv : params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) fail("param", "expected k=v, got '" + kv + "'");
    c.potential.params[kv.substr(0, eq)] = parse_real(kv.substr(eq + 1), "param " + kv.substr(0, eq));
  }
  if (given("--shift")) c.potential.shift = parse_reals(shift, "shift");
  if (given("--dim")) c.potential.dimension = parse_count(dim, "dim");
  if (given("--a")) c.a = parse_real(a, "a");
  if (given("--ustar")) c.u_star = parse_reals(ustar, "ustar");
  if (given("--ic")) c.ic = parse_reals(ic, "ic");
  if (given("--t-max")) c.t_max = parse_real(t_max, "t-max");
  if (given("--stride")) c.settings.sample_stride = parse_real(stride, "stride");
  if (given("--rel-tol")) c.settings.rel_tol = parse_real(rel_tol, "rel-tol");
  if (given("--abs-tol")) c.settings.abs_tol = parse_real(abs_tol, "abs-tol");
  if (given("--h-max")) c.settings.h_max = parse_real(h_max, "h-max");
  if (given("--method")) {
    try {
      c.method = parse_method(method);
    } catch (const InputError& e) {
      fail("method", e.what());
    }
  }
  if (given("--h")) c.h = parse_real(h, "h");
  if (given("--out")) c.out_dir = out;
  if (given("--plot")) c.plot = plot;
  if (given("--threads")) {
    c.threads = parse_count(threads, "threads");
  } else if (env_threads && !env_threads->empty()) {
    c.threads = parse_count(*env_threads, "GRAD2_THREADS");
  }
  if (given("--a-values")) c.a_values = parse_reals(a_values, "a-values");
  if (given("--grid")) {
    c.grid.clear();
    for (const auto& g : grid) c.grid.push_back(parse_axis(g, "grid"));
  }
  if (given("--a-range")) {
    const Vec r = parse_reals(a_range, "a-range");
    if (r.size() != 2) fail("a-range", "expected lo,hi");
    c.a_lo = r[0];
    c.a_hi = r[1];
  }
  if (given("--tol")) c.tol = parse_real(tol, "tol");
  if (given("--conv-tol")) c.conv_tol = parse_real(conv_tol, "conv-tol");
  if (!figure.empty()) c.figure = figure;
  return c;
}

}  // namespace grad2::cli
