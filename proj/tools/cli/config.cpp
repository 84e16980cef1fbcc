#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace smallgain::cli {

namespace {

ConfigParseError error_at(const YAML::Node& node, const std::string& message) {
  const YAML::Mark m = node.Mark();
  if (m.is_null() || m.line < 0) return {message, 0, 0};
  return {message, m.line + 1, m.column + 1};
}

void expect_map(const YAML::Node& node, const std::string& where) {
  if (!node.IsMap()) throw error_at(node, "`" + where + "` must be a mapping");
}

void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed, const std::string& where) {
  expect_map(node, where);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw error_at(kv.first, "unknown key `" + key + "` in `" + where + "`");
  }
}

const YAML::Node require(const YAML::Node& parent, const char* key, const std::string& where) {
  const YAML::Node n = parent[key];
  if (!n) throw error_at(parent, "missing key `" + std::string(key) + "` in `" + where + "`");
  return n;
}

double as_double(const YAML::Node& n, const std::string& what) {
  try {
    const double v = n.as<double>();
    if (!std::isfinite(v)) throw error_at(n, "`" + what + "` must be finite");
    return v;
  } catch (const YAML::BadConversion&) {
    throw error_at(n, "`" + what + "` must be a number");
  }
}

std::uint64_t as_count(const YAML::Node& n, const std::string& what) {
  try {
    const auto v = n.as<long long>();
    if (v < 0) throw error_at(n, "`" + what + "` must be nonnegative");
    return static_cast<std::uint64_t>(v);
  } catch (const YAML::BadConversion&) {
    throw error_at(n, "`" + what + "` must be an integer");
  }
}

double get_or(const YAML::Node& parent, const char* key, double fallback, const std::string& where) {
  const YAML::Node n = parent[key];
  return n ? as_double(n, where + "." + key) : fallback;
}

Interval as_interval(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence() || n.size() != 2) throw error_at(n, "`" + what + "` must be a two-element list [lo, hi]");
  const double lo = as_double(n[0], what);
  const double hi = as_double(n[1], what);
  if (!(lo <= hi)) throw error_at(n, "`" + what + "` needs lo <= hi");
  return {lo, hi};
}

std::vector<std::pair<double, double>> as_points(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) throw error_at(n, "`" + what + "` must be a list of [x, y] pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto& p : n) {
    if (!p.IsSequence() || p.size() != 2) throw error_at(p, "`" + what + "` entries must be [x, y] pairs");
    out.emplace_back(as_double(p[0], what), as_double(p[1], what));
  }
  return out;
}

// Runs a factory, turning library argument errors into located config errors.
template <class F>
auto located(const YAML::Node& n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw error_at(n, e.what());
  }
}

// Single-key mapping {kind: body} or plain scalar `kind`.
std::pair<std::string, YAML::Node> tagged(const YAML::Node& n, const std::string& where) {
  if (n.IsScalar()) return {n.as<std::string>(), YAML::Node()};
  if (!n.IsMap() || n.size() != 1) throw error_at(n, "`" + where + "` must be a single-key mapping such as { kind: ... }");
  const auto it = n.begin();
  return {it->first.as<std::string>(), it->second};
}

ScalarFunction parse_function(const YAML::Node& n, const std::string& where) {
  const auto [kind, body] = tagged(n, where);
  if (kind == "affine") {
    check_keys(body, {"slope", "intercept"}, where + ".affine");
    return located(body, [&] {
      return ScalarFunction::affine(as_double(require(body, "slope", where), "slope"),
                                    get_or(body, "intercept", 0.0, where));
    });
  }
  if (kind == "hill") {
    check_keys(body, {"vmax", "k", "p", "anchor", "reflected"}, where + ".hill");
    const bool reflected = body["reflected"] ? body["reflected"].as<bool>() : false;
    return located(body, [&] {
      return ScalarFunction::hill(as_double(require(body, "vmax", where), "vmax"),
                                  as_double(require(body, "k", where), "k"), get_or(body, "p", 1.0, where),
                                  get_or(body, "anchor", 0.0, where), reflected);
    });
  }
  if (kind == "table") {
    return located(body, [&] { return ScalarFunction::table(as_points(body, where + ".table")); });
  }
  throw error_at(n, "unknown function kind `" + kind + "` in `" + where + "` (affine, hill, table)");
}

MemorylessMap parse_memoryless(const YAML::Node& n, const std::string& where) {
  const auto [kind, body] = tagged(n, where);
  if (kind == "identity") return MemorylessMap::identity();
  if (kind == "scale") return located(body, [&] { return MemorylessMap::scale(as_double(body, where + ".scale")); });
  if (kind == "inhibition") {
    check_keys(body, {"mu", "k"}, where + ".inhibition");
    return located(body, [&] {
      return MemorylessMap::inhibition(as_double(require(body, "mu", where), "mu"),
                                       as_double(require(body, "k", where), "k"));
    });
  }
  if (kind == "table") {
    return located(body, [&] { return MemorylessMap::table(as_points(body, where + ".table")); });
  }
  throw error_at(n, "unknown memoryless kind `" + kind + "` (identity, scale, inhibition, table)");
}

GainFunction parse_gain_node(const YAML::Node& n, const std::string& where) {
  const auto [kind, body] = tagged(n, where);
  if (kind == "zero") return GainFunction::zero();
  if (kind == "identity") return GainFunction::identity();
  if (kind == "linear") return located(body, [&] { return GainFunction::linear(as_double(body, where + ".linear")); });
  if (kind == "power_law") {
    check_keys(body, {"coeff", "exponent"}, where + ".power_law");
    return located(body, [&] {
      return GainFunction::power_law(as_double(require(body, "coeff", where), "coeff"),
                                     as_double(require(body, "exponent", where), "exponent"));
    });
  }
  if (kind == "piecewise") {
    return located(body, [&] { return GainFunction::piecewise_linear(as_points(body, where + ".piecewise")); });
  }
  if (kind == "composed") {
    if (!body.IsSequence() || body.size() == 0) throw error_at(body, "`composed` must be a nonempty list of gains");
    std::vector<GainFunction> factors;
    for (const auto& f : body) factors.push_back(parse_gain_node(f, where + ".composed"));
    return GainFunction::composed(std::move(factors));
  }
  throw error_at(n, "unknown gain kind `" + kind + "` (linear, power_law, piecewise, composed, zero, identity)");
}

StageSpec parse_stage(const YAML::Node& n, std::size_t index) {
  const std::string where = "cascade.stages[" + std::to_string(index) + "]";
  const auto [kind, body] = tagged(n, where);
  if (kind == "delay") {
    const double tau = as_double(body, where + ".delay");
    if (tau < 0.0) throw error_at(body, "delay must be nonnegative");
    return DelayStage{tau};
  }
  if (kind == "memoryless") return MemorylessStage{parse_memoryless(body, where + ".memoryless")};
  if (kind == "ode") {
    check_keys(body, {"interval", "alpha", "beta"}, where + ".ode");
    const Interval iv = as_interval(require(body, "interval", where), where + ".interval");
    ScalarFunction alpha = parse_function(require(body, "alpha", where), where + ".alpha");
    ScalarFunction beta = parse_function(require(body, "beta", where), where + ".beta");
    try {
      return OdeStage{ScalarMonotoneOde(std::move(alpha), std::move(beta), iv)};
    } catch (const InvalidStageError& e) {
      throw InvalidStageError(error_at(n, e.what()).what(), static_cast<int>(index));
    }
  }
  throw error_at(n, "unknown stage kind `" + kind + "` (ode, delay, memoryless)");
}

InputSpec parse_input(const YAML::Node& n) {
  const auto [kind, body] = tagged(n, "input");
  InputSpec in;
  if (kind == "constant") {
    in.kind = InputSpec::Kind::constant;
    in.value = as_double(body, "input.constant");
  } else if (kind == "step") {
    check_keys(body, {"before", "after", "at"}, "input.step");
    in.kind = InputSpec::Kind::step;
    in.value = as_double(require(body, "before", "input.step"), "before");
    in.after = as_double(require(body, "after", "input.step"), "after");
    in.at = as_double(require(body, "at", "input.step"), "at");
  } else if (kind == "sine") {
    check_keys(body, {"offset", "amplitude", "omega"}, "input.sine");
    in.kind = InputSpec::Kind::sine;
    in.value = as_double(require(body, "offset", "input.sine"), "offset");
    in.amplitude = as_double(require(body, "amplitude", "input.sine"), "amplitude");
    in.omega = get_or(body, "omega", 1.0, "input.sine");
  } else {
    throw error_at(n, "unknown input kind `" + kind + "` (constant, step, sine)");
  }
  return in;
}

}  // namespace

Signal InputSpec::sample(const SimConfig& config) const {
  const std::size_t count = config.steps() + 1;
  switch (kind) {
    case Kind::constant:
      return Signal::scalar(0.0, config.dt, std::vector<double>(count, value));
    case Kind::step:
      return Signal::sample(0.0, config.dt, count, [this](double t) { return t < at ? value : after; });
    case Kind::sine:
      return Signal::sample(0.0, config.dt, count,
                            [this](double t) { return value + amplitude * std::sin(omega * t); });
  }
  throw ConfigError("unknown input kind");
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || root.IsNull()) throw ConfigParseError("configuration document is empty", 0, 0);
  check_keys(root, {"cascade", "simulation", "mode", "contraction", "lipschitz_grid", "input", "histories",
                    "validation", "gain_check", "output_dir", "seed"},
             "<root>");

  RunConfig cfg;
  cfg.digest = fnv1a_hex(text);

  const YAML::Node cascade = require(root, "cascade", "<root>");
  check_keys(cascade, {"stages", "feedback"}, "cascade");
  const YAML::Node stages = require(cascade, "stages", "cascade");
  if (!stages.IsSequence() || stages.size() == 0) throw error_at(stages, "`cascade.stages` must be a nonempty list");
  for (std::size_t i = 0; i < stages.size(); ++i) cfg.cascade.stages.push_back(parse_stage(stages[i], i));
  if (const YAML::Node fb = cascade["feedback"]) {
    check_keys(fb, {"mu", "k", "tau"}, "cascade.feedback");
    cfg.cascade.feedback = Feedback{as_double(require(fb, "mu", "cascade.feedback"), "mu"),
                                    as_double(require(fb, "k", "cascade.feedback"), "k"),
                                    get_or(fb, "tau", 0.0, "cascade.feedback")};
  }
  try {
    cfg.cascade.validate();
  } catch (const ConfigError& e) {
    throw error_at(cascade, e.what());
  }

  if (const YAML::Node sim = root["simulation"]) {
    check_keys(sim, {"dt", "horizon", "clamp_tol"}, "simulation");
    cfg.sim.dt = get_or(sim, "dt", cfg.sim.dt, "simulation");
    cfg.sim.horizon = get_or(sim, "horizon", cfg.sim.horizon, "simulation");
    cfg.sim.clamp_tol = get_or(sim, "clamp_tol", cfg.sim.clamp_tol, "simulation");
    try {
      cfg.sim.validate();
    } catch (const ConfigError& e) {
      throw error_at(sim, e.what());
    }
  }
  if (const YAML::Node mode = root["mode"]) {
    try {
      cfg.mode = parse_gain_mode(mode.as<std::string>());
    } catch (const ConfigError& e) {
      throw error_at(mode, e.what());
    }
  }
  if (const YAML::Node c = root["contraction"]) {
    check_keys(c, {"r_min", "r_max", "points_per_decade", "margin"}, "contraction");
    cfg.certify.grid.r_min = get_or(c, "r_min", cfg.certify.grid.r_min, "contraction");
    cfg.certify.grid.r_max = get_or(c, "r_max", cfg.certify.grid.r_max, "contraction");
    if (c["points_per_decade"]) {
      cfg.certify.grid.points_per_decade = static_cast<int>(as_count(c["points_per_decade"], "points_per_decade"));
    }
    cfg.certify.margin = get_or(c, "margin", cfg.certify.margin, "contraction");
  }
  if (const YAML::Node lg = root["lipschitz_grid"]) {
    cfg.certify.lipschitz_grid = static_cast<int>(as_count(lg, "lipschitz_grid"));
    if (cfg.certify.lipschitz_grid < 2) throw error_at(lg, "`lipschitz_grid` must be at least 2");
  }
  if (const YAML::Node in = root["input"]) cfg.input = parse_input(in);
  if (const YAML::Node h = root["histories"]) {
    if (!h.IsSequence()) throw error_at(h, "`histories` must be a list of constants, one per ODE stage");
    std::vector<double> values;
    for (const auto& v : h) values.push_back(as_double(v, "histories"));
    if (values.size() != cfg.cascade.ode_indices().size()) {
      throw error_at(h, "`histories` needs one value per ODE stage");
    }
    cfg.histories = values;
  }
  if (const YAML::Node v = root["validation"]) {
    check_keys(v, {"runs", "tol", "spread", "tail_fraction"}, "validation");
    if (v["runs"]) cfg.validation.runs = as_count(v["runs"], "validation.runs");
    cfg.validation.tol = get_or(v, "tol", cfg.validation.tol, "validation");
    cfg.validation.spread = get_or(v, "spread", cfg.validation.spread, "validation");
    cfg.validation.tail_fraction = get_or(v, "tail_fraction", cfg.validation.tail_fraction, "validation");
  }
  if (const YAML::Node g = root["gain_check"]) {
    check_keys(g, {"inputs", "pairs", "slack", "incremental_slack", "input_range", "claimed"}, "gain_check");
    if (g["inputs"]) cfg.gain_check.inputs = as_count(g["inputs"], "gain_check.inputs");
    if (g["pairs"]) cfg.gain_check.pairs = as_count(g["pairs"], "gain_check.pairs");
    cfg.gain_check.slack = get_or(g, "slack", cfg.gain_check.slack, "gain_check");
    cfg.gain_check.incremental_slack = get_or(g, "incremental_slack", cfg.gain_check.incremental_slack, "gain_check");
    if (g["input_range"]) cfg.gain_check.input_range = as_interval(g["input_range"], "gain_check.input_range");
    if (g["claimed"]) cfg.gain_check.claimed = parse_gain_node(g["claimed"], "gain_check.claimed");
  }
  if (const YAML::Node o = root["output_dir"]) cfg.output_dir = o.as<std::string>();
  if (const YAML::Node s = root["seed"]) cfg.seed = as_count(s, "seed");
  cfg.sim.seed = cfg.seed;
  cfg.certify.config_digest = cfg.digest;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file `" + path.string() + "`");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

GainFunction parse_gain(const std::string& text) {
  YAML::Node n;
  try {
    n = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  return parse_gain_node(n, "gain");
}

}  // namespace smallgain::cli
