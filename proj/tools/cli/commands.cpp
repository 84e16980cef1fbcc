#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "emit.hpp"

namespace smallgain::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutDirEnv = "SMALLGAIN_OUT_DIR";

fs::path output_dir(const std::string& flag, const RunConfig& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  if (cfg.output_dir) return *cfg.output_dir;
  return ".";
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

RunConfig load(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.sim.seed = *c.seed;
  }
  return cfg;
}

const ScalarMonotoneOde& ode_at(const RunConfig& cfg, int stage) {
  const auto count = cfg.cascade.ode_indices().size();
  if (stage < 1 || static_cast<std::size_t>(stage) > count) {
    throw ConfigError("--stage must name an ODE stage between 1 and " + std::to_string(count));
  }
  return cfg.cascade.ode(static_cast<std::size_t>(stage - 1));
}

std::vector<std::string> echo_lines(const RunConfig& cfg, const std::string& loop) {
  return {
      std::string("tool ") + kToolVersion,
      "config_digest " + cfg.digest,
      "loop " + loop,
      "dt " + format_number(cfg.sim.dt),
      "horizon " + format_number(cfg.sim.horizon),
      "clamp_tol " + format_number(cfg.sim.clamp_tol),
      "seed " + std::to_string(cfg.seed),
  };
}

std::string timestamp_line() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream os;
  os << "# generated " << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Spread of per-run limits across an ensemble; nullopt if any run fails to settle.
std::optional<double> ensemble_spread(const CascadeSpec& cascade, const SimConfig& sim, const ValidationSettings& v) {
  const auto runs = ensemble(cascade, sim, v.runs);
  const std::size_t n_state = runs.front().states.size();
  std::vector<double> lo(n_state, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n_state, -std::numeric_limits<double>::infinity());
  for (const auto& run : runs) {
    for (std::size_t j = 0; j < n_state; ++j) {
      const auto lim = limit_value(run.states[j], v.tol, v.tail_fraction);
      if (!lim) return std::nullopt;
      lo[j] = std::min(lo[j], lim->front());
      hi[j] = std::max(hi[j], lim->front());
    }
  }
  double spread = 0.0;
  for (std::size_t j = 0; j < n_state; ++j) spread = std::max(spread, hi[j] - lo[j]);
  return spread;
}

// ---------------------------------------------------------------------------

int cmd_certify(const Common& common, const std::string& mode_text, const std::string& out_flag, bool validate,
                std::ostream& out, std::ostream& err) {
  RunConfig cfg = load(common);
  const GainMode mode = mode_text.empty() ? cfg.mode : parse_gain_mode(mode_text);
  const Certificate cert = certify(cfg.cascade, mode, cfg.certify);

  Json doc;
  doc["certificate"] = certificate_json(cert);
  bool alarm = false;
  if (validate) {
    if (!cert.contraction.holds) {
      err << "warning: contraction fails; skipping validation\n";
    } else {
      ValidationOptions vo;
      vo.n_runs = cfg.validation.runs;
      vo.tol = cfg.validation.tol;
      vo.tail_fraction = cfg.validation.tail_fraction;
      const auto report = validate_certificate(cert, cfg.cascade, cfg.sim, vo);
      doc["validation"] = validation_json(report, cfg.validation.spread);
      alarm = !report.all_converged || !report.predictions_match || !(report.max_limit_spread < cfg.validation.spread);
    }
  }

  fs::path path = out_flag.empty() ? output_dir("", cfg) / "certificate.json" : fs::path(out_flag);
  write_file_atomic(path, doc.dump(2) + "\n");
  out << "certificate: " << path.string() << "\n";
  out << "mode " << to_string(mode) << ", loop factor " << format_number(cert.loop_factor) << ", "
      << (cert.contraction.holds ? "contraction holds" : "contraction fails");
  if (cert.k_max) out << ", k_max " << format_number(*cert.k_max);
  if (cert.contraction.witness) out << ", witness r = " << format_number(*cert.contraction.witness);
  out << "\n";
  if (alarm) {
    err << "error: validation alarm: certified loop did not settle on a single predicted limit\n";
    return kExitError;
  }
  return cert.contraction.holds ? kExitOk : kExitCheckFailed;
}

int cmd_simulate(const Common& common, bool open, bool closed, std::size_t runs, const std::string& out_flag,
                 std::ostream& out, std::ostream& err) {
  RunConfig cfg = load(common);
  if (open && closed) throw ConfigError("--open and --closed are mutually exclusive");
  const bool closed_loop = closed || (!open && cfg.cascade.feedback.has_value());
  if (closed_loop && !cfg.cascade.feedback) throw ConfigError("--closed needs `cascade.feedback` in the config");
  if (!closed_loop && !cfg.input) throw ConfigError("open-loop simulation needs an `input` block in the config");
  if (runs == 0) throw ConfigError("--runs must be at least 1");

  std::vector<HistoryFunction> histories;
  if (cfg.histories && runs == 1) {
    histories.push_back(constant_histories(*cfg.histories));
  } else {
    histories = draw_constant_histories(cfg.cascade, cfg.seed, runs);
  }
  std::vector<Trajectory> trajs;
  if (closed_loop && !(cfg.histories && runs == 1)) {
    trajs = ensemble(cfg.cascade, cfg.sim, runs);
  } else {
    for (const auto& h : histories) {
      trajs.push_back(closed_loop ? simulate_closed(cfg.cascade, h, cfg.sim)
                                  : simulate_open(cfg.cascade, cfg.input->sample(cfg.sim), h, cfg.sim));
    }
  }

  const double tol = cfg.validation.tol;
  const double tf = cfg.validation.tail_fraction;
  const std::size_t n_state = trajs.front().states.size();
  std::ostringstream summary;
  summary << "run";
  for (std::size_t j = 0; j < n_state; ++j) summary << ",x" << (j + 1) << "_limit";
  summary << ",omega_limit";
  for (std::size_t j = 0; j < n_state; ++j) summary << ",x" << (j + 1) << "_amplitude";
  summary << ",omega_amplitude\n";

  std::vector<double> lo(n_state + 1, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n_state + 1, -std::numeric_limits<double>::infinity());
  std::vector<bool> settled(n_state + 1, true);
  bool unsettled = false;
  for (std::size_t r = 0; r < trajs.size(); ++r) {
    std::vector<const Signal*> cols;
    for (const auto& s : trajs[r].states) cols.push_back(&s);
    cols.push_back(&trajs[r].effective_input);
    summary << r;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto lim = limit_value(*cols[c], tol, tf);
      if (lim) {
        summary << ',' << format_number(lim->front());
        lo[c] = std::min(lo[c], lim->front());
        hi[c] = std::max(hi[c], lim->front());
      } else {
        summary << ",none";
        settled[c] = false;
        unsettled = true;
      }
    }
    for (const auto* s : cols) summary << ',' << format_number(asymptotic_amplitude(*s, tf));
    summary << '\n';
  }
  summary << "spread";
  for (std::size_t c = 0; c <= n_state; ++c) {
    summary << ',' << (settled[c] ? format_number(hi[c] - lo[c]) : std::string("none"));
  }
  for (std::size_t c = 0; c <= n_state; ++c) summary << ',';
  summary << '\n';

  const fs::path dir = output_dir(out_flag, cfg);
  const auto echo = echo_lines(cfg, closed_loop ? "closed" : "open");
  for (std::size_t r = 0; r < trajs.size(); ++r) {
    std::ostringstream csv;
    auto lines = echo;
    lines.push_back("run " + std::to_string(r));
    write_trajectory_csv(csv, trajs[r], lines);
    std::ostringstream name;
    name << "run_" << std::setw(3) << std::setfill('0') << r << ".csv";
    write_file_atomic(dir / name.str(), csv.str());
  }
  write_file_atomic(dir / "summary.csv", summary.str());
  out << "runs: " << trajs.size() << ", output: " << dir.string() << "\n";
  if (unsettled) {
    err << "warning: some limits did not settle within tol " << format_number(tol)
        << " (reported as none); lengthen the horizon\n";
  }
  return kExitOk;
}

int cmd_sweep(const Common& common, const std::string& param, double from, double to, int steps,
              const std::string& out_flag, bool simulate, std::ostream& out) {
  RunConfig cfg = load(common);
  if (!cfg.cascade.feedback) throw ConfigError("sweep needs `cascade.feedback` in the config");
  if (param != "k" && param != "mu") throw ConfigError("--param must be `k` or `mu`");
  if (steps < 1) throw ConfigError("--steps must be at least 1");

  std::ostringstream table;
  table << timestamp_line() << "\n";
  table << "# tool " << kToolVersion << ", config_digest " << cfg.digest << ", seed " << cfg.seed << "\n";
  table << param << ",global_holds,relative_holds,global_loop_factor,relative_loop_factor";
  if (simulate) table << ",spread";
  table << "\n";
  for (int i = 0; i < steps; ++i) {
    const double v = steps == 1 ? from : from + (to - from) * i / (steps - 1);
    CascadeSpec cascade = cfg.cascade;
    (param == "k" ? cascade.feedback->k : cascade.feedback->mu) = v;
    const Certificate g = certify(cascade, GainMode::global, cfg.certify);
    const Certificate r = certify(cascade, GainMode::relative, cfg.certify);
    table << format_number(v) << ',' << (g.contraction.holds ? "true" : "false") << ','
          << (r.contraction.holds ? "true" : "false") << ',' << format_number(g.loop_factor) << ','
          << format_number(r.loop_factor);
    if (simulate) {
      const auto spread = ensemble_spread(cascade, cfg.sim, cfg.validation);
      table << ',' << (spread ? format_number(*spread) : std::string("none"));
    }
    table << "\n";
  }
  const fs::path path = out_flag.empty() ? output_dir("", cfg) / "sweep.csv" : fs::path(out_flag);
  write_file_atomic(path, table.str());
  out << "sweep: " << path.string() << "\n";
  return kExitOk;
}

int cmd_check_decrease(const Common& common, int stage, const std::vector<double>& inputs,
                       const std::vector<double>& target_flag, const std::string& out_flag, std::ostream& out) {
  RunConfig cfg = load(common);
  const auto& ode = ode_at(cfg, stage);
  const Interval u = make_interval(inputs.at(0), inputs.at(1));
  const Interval target = target_flag.empty() ? Interval{ode.g_inverse(u.lo), ode.g_inverse(u.hi)}
                                              : make_interval(target_flag.at(0), target_flag.at(1));
  const auto report = verify_u_decrease(DecreaseFunction::distance_to(target), ode, u);
  const std::string text = decrease_json(report, target, u).dump(2) + "\n";
  if (!out_flag.empty()) write_file_atomic(out_flag, text);
  out << text;
  return report.ok ? kExitOk : kExitCheckFailed;
}

int cmd_gain(const Common& common, int stage, const std::vector<double>& inputs, std::ostream& out) {
  RunConfig cfg = load(common);
  const auto& ode = ode_at(cfg, stage);
  const Interval u = make_interval(inputs.at(0), inputs.at(1));
  const auto sg = stage_gain(ode, u, cfg.certify.lipschitz_grid);
  out << stage_gain_json(static_cast<std::size_t>(stage), u, sg).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Small-gain convergence certificates for delayed feedback cascades"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("config", common.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "override the config seed");
  };

  std::string mode, out_path;
  bool validate = false;
  auto* certify_cmd = app.add_subcommand("certify", "write a small-gain certificate (exit 0 holds, 2 fails)");
  add_common(certify_cmd);
  certify_cmd->add_option("--mode", mode, "global or relative")->check(CLI::IsMember({"global", "relative"}));
  certify_cmd->add_option("--out", out_path, "certificate JSON path");
  certify_cmd->add_flag("--validate", validate, "append an ensemble validation report");

  bool open = false, closed = false;
  std::size_t runs = 1;
  auto* simulate_cmd = app.add_subcommand("simulate", "simulate the cascade and write trajectory CSVs");
  add_common(simulate_cmd);
  simulate_cmd->add_flag("--open", open, "open loop driven by the config input");
  simulate_cmd->add_flag("--closed", closed, "closed loop through the inhibitory feedback");
  simulate_cmd->add_option("--runs", runs, "number of runs");
  simulate_cmd->add_option("--out", out_path, "output directory");

  std::string param = "k";
  double from = 0.0, to = 0.0;
  int steps = 11;
  bool sweep_simulate = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "tabulate certificate verdicts across a parameter range");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--param", param, "k or mu");
  sweep_cmd->add_option("--from", from, "first value")->required();
  sweep_cmd->add_option("--to", to, "last value")->required();
  sweep_cmd->add_option("--steps", steps, "number of values (inclusive endpoints)");
  sweep_cmd->add_option("--out", out_path, "table CSV path");
  sweep_cmd->add_flag("--simulate", sweep_simulate, "add the simulated limit spread column");

  int stage = 1;
  std::vector<double> inputs, target;
  auto* decrease_cmd = app.add_subcommand("check-decrease", "verify a distance-to-interval decrease function");
  add_common(decrease_cmd);
  decrease_cmd->add_option("--stage", stage, "ODE stage (1-based)")->required();
  decrease_cmd->add_option("--input-interval", inputs, "input interval c d")->expected(2)->required();
  decrease_cmd->add_option("--target", target, "zero set lo hi (default g^-1 of the input interval)")->expected(2);
  decrease_cmd->add_option("--out", out_path, "also write the report here");

  auto* gain_cmd = app.add_subcommand("gain", "print a stage's lambda and z_set");
  add_common(gain_cmd);
  gain_cmd->add_option("--stage", stage, "ODE stage (1-based)")->required();
  gain_cmd->add_option("--input-interval", inputs, "input interval c d")->expected(2)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*certify_cmd) return cmd_certify(common, mode, out_path, validate, out, err);
    if (*simulate_cmd) return cmd_simulate(common, open, closed, runs, out_path, out, err);
    if (*sweep_cmd) return cmd_sweep(common, param, from, to, steps, out_path, sweep_simulate, out);
    if (*decrease_cmd) return cmd_check_decrease(common, stage, inputs, target, out_path, out);
    if (*gain_cmd) return cmd_gain(common, stage, inputs, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace smallgain::cli
