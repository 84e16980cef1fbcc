#include "emit.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <system_error>
#include <unistd.h>

namespace smallgain::cli {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const char* kind_name(StageKind k) {
  switch (k) {
    case StageKind::delay:
      return "delay";
    case StageKind::memoryless:
      return "memoryless";
    case StageKind::ode:
      return "ode";
  }
  return "?";
}

}  // namespace

Json gain_json(const GainFunction& gain) {
  return std::visit(Overloaded{
                        [](const GainFunction::Linear& g) { return Json{{"linear", g.slope}}; },
                        [](const GainFunction::PowerLaw& g) {
                          return Json{{"power_law", Json{{"coeff", g.coeff}, {"exponent", g.exponent}}}};
                        },
                        [](const GainFunction::PiecewiseLinear& g) {
                          Json pts = Json::array();
                          for (const auto& [r, v] : g.breakpoints) pts.push_back(Json::array({r, v}));
                          return Json{{"piecewise", pts}};
                        },
                        [](const GainFunction::Composed& g) {
                          Json fs = Json::array();
                          for (const auto& f : g.factors) fs.push_back(gain_json(f));
                          return Json{{"composed", fs}};
                        },
                    },
                    gain.rep());
}

Json interval_json(const Interval& iv) { return Json::array({iv.lo, iv.hi}); }

Json certificate_json(const Certificate& cert) {
  Json j;
  j["mode"] = to_string(cert.mode);
  Json rows = Json::array();
  for (const auto& r : cert.per_stage) {
    Json row;
    row["stage"] = r.stage_index;
    row["kind"] = kind_name(r.kind);
    row["input_interval"] = interval_json(r.input_interval);
    row["output_interval"] = interval_json(r.output_interval);
    row["lambda"] = r.lambda;
    row["z_set"] = r.z_set ? interval_json(*r.z_set) : Json(nullptr);
    rows.push_back(row);
  }
  j["per_stage"] = rows;
  j["forward_gain"] = gain_json(cert.forward_gain);
  j["feedback_gain"] = gain_json(cert.feedback_gain);
  Json c;
  c["holds"] = cert.contraction.holds;
  c["exact"] = cert.contraction.exact;
  c["witness"] = cert.contraction.witness ? Json(*cert.contraction.witness) : Json(nullptr);
  c["worst_ratio"] = cert.contraction.worst_ratio;
  j["contraction"] = c;
  j["k_max"] = cert.k_max ? Json(*cert.k_max) : Json(nullptr);
  if (cert.predicted_limits) {
    Json p;
    p["input"] = cert.predicted_limits->input;
    p["states"] = cert.predicted_limits->states;
    p["output"] = cert.predicted_limits->output;
    j["predicted_limits"] = p;
  } else {
    j["predicted_limits"] = nullptr;
  }
  j["loop_factor"] = cert.loop_factor;
  j["input_interval"] = interval_json(cert.input_interval);
  j["feedback"] = Json{{"mu", cert.mu}, {"k", cert.k}};
  j["theory_anchor"] = Json{
      {"convergence", "gamma1(gamma2(r)) < r for all r > 0 on asymptotic-amplitude gains: bounded loop signals converge"},
      {"uniqueness", "the same test on incremental limit gains: all loop trajectories share one limit"},
      {"bound", "monotone stages closed by mu / (1 + k y): k < 1 / (mu * lambda_1 * ... * lambda_n)"},
  };
  j["notes"] = cert.notes;
  j["provenance"] = Json{{"config_digest", cert.config_digest}, {"tool_version", cert.tool_version}};
  return j;
}

Json validation_json(const ValidationReport& report, double spread_limit) {
  Json j;
  j["all_converged"] = report.all_converged;
  j["predictions_match"] = report.predictions_match;
  j["max_limit_spread"] = report.max_limit_spread;
  j["spread_limit"] = spread_limit;
  j["spread_ok"] = report.all_converged && report.max_limit_spread < spread_limit;
  j["max_prediction_error"] = report.max_prediction_error;
  j["offending_run"] = report.offending_run ? Json(*report.offending_run) : Json(nullptr);
  if (report.offending_run) j["alarm"] = "a certified run failed to settle: implementation or horizon problem";
  Json runs = Json::array();
  for (std::size_t r = 0; r < report.per_run.size(); ++r) {
    const auto& rl = report.per_run[r];
    Json row;
    row["run"] = r;
    row["states"] = rl.states ? Json(*rl.states) : Json(nullptr);
    row["input"] = rl.input ? Json(*rl.input) : Json(nullptr);
    row["amplitudes"] = rl.amplitudes;
    runs.push_back(row);
  }
  j["per_run_limits"] = runs;
  return j;
}

Json decrease_json(const VerificationReport& report, const Interval& target, const Interval& inputs) {
  Json j;
  j["ok"] = report.ok;
  j["vacuous"] = report.vacuous;
  j["target"] = interval_json(target);
  j["input_interval"] = interval_json(inputs);
  if (report.witness) {
    j["witness"] = Json{{"x", report.witness->x},
                        {"u", report.witness->u},
                        {"directional_derivative", report.witness->directional_derivative}};
  } else {
    j["witness"] = nullptr;
  }
  j["margin_found"] = report.margin_found;
  j["points_checked"] = report.points_checked;
  return j;
}

Json stage_gain_json(std::size_t stage, const Interval& inputs, const StageGain& sg) {
  Json j;
  j["stage"] = stage;
  j["input_interval"] = interval_json(inputs);
  j["lambda"] = sg.lambda;
  j["gain"] = gain_json(sg.gain);
  j["z_set"] = interval_json(sg.z_set);
  j["z_diameter"] = sg.z_set.width();
  return j;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& echo) {
  for (const auto& line : echo) os << "# " << line << "\n";
  os << "t";
  for (std::size_t j = 0; j < traj.states.size(); ++j) os << ",x" << (j + 1);
  os << ",omega\n";
  const std::size_t n = traj.effective_input.size();
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.effective_input.time(i));
    os << buf;
    for (const auto& s : traj.states) {
      std::snprintf(buf, sizeof buf, "%.17g", s.value(i));
      os << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", traj.effective_input.value(i));
    os << ',' << buf << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write `" + tmp.string() + "`");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("failed writing `" + tmp.string() + "`");
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace smallgain::cli
