#include "smallgain/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "smallgain/error.hpp"

namespace smallgain {

namespace {

constexpr double kFixedPointTolerance = 1e-12;

// Pushes a constant input through every stage; returns per-ODE values and the output.
PredictedLimits chain(const CascadeSpec& cascade, double c) {
  PredictedLimits out{c, {}, 0.0};
  double v = c;
  for (std::size_t i = 0; i < cascade.stages.size(); ++i) {
    if (const auto* m = std::get_if<MemorylessStage>(&cascade.stages[i])) {
      v = m->map(v);
    } else if (const auto* o = std::get_if<OdeStage>(&cascade.stages[i])) {
      if (v < 0.0) throw ModelingError("steady-state input is negative", static_cast<int>(i));
      v = o->ode.g_inverse(v);
      out.states.push_back(v);
    }
  }
  out.output = v;
  return out;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + unit(rng) * (hi - lo); }

CascadeSpec single_stage(const ScalarMonotoneOde& stage) { return CascadeSpec{{OdeStage{stage}}, std::nullopt}; }

void check_in_range(const Signal& sig, const Interval& range) {
  for (double v : sig.data()) {
    if (v < range.lo || v > range.hi) {
      throw std::logic_error("gain-check input generator escaped the admissible range");
    }
  }
}

}  // namespace

PredictedLimits open_loop_chain(const CascadeSpec& cascade, double c) {
  cascade.validate();
  return chain(cascade, c);
}

PredictedLimits solve_fixed_point(const CascadeSpec& cascade) {
  cascade.validate();
  if (!cascade.feedback) throw ConfigError("fixed point needs a feedback block");
  const MemorylessMap psi = cascade.feedback->psi();
  const Interval y_range = cascade.output_range();
  // The loop is closed on the cascade output y; G maps y to psi(y) pushed through the chain.
  auto G = [&](double y) { return chain(cascade, psi(y)).output; };
  double lo = y_range.lo;
  double hi = y_range.hi;
  for (int it = 0; it < 200 && hi - lo > kFixedPointTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - G(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double y = 0.5 * (lo + hi);
  return chain(cascade, psi(y));
}

Certificate certify(const CascadeSpec& cascade, GainMode mode, const CertifyOptions& options) {
  cascade.validate();
  if (!cascade.feedback) throw ConfigError("certification needs a feedback block (mu, k, tau)");
  const Feedback fb = *cascade.feedback;
  const MemorylessMap psi = fb.psi();

  Certificate cert;
  cert.mode = mode;
  cert.mu = fb.mu;
  cert.k = fb.k;
  cert.config_digest = options.config_digest;
  cert.input_interval = mode == GainMode::global ? Interval{0.0, fb.mu} : psi.map_interval(cascade.output_range());

  CascadeGain cg = cascade_gain(cascade, cert.input_interval, mode, options.lipschitz_grid);
  cert.per_stage = std::move(cg.per_stage);
  cert.forward_gain = cg.gain;
  cert.feedback_gain = fb.k == 0.0 ? GainFunction::zero() : GainFunction::linear(fb.k * fb.mu);
  cert.contraction = is_contraction(cert.forward_gain, cert.feedback_gain, options.grid, options.margin);
  cert.loop_factor = fb.k * fb.mu * cg.lambda_product;
  if (mode == GainMode::global && cg.lambda_product > 0.0) cert.k_max = 1.0 / (fb.mu * cg.lambda_product);

  cert.notes.push_back(
      "forward and feedback gains are both linear, so the convergence condition and the uniqueness "
      "condition coincide: k * mu * prod(lambda_i) < 1");
  cert.notes.push_back(
      "ultimate boundedness holds automatically: every state is confined to its compact interval");
  cert.notes.push_back(
      "gains are verified only on the finitely many input intervals listed in per_stage");
  cert.notes.push_back(
      "lambda_i is a grid estimate of the Lipschitz constant of g_i^{-1} (difference quotients and node slopes)");
  if (mode == GainMode::relative) {
    cert.notes.push_back(
        "relative mode propagates U_i = g_i^{-1}(U_{i-1}), so the first intermediate set is g_1^{-1}(U_0)");
  }
  cert.notes.push_back("non-emptiness of the closed-loop behavior is assumed; simulations construct members");
  if (cert.contraction.holds) {
    cert.predicted_limits = solve_fixed_point(cascade);
  } else {
    cert.notes.push_back(
        "small-gain condition fails; no convergence claim is made (the condition is sufficient, not necessary)");
  }
  return cert;
}

ValidationReport validate_certificate(const Certificate& cert, const CascadeSpec& cascade, const SimConfig& config,
                                      const ValidationOptions& options) {
  if (!cert.contraction.holds || !cert.predicted_limits) {
    throw ConfigError("validation needs a certificate whose contraction holds");
  }
  if (!(options.tol > 0.0)) throw ConfigError("validation tolerance must be positive");
  const auto runs = ensemble(cascade, config, options.n_runs, options.max_threads);

  ValidationReport report;
  report.all_converged = true;
  const std::size_t n_state = cert.predicted_limits->states.size();
  std::vector<double> lo(n_state + 1, std::numeric_limits<double>::infinity());
  std::vector<double> hi(n_state + 1, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    RunLimits rl;
    std::vector<double> values;
    bool settled = true;
    for (const auto& s : runs[r].states) {
      rl.amplitudes.push_back(asymptotic_amplitude(s, options.tail_fraction));
      const auto lim = limit_value(s, options.tol, options.tail_fraction);
      if (lim) {
        values.push_back(lim->front());
      } else {
        settled = false;
      }
    }
    if (const auto in = limit_value(runs[r].effective_input, options.tol, options.tail_fraction)) {
      rl.input = in->front();
    } else {
      settled = false;
    }
    if (settled) {
      rl.states = values;
      for (std::size_t j = 0; j < n_state; ++j) {
        lo[j] = std::min(lo[j], values[j]);
        hi[j] = std::max(hi[j], values[j]);
        report.max_prediction_error =
            std::max(report.max_prediction_error, std::abs(values[j] - cert.predicted_limits->states[j]));
      }
      lo[n_state] = std::min(lo[n_state], *rl.input);
      hi[n_state] = std::max(hi[n_state], *rl.input);
      report.max_prediction_error =
          std::max(report.max_prediction_error, std::abs(*rl.input - cert.predicted_limits->input));
    } else if (report.all_converged) {
      report.all_converged = false;
      report.offending_run = r;
    }
    report.per_run.push_back(std::move(rl));
  }
  for (std::size_t j = 0; j <= n_state; ++j) {
    if (hi[j] >= lo[j]) report.max_limit_spread = std::max(report.max_limit_spread, hi[j] - lo[j]);
  }
  report.predictions_match = report.all_converged && report.max_prediction_error <= options.tol;
  return report;
}

double cauchy_gain_violation(const ScalarMonotoneOde& stage, const GainFunction& claimed, const Signal& input,
                             double x0, const SimConfig& config, double tail_fraction) {
  const auto traj = simulate_open(single_stage(stage), input, constant_histories({x0}), config);
  const double lhs = asymptotic_amplitude(traj.states.front(), tail_fraction);
  const double rhs = asymptotic_amplitude(traj.effective_input, tail_fraction);
  return lhs - claimed(rhs);
}

double incremental_gain_violation(const ScalarMonotoneOde& stage, const GainFunction& claimed, const Signal& input1,
                                  const Signal& input2, double x01, double x02, const SimConfig& config,
                                  double limit_tol, double tail_fraction) {
  const auto cascade = single_stage(stage);
  const auto t1 = simulate_open(cascade, input1, constant_histories({x01}), config);
  const auto t2 = simulate_open(cascade, input2, constant_histories({x02}), config);
  const auto eta1 = limit_value(t1.states.front(), limit_tol, tail_fraction);
  const auto eta2 = limit_value(t2.states.front(), limit_tol, tail_fraction);
  const auto om1 = limit_value(t1.effective_input, limit_tol, tail_fraction);
  const auto om2 = limit_value(t2.effective_input, limit_tol, tail_fraction);
  if (!eta1 || !eta2 || !om1 || !om2) return std::numeric_limits<double>::infinity();
  return std::abs(eta1->front() - eta2->front()) - claimed(std::abs(om1->front() - om2->front()));
}

GainCheckReport empirical_gain_check(const ScalarMonotoneOde& stage, const GainFunction& claimed,
                                     const Interval& range, const SimConfig& config, std::uint64_t seed,
                                     const GainCheckOptions& options) {
  if (options.n_inputs + options.n_pairs < 2) throw ConfigError("gain check needs at least 2 inputs");
  if (range.lo < 0.0 || !(range.hi > range.lo)) throw ConfigError("gain-check input range must be [lo, hi] with 0 <= lo < hi");
  config.validate();
  std::mt19937_64 rng(seed);
  const std::size_t count = config.steps() + 1;
  const Interval state = stage.state();

  auto record = [](InequalityCheck& c, double v, std::size_t id) {
    if (!c.worst_input_id || v > c.max_violation) {
      c.max_violation = v;
      c.worst_input_id = id;
    }
    ++c.tests;
  };

  GainCheckReport report;
  for (std::size_t id = 0; id < options.n_inputs; ++id) {
    const double center = uniform(rng, range.lo + 0.2 * range.width(), range.lo + 0.8 * range.width());
    const double room = 0.95 * std::min(center - range.lo, range.hi - center);
    const int n_modes = 1 + static_cast<int>(rng() % 3);
    std::vector<double> weight(static_cast<std::size_t>(n_modes)), freq(weight.size()), phase(weight.size());
    double total = 0.0;
    for (std::size_t m = 0; m < weight.size(); ++m) {
      weight[m] = uniform(rng, 0.1, 1.0);
      freq[m] = uniform(rng, 0.3, 3.0);
      phase[m] = uniform(rng, 0.0, 2.0 * M_PI);
      total += weight[m];
    }
    const double amp = room * uniform(rng, 0.2, 1.0) / total;
    const Signal input = Signal::sample(0.0, config.dt, count, [&](double t) {
      double v = center;
      for (std::size_t m = 0; m < weight.size(); ++m) v += amp * weight[m] * std::sin(freq[m] * t + phase[m]);
      return v;
    });
    check_in_range(input, range);
    const double x0 = uniform(rng, state.lo, state.hi);
    record(report.cauchy, cauchy_gain_violation(stage, claimed, input, x0, config, options.tail_fraction), id);
  }

  for (std::size_t id = 0; id < options.n_pairs; ++id) {
    auto make = [&] {
      const double target = uniform(rng, range.lo, range.hi);
      const double start = uniform(rng, range.lo, range.hi);
      const double time_const = uniform(rng, 1.0, 5.0);
      return Signal::sample(0.0, config.dt, count,
                            [&](double t) { return target + (start - target) * std::exp(-t / time_const); });
    };
    const Signal a = make();
    const Signal b = make();
    check_in_range(a, range);
    check_in_range(b, range);
    const double x1 = uniform(rng, state.lo, state.hi);
    const double x2 = uniform(rng, state.lo, state.hi);
    record(report.incremental,
           incremental_gain_violation(stage, claimed, a, b, x1, x2, config, options.limit_tol, options.tail_fraction),
           id);
  }

  const bool cauchy_worse = report.cauchy.tests > 0 &&
                            (report.incremental.tests == 0 || report.cauchy.max_violation >= report.incremental.max_violation);
  const InequalityCheck& worst = cauchy_worse ? report.cauchy : report.incremental;
  report.max_violation = worst.max_violation;
  report.worst_input_id = worst.worst_input_id;
  return report;
}

}  // namespace smallgain
