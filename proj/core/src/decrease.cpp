#include "smallgain/decrease.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smallgain/error.hpp"

namespace smallgain {

double DecreaseFunction::operator()(double x) const {
  if (const auto* d = std::get_if<DistanceToInterval>(&rep_)) return d->target.distance(x);
  return std::get<Custom>(rep_).value(x);
}

std::optional<double> DecreaseFunction::gradient(double x) const {
  if (const auto* d = std::get_if<DistanceToInterval>(&rep_)) {
    if (x < d->target.lo) return -1.0;
    if (x > d->target.hi) return 1.0;
    return 0.0;
  }
  const auto& c = std::get<Custom>(rep_);
  if (c.gradient) return c.gradient(x);
  return std::nullopt;
}

VerificationReport verify_u_decrease(const DecreaseFunction& v, const ScalarMonotoneOde& stage,
                                     const Interval& inputs, const DecreaseGrid& grid) {
  if (grid.n_x < 2 || grid.n_u < 1) throw ConfigError("decrease grid needs n_x >= 2 and n_u >= 1");
  if (!(inputs.lo <= inputs.hi) || inputs.lo < 0.0) throw DomainError("input interval must satisfy 0 <= c <= d");
  const double a = stage.state().lo;
  const double b = stage.state().hi;
  const double eps = grid.exclusion_eps > 0.0 ? grid.exclusion_eps : 1e-6 * (b - a);
  const double h = (b - a) / (10.0 * grid.n_x);

  std::vector<double> xs(static_cast<std::size_t>(grid.n_x));
  for (int i = 0; i < grid.n_x; ++i) xs[static_cast<std::size_t>(i)] = i == grid.n_x - 1 ? b : a + (b - a) * i / (grid.n_x - 1);

  // Distance to Z_V: exact for DistanceToInterval, from zero grid points otherwise.
  std::function<double(double)> dist_to_zero;
  if (const auto* d = std::get_if<DecreaseFunction::DistanceToInterval>(&v.rep())) {
    const Interval target = d->target;
    dist_to_zero = [target](double x) { return target.distance(x); };
  } else {
    std::vector<double> zeros;
    for (double x : xs) {
      if (v(x) == 0.0) zeros.push_back(x);
    }
    dist_to_zero = [zeros](double x) {
      double best = std::numeric_limits<double>::infinity();
      for (double z : zeros) best = std::min(best, std::abs(x - z));
      return best;
    };
  }

  std::vector<double> us;
  if (inputs.width() == 0.0 || grid.n_u == 1) {
    us.push_back(inputs.lo);
  } else {
    for (int j = 0; j < grid.n_u; ++j) us.push_back(j == grid.n_u - 1 ? inputs.hi : inputs.lo + inputs.width() * j / (grid.n_u - 1));
  }

  VerificationReport report;
  report.margin_found = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    if (dist_to_zero(x) < eps) continue;
    const auto grad = v.gradient(x);
    const double dv = grad ? *grad : (v(x + h) - v(x - h)) / (2.0 * h);
    for (double u : us) {
      const double dd = dv * stage.rhs(x, u);
      ++report.points_checked;
      if (dd > report.margin_found) {
        report.margin_found = dd;
        if (dd >= 0.0) report.witness = DecreaseWitness{x, u, dd};
      }
    }
  }
  if (report.points_checked == 0) {
    report.ok = true;
    report.vacuous = true;
    report.margin_found = 0.0;
    report.witness.reset();
    return report;
  }
  report.ok = report.margin_found < 0.0;
  if (report.ok) report.witness.reset();
  return report;
}

StageGain stage_gain(const ScalarMonotoneOde& stage, const Interval& inputs, int n_grid) {
  if (!(inputs.lo <= inputs.hi) || inputs.lo < 0.0 || !std::isfinite(inputs.hi)) {
    throw DomainError("stage input interval must satisfy 0 <= c <= d < inf");
  }
  Interval probe = inputs;
  if (inputs.width() == 0.0) {
    const double delta = 1e-6 * std::max(1.0, inputs.lo);
    probe = {std::max(0.0, inputs.lo - delta), inputs.lo + delta};
  }
  const auto g_inv = [&stage](double u) { return stage.g_inverse(u); };
  double lambda = lipschitz_estimate(g_inv, probe, n_grid);
  for (int i = 0; i < n_grid; ++i) {
    const double u = i == n_grid - 1 ? probe.hi : probe.lo + probe.width() * i / (n_grid - 1);
    lambda = std::max(lambda, stage.g_inverse_slope(u));
  }
  if (!std::isfinite(lambda)) throw DomainError("g inverse is not Lipschitz on the input interval");

  const Interval z{stage.g_inverse(inputs.lo), stage.g_inverse(inputs.hi)};
  return {lambda == 0.0 ? GainFunction::zero() : GainFunction::linear(lambda), lambda, z};
}

std::string to_string(GainMode mode) { return mode == GainMode::global ? "global" : "relative"; }

GainMode parse_gain_mode(const std::string& text) {
  if (text == "global") return GainMode::global;
  if (text == "relative") return GainMode::relative;
  throw ConfigError("mode must be `global` or `relative`, got `" + text + "`");
}

CascadeGain cascade_gain(const CascadeSpec& cascade, const Interval& u0, GainMode mode, int n_grid) {
  cascade.validate();
  if (!(u0.lo <= u0.hi)) throw DomainError("U0 needs lo <= hi");

  CascadeGain out{GainFunction::identity(), 1.0, {}};
  Interval cur = u0;
  for (std::size_t i = 0; i < cascade.stages.size(); ++i) {
    const int idx = static_cast<int>(i);
    StageGainRow row{i, StageKind::delay, cur, cur, 1.0, std::nullopt};
    if (const auto* m = std::get_if<MemorylessStage>(&cascade.stages[i])) {
      row.kind = StageKind::memoryless;
      try {
        row.lambda = m->map.lipschitz(cur);
        row.output_interval = m->map.map_interval(cur);
      } catch (const DomainError& e) {
        throw ModelingError(std::string("interval escapes the memoryless map's domain: ") + e.what(), idx);
      }
    } else if (const auto* o = std::get_if<OdeStage>(&cascade.stages[i])) {
      row.kind = StageKind::ode;
      if (cur.lo < 0.0) throw ModelingError("input interval escapes the admissible range u >= 0", idx);
      StageGain sg = [&] {
        try {
          return stage_gain(o->ode, cur, n_grid);
        } catch (const DomainError& e) {
          throw ModelingError(e.what(), idx);
        }
      }();
      row.lambda = sg.lambda;
      row.z_set = sg.z_set;
      row.output_interval = mode == GainMode::relative ? sg.z_set : o->ode.state();
    }
    out.lambda_product *= row.lambda;
    cur = row.output_interval;
    out.per_stage.push_back(row);
  }
  out.gain = out.lambda_product == 0.0 ? GainFunction::zero() : GainFunction::linear(out.lambda_product);
  return out;
}

}  // namespace smallgain
