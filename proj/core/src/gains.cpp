#include "smallgain/gains.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "smallgain/error.hpp"

namespace smallgain {

namespace {

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

GainFunction GainFunction::linear(double slope) {
  if (!std::isfinite(slope) || slope < 0.0) {
    throw DomainError("linear gain slope must be finite and nonnegative");
  }
  return GainFunction(Linear{slope});
}

GainFunction GainFunction::zero() { return GainFunction(Linear{0.0}); }

GainFunction GainFunction::power_law(double coeff, double exponent) {
  if (!finite_positive(coeff) || !finite_positive(exponent)) {
    throw DomainError("power-law gain needs positive coefficient and exponent");
  }
  return GainFunction(PowerLaw{coeff, exponent});
}

GainFunction GainFunction::piecewise_linear(std::vector<std::pair<double, double>> breakpoints) {
  if (!breakpoints.empty() && breakpoints.front().first == 0.0) {
    if (breakpoints.front().second != 0.0) {
      throw DomainError("piecewise gain must vanish at 0");
    }
    breakpoints.erase(breakpoints.begin());
  }
  if (breakpoints.empty()) {
    throw DomainError("piecewise gain needs at least one breakpoint besides the origin");
  }
  double prev_r = 0.0;
  double prev_g = 0.0;
  for (const auto& [r, g] : breakpoints) {
    if (!std::isfinite(r) || !std::isfinite(g) || r <= prev_r || g <= prev_g) {
      throw DomainError("piecewise gain breakpoints must be strictly increasing in r and gamma(r)");
    }
    prev_r = r;
    prev_g = g;
  }
  return GainFunction(PiecewiseLinear{std::move(breakpoints)});
}

GainFunction GainFunction::composed(std::vector<GainFunction> factors) {
  if (factors.empty()) {
    throw DomainError("composed gain needs at least one factor");
  }
  if (factors.size() == 1) {
    return std::move(factors.front());
  }
  std::vector<GainFunction> flat;
  for (auto& f : factors) {
    if (auto* c = std::get_if<Composed>(&f.rep_)) {
      for (auto& inner : c->factors) flat.push_back(std::move(inner));
    } else {
      flat.push_back(std::move(f));
    }
  }
  return GainFunction(Composed{std::move(flat)});
}

double GainFunction::eval(double r) const {
  if (std::isnan(r) || r < 0.0) {
    throw DomainError("gain evaluated at a negative radius");
  }
  return std::visit(
      Overloaded{
          [r](const Linear& g) { return g.slope * r; },
          [r](const PowerLaw& g) { return r == 0.0 ? 0.0 : g.coeff * std::pow(r, g.exponent); },
          [r](const PiecewiseLinear& g) {
            const auto& bp = g.breakpoints;
            double r0 = 0.0;
            double g0 = 0.0;
            for (const auto& [r1, g1] : bp) {
              if (r <= r1) {
                return g0 + (g1 - g0) * (r - r0) / (r1 - r0);
              }
              r0 = r1;
              g0 = g1;
            }
            // final-segment extrapolation
            const double rp = bp.size() >= 2 ? bp[bp.size() - 2].first : 0.0;
            const double gp = bp.size() >= 2 ? bp[bp.size() - 2].second : 0.0;
            return g0 + (g0 - gp) / (r0 - rp) * (r - r0);
          },
          [r](const Composed& g) {
            double v = r;
            for (auto it = g.factors.rbegin(); it != g.factors.rend(); ++it) v = it->eval(v);
            return v;
          },
      },
      rep_);
}

std::optional<double> GainFunction::linear_slope() const {
  if (const auto* l = std::get_if<Linear>(&rep_)) return l->slope;
  return std::nullopt;
}

bool GainFunction::is_zero() const noexcept {
  const auto* l = std::get_if<Linear>(&rep_);
  return l != nullptr && l->slope == 0.0;
}

std::string GainFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const Linear& g) { os << "linear(" << g.slope << ")"; },
                 [&](const PowerLaw& g) { os << "power_law(" << g.coeff << ", " << g.exponent << ")"; },
                 [&](const PiecewiseLinear& g) {
                   os << "piecewise(";
                   for (std::size_t i = 0; i < g.breakpoints.size(); ++i) {
                     if (i) os << ", ";
                     os << "(" << g.breakpoints[i].first << ", " << g.breakpoints[i].second << ")";
                   }
                   os << ")";
                 },
                 [&](const Composed& g) {
                   for (std::size_t i = 0; i < g.factors.size(); ++i) {
                     if (i) os << " o ";
                     os << g.factors[i].describe();
                   }
                 },
             },
             rep_);
  return os.str();
}

GainFunction compose(const GainFunction& outer, const GainFunction& inner) {
  const auto a = outer.linear_slope();
  const auto b = inner.linear_slope();
  if (a && b) return GainFunction::linear(*a * *b);
  // zero gain absorbs from either side: outer(0) = 0 and inner is finite.
  if (outer.is_zero() || inner.is_zero()) return GainFunction::zero();
  return GainFunction::composed({outer, inner});
}

std::vector<double> GridSpec::radii() const {
  if (!(std::isfinite(r_min) && std::isfinite(r_max)) || r_min <= 0.0 || r_max < r_min ||
      points_per_decade <= 0) {
    throw ConfigError("contraction grid is empty: need 0 < r_min <= r_max and points_per_decade > 0");
  }
  const double lo = std::log10(r_min);
  const double hi = std::log10(r_max);
  const auto steps = static_cast<long>(std::floor((hi - lo) * points_per_decade + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps) + 2);
  for (long i = 0; i <= steps; ++i) {
    out.push_back(std::pow(10.0, lo + static_cast<double>(i) / points_per_decade));
  }
  if (out.back() < r_max * (1.0 - 1e-12)) out.push_back(r_max);
  return out;
}

ContractionVerdict is_contraction(const GainFunction& gamma1, const GainFunction& gamma2,
                                  const GridSpec& grid, double margin) {
  if (!(margin > 0.0 && margin < 1.0)) {
    throw ConfigError("contraction margin must lie in (0, 1)");
  }
  const auto radii = grid.radii();

  ContractionVerdict v;
  const auto s1 = gamma1.linear_slope();
  const auto s2 = gamma2.linear_slope();
  if (s1 && s2) {
    v.exact = true;
    v.worst_ratio = *s1 * *s2;
    v.holds = v.worst_ratio < 1.0;
    // every r > 0 fails equally; report the unit radius
    if (!v.holds) v.witness = 1.0;
    return v;
  }

  double best_excess = -1.0;
  double best_dist = 0.0;
  bool failed = false;
  for (double r : radii) {
    const double lhs = gamma1.eval(gamma2.eval(r));
    const double ratio = lhs / r;
    v.worst_ratio = std::max(v.worst_ratio, ratio);
    if (lhs <= (1.0 - margin) * r) continue;
    failed = true;
    const double dist = std::abs(std::log10(r));
    const bool tie = std::abs(ratio - best_excess) <= 1e-12 * std::max(1.0, std::abs(ratio));
    if (ratio > best_excess && !tie) {
      best_excess = ratio;
      best_dist = dist;
      v.witness = r;
    } else if (tie && dist < best_dist) {
      best_dist = dist;
      v.witness = r;
    }
  }
  v.holds = !failed;
  return v;
}

}  // namespace smallgain
