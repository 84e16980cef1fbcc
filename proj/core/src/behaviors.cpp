#include "smallgain/behaviors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smallgain/error.hpp"

namespace smallgain {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_table(const std::vector<std::pair<double, double>>& pts, bool require_monotone_y) {
  if (pts.size() < 2) throw DomainError("table needs at least two breakpoints");
  int dir = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].first) || !std::isfinite(pts[i].second)) {
      throw DomainError("table breakpoints must be finite");
    }
    if (i == 0) continue;
    if (pts[i].first <= pts[i - 1].first) throw DomainError("table abscissae must be strictly increasing");
    if (!require_monotone_y) continue;
    const int d = pts[i].second > pts[i - 1].second ? 1 : (pts[i].second < pts[i - 1].second ? -1 : 0);
    if (d == 0 || (dir != 0 && d != dir)) throw DomainError("table values must be strictly monotone");
    dir = d;
  }
}

// Segment index i with pts[i].x <= x <= pts[i+1].x; right-continuous except at the last node.
std::size_t table_segment(const std::vector<std::pair<double, double>>& pts, double x) {
  if (!(x >= pts.front().first && x <= pts.back().first)) {
    throw DomainError("table evaluated outside its breakpoint range");
  }
  auto it = std::upper_bound(pts.begin(), pts.end(), x,
                             [](double v, const std::pair<double, double>& p) { return v < p.first; });
  auto i = static_cast<std::size_t>(it - pts.begin());
  if (i == 0) i = 1;
  if (i >= pts.size()) i = pts.size() - 1;
  return i - 1;
}

double table_eval(const std::vector<std::pair<double, double>>& pts, double x) {
  const std::size_t i = table_segment(pts, x);
  const auto [x0, y0] = pts[i];
  const auto [x1, y1] = pts[i + 1];
  if (x == x0) return y0;
  if (x == x1) return y1;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

double table_slope(const std::vector<std::pair<double, double>>& pts, std::size_t i) {
  return (pts[i + 1].second - pts[i].second) / (pts[i + 1].first - pts[i].first);
}

}  // namespace

// ---------------------------------------------------------------------------
// ScalarFunction

ScalarFunction ScalarFunction::affine(double slope, double intercept) {
  if (!std::isfinite(slope) || !std::isfinite(intercept)) throw DomainError("affine coefficients must be finite");
  return ScalarFunction(Affine{slope, intercept});
}

ScalarFunction ScalarFunction::hill(double vmax, double half_sat, double exponent, double anchor,
                                    bool reflected) {
  if (!(vmax > 0.0) || !(half_sat > 0.0) || !(exponent > 0.0) || !std::isfinite(vmax) ||
      !std::isfinite(half_sat) || !std::isfinite(exponent) || !std::isfinite(anchor)) {
    throw DomainError("hill function needs positive finite vmax, half-saturation and exponent");
  }
  return ScalarFunction(Hill{vmax, half_sat, exponent, anchor, reflected});
}

ScalarFunction ScalarFunction::table(std::vector<std::pair<double, double>> points) {
  check_table(points, true);
  return ScalarFunction(Table{std::move(points)});
}

namespace {

double hill_offset(const ScalarFunction::Hill& h, double x) {
  double s = h.reflected ? h.anchor - x : x - h.anchor;
  if (s < 0.0) {
    if (s < -1e-12 * std::max(1.0, std::abs(h.anchor))) {
      throw DomainError("hill function evaluated on the wrong side of its anchor");
    }
    s = 0.0;
  }
  return s;
}

}  // namespace

double ScalarFunction::operator()(double x) const {
  return std::visit(Overloaded{
                        [x](const Affine& f) { return f.slope * x + f.intercept; },
                        [x](const Hill& f) {
                          const double s = hill_offset(f, x);
                          const double sp = std::pow(s, f.exponent);
                          return f.vmax * sp / (f.half_sat + sp);
                        },
                        [x](const Table& f) { return table_eval(f.points, x); },
                    },
                    rep_);
}

double ScalarFunction::derivative(double x) const {
  return std::visit(Overloaded{
                        [](const Affine& f) { return f.slope; },
                        [x](const Hill& f) {
                          const double s = hill_offset(f, x);
                          double ds;
                          if (s == 0.0) {
                            ds = f.exponent > 1.0 ? 0.0 : (f.exponent == 1.0 ? f.vmax / f.half_sat : kInf);
                          } else {
                            const double sp = std::pow(s, f.exponent);
                            const double den = f.half_sat + sp;
                            ds = f.vmax * f.half_sat * f.exponent * sp / s / (den * den);
                          }
                          return f.reflected ? -ds : ds;
                        },
                        [x](const Table& f) { return table_slope(f.points, table_segment(f.points, x)); },
                    },
                    rep_);
}

std::string ScalarFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const Affine& f) { os << "affine(slope=" << f.slope << ", intercept=" << f.intercept << ")"; },
                 [&](const Hill& f) {
                   os << "hill(vmax=" << f.vmax << ", K=" << f.half_sat << ", p=" << f.exponent
                      << ", anchor=" << f.anchor << (f.reflected ? ", reflected" : "") << ")";
                 },
                 [&](const Table& f) { os << "table(" << f.points.size() << " points)"; },
             },
             rep_);
  return os.str();
}

// ---------------------------------------------------------------------------
// MemorylessMap

MemorylessMap MemorylessMap::scale(double factor) {
  if (!std::isfinite(factor)) throw DomainError("scale factor must be finite");
  return MemorylessMap(Scale{factor});
}

MemorylessMap MemorylessMap::inhibition(double mu, double k) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("inhibition needs mu > 0");
  if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("inhibition needs k >= 0");
  return MemorylessMap(Inhibition{mu, k});
}

MemorylessMap MemorylessMap::table(std::vector<std::pair<double, double>> points) {
  check_table(points, true);
  return MemorylessMap(TableLookup{std::move(points)});
}

double MemorylessMap::operator()(double x) const {
  return std::visit(Overloaded{
                        [x](const Identity&) { return x; },
                        [x](const Scale& m) { return m.factor * x; },
                        [x](const Inhibition& m) {
                          if (!(x >= 0.0)) throw DomainError("inhibition map applied to a negative value");
                          return m.mu / (1.0 + m.k * x);
                        },
                        [x](const TableLookup& m) { return table_eval(m.points, x); },
                    },
                    rep_);
}

bool MemorylessMap::is_decreasing() const {
  return std::visit(Overloaded{
                        [](const Identity&) { return false; },
                        [](const Scale& m) { return m.factor < 0.0; },
                        [](const Inhibition& m) { return m.k > 0.0; },
                        [](const TableLookup& m) { return m.points.back().second < m.points.front().second; },
                    },
                    rep_);
}

Interval MemorylessMap::map_interval(const Interval& in) const {
  const double a = (*this)(in.lo);
  const double b = (*this)(in.hi);
  return a <= b ? Interval{a, b} : Interval{b, a};
}

double MemorylessMap::lipschitz(const Interval& in) const {
  return std::visit(Overloaded{
                        [](const Identity&) { return 1.0; },
                        [](const Scale& m) { return std::abs(m.factor); },
                        [&in](const Inhibition& m) {
                          if (in.lo < 0.0) throw DomainError("inhibition map applied to a negative value");
                          const double d = 1.0 + m.k * in.lo;
                          return m.k * m.mu / (d * d);
                        },
                        [&in](const TableLookup& m) {
                          const std::size_t first = table_segment(m.points, in.lo);
                          const std::size_t last = table_segment(m.points, in.hi);
                          double best = 0.0;
                          for (std::size_t i = first; i <= last; ++i) {
                            best = std::max(best, std::abs(table_slope(m.points, i)));
                          }
                          return best;
                        },
                    },
                    rep_);
}

std::string MemorylessMap::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const Identity&) { os << "identity"; },
                 [&](const Scale& m) { os << "scale(" << m.factor << ")"; },
                 [&](const Inhibition& m) { os << "inhibition(mu=" << m.mu << ", k=" << m.k << ")"; },
                 [&](const TableLookup& m) { os << "table(" << m.points.size() << " points)"; },
             },
             rep_);
  return os.str();
}

// ---------------------------------------------------------------------------
// ScalarMonotoneOde

ScalarMonotoneOde::ScalarMonotoneOde(ScalarFunction alpha, ScalarFunction beta, Interval state,
                                     int check_grid)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), state_(state) {
  const double a = state_.lo;
  const double b = state_.hi;
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidStageError("state interval needs a < b");
  }
  if (check_grid < 2) throw ConfigError("stage verification grid needs at least 2 points");
  const double zero_tol = 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  try {
    if (std::abs(alpha_(a)) > zero_tol) throw InvalidStageError("alpha(a) must be 0");
    if (std::abs(beta_(b)) > zero_tol) throw InvalidStageError("beta(b) must be 0");
    double prev_alpha = 0.0;
    double prev_beta = 0.0;
    for (int i = 0; i < check_grid; ++i) {
      const double x = i == check_grid - 1 ? b : a + (b - a) * i / (check_grid - 1);
      const double al = alpha_(x);
      const double be = beta_(x);
      if (!std::isfinite(al) || !std::isfinite(be)) throw InvalidStageError("alpha/beta not finite on [a, b]");
      if (al < -zero_tol || be < -zero_tol) throw InvalidStageError("alpha and beta must be nonnegative on [a, b]");
      if (i > 0) {
        if (!(al > prev_alpha)) throw InvalidStageError("alpha must be strictly increasing on [a, b]");
        if (!(be < prev_beta)) throw InvalidStageError("beta must be strictly decreasing on [a, b]");
      }
      prev_alpha = al;
      prev_beta = be;
    }
  } catch (const DomainError& e) {
    throw InvalidStageError(std::string("alpha/beta undefined on [a, b]: ") + e.what());
  }
}

double ScalarMonotoneOde::g(double x) const {
  const double be = beta_(x);
  if (be <= 0.0) return kInf;
  return alpha_(x) / be;
}

double ScalarMonotoneOde::g_inverse(double u) const {
  if (std::isnan(u) || u < 0.0) throw DomainError("g inverse needs u >= 0");
  if (u == 0.0) return state_.lo;
  if (std::isinf(u)) return state_.hi;
  double lo = state_.lo;
  double hi = state_.hi;
  // Bisect until the bracket stops shrinking; the residual then scales with
  // |df/dx| * ulp(x) instead of |df/dx| * 1e-12.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    // x below the equilibrium <=> f(x, u) > 0
    if (rhs(mid, u) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ScalarMonotoneOde::g_inverse_slope(double u) const {
  const double x = g_inverse(u);
  const double be = beta_(x);
  const double den = alpha_.derivative(x) * be - alpha_(x) * beta_.derivative(x);
  if (!(den > 0.0)) return kInf;
  return be * be / den;
}

EquilibriumMap g_and_inverse(const ScalarMonotoneOde& stage, int check_grid) {
  const double a = stage.state().lo;
  const double b = stage.state().hi;
  for (int i = 0; i < check_grid; ++i) {
    const double x = a + (b - a) * i / check_grid;  // stops short of b, where g is infinite
    const double back = stage.g_inverse(stage.g(x));
    if (!(std::abs(back - x) <= 1e-10)) {
      std::ostringstream os;
      os.precision(17);
      os << "g inverse round trip failed at x = " << x << " (got " << back << ")";
      throw InvalidStageError(os.str());
    }
  }
  return {[stage](double x) { return stage.g(x); }, [stage](double u) { return stage.g_inverse(u); }};
}

double lipschitz_estimate(const std::function<double(double)>& fn, const Interval& in, int n_grid) {
  if (n_grid < 2) throw ConfigError("lipschitz estimate needs n_grid >= 2");
  if (!(in.lo <= in.hi)) throw DomainError("lipschitz estimate needs lo <= hi");
  if (in.width() == 0.0) return 0.0;
  auto at = [&](double x) {
    double v;
    try {
      v = fn(x);
    } catch (const DomainError& e) {
      throw DomainError(std::string("function undefined on lipschitz grid: ") + e.what());
    }
    if (!std::isfinite(v)) throw DomainError("function not finite on lipschitz grid");
    return v;
  };
  double best = 0.0;
  double x_prev = in.lo;
  double f_prev = at(x_prev);
  for (int i = 1; i < n_grid; ++i) {
    const double x = i == n_grid - 1 ? in.hi : in.lo + in.width() * i / (n_grid - 1);
    const double f = at(x);
    best = std::max(best, std::abs(f - f_prev) / (x - x_prev));
    x_prev = x;
    f_prev = f;
  }
  return best;
}

// ---------------------------------------------------------------------------
// History and signal operators

History History::constant(std::vector<double> value) {
  if (value.empty()) throw DomainError("constant history needs a value");
  for (double v : value) {
    if (!std::isfinite(v)) throw DomainError("history values must be finite");
  }
  return History(std::move(value));
}

History History::sampled(Signal sig) { return History(std::move(sig)); }

std::size_t History::dim() const {
  return std::visit(Overloaded{[](const std::vector<double>& v) { return v.size(); },
                               [](const Signal& s) { return s.dim(); }},
                    rep_);
}

double History::earliest() const {
  return std::visit(Overloaded{[](const std::vector<double>&) { return -kInf; },
                               [](const Signal& s) { return s.t0(); }},
                    rep_);
}

double History::value(double s, std::size_t coord) const {
  return std::visit(Overloaded{
                        [coord](const std::vector<double>& v) { return v.at(coord); },
                        [s, coord](const Signal& sig) {
                          if (s < sig.t0() - 1e-9 * sig.dt()) throw DomainError("history does not cover the lookup time");
                          return sig.interpolate(s, coord);
                        },
                    },
                    rep_);
}

Signal apply_delay(const Signal& sig, double tau, const std::optional<History>& history) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("delay must be finite and nonnegative");
  if (tau == 0.0) return sig;
  if (!history) throw DomainError("delay > 0 needs an explicit history on [-tau, 0]");
  if (history->dim() != sig.dim()) throw DomainError("history and signal dimensions differ");
  if (history->earliest() > -tau + 1e-9 * sig.dt()) throw DomainError("history does not cover [-tau, 0]");

  const std::size_t n = sig.size();
  const std::size_t m = sig.dim();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    double rel = static_cast<double>(i) * sig.dt() - tau;
    if (std::abs(rel) < 1e-9 * sig.dt()) rel = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      out[i * m + c] = rel >= 0.0 ? sig.interpolate(sig.t0() + rel, c) : history->value(rel, c);
    }
  }
  return Signal(sig.t0(), sig.dt(), m, std::move(out));
}

Signal apply_memoryless(const Signal& sig, const MemorylessMap& psi) {
  if (std::holds_alternative<MemorylessMap::Identity>(psi.rep())) return sig;
  std::vector<double> out(sig.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = psi(sig.data()[i]);
  return Signal(sig.t0(), sig.dt(), sig.dim(), std::move(out));
}

// ---------------------------------------------------------------------------
// CascadeSpec

void CascadeSpec::validate() const {
  if (ode_indices().empty()) throw ConfigError("cascade needs at least one ODE stage");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (const auto* d = std::get_if<DelayStage>(&stages[i])) {
      if (!(d->tau >= 0.0) || !std::isfinite(d->tau)) {
        throw ConfigError("stage " + std::to_string(i) + ": delay must be finite and nonnegative");
      }
    }
  }
  if (feedback) {
    if (!(feedback->mu > 0.0) || !std::isfinite(feedback->mu)) throw ConfigError("feedback mu must be positive");
    if (!(feedback->k >= 0.0) || !std::isfinite(feedback->k)) throw ConfigError("feedback k must be nonnegative");
    if (!(feedback->tau >= 0.0) || !std::isfinite(feedback->tau)) {
      throw ConfigError("feedback delay must be finite and nonnegative");
    }
  }
}

std::vector<std::size_t> CascadeSpec::ode_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (std::holds_alternative<OdeStage>(stages[i])) out.push_back(i);
  }
  return out;
}

const ScalarMonotoneOde& CascadeSpec::ode(std::size_t ode_ordinal) const {
  const auto idx = ode_indices();
  if (ode_ordinal >= idx.size()) throw ConfigError("ODE stage ordinal out of range");
  return std::get<OdeStage>(stages[idx[ode_ordinal]]).ode;
}

Interval CascadeSpec::output_range() const {
  const auto idx = ode_indices();
  if (idx.empty()) throw ConfigError("cascade needs at least one ODE stage");
  Interval range = std::get<OdeStage>(stages[idx.back()]).ode.state();
  for (std::size_t i = idx.back() + 1; i < stages.size(); ++i) {
    if (const auto* m = std::get_if<MemorylessStage>(&stages[i])) range = m->map.map_interval(range);
  }
  return range;
}

}  // namespace smallgain
