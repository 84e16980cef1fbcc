#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "smallgain/signals.hpp"

namespace smallgain {

/// Closed-form or tabulated scalar function used for the alpha/beta terms of a
/// monotone stage.
class ScalarFunction {
 public:
  /// slope * x + intercept
  struct Affine {
    double slope;
    double intercept;
  };
  /// vmax * s^p / (K + s^p) with s = x - anchor, or s = anchor - x when
  /// reflected (decreasing in x, zero at the anchor).
  struct Hill {
    double vmax;
    double half_sat;
    double exponent;
    double anchor;
    bool reflected;
  };
  /// Linear interpolation through strictly monotone breakpoints; undefined
  /// outside the first/last abscissa.
  struct Table {
    std::vector<std::pair<double, double>> points;
  };

  using Rep = std::variant<Affine, Hill, Table>;

  static ScalarFunction affine(double slope, double intercept);
  static ScalarFunction hill(double vmax, double half_sat, double exponent, double anchor = 0.0,
                             bool reflected = false);
  static ScalarFunction table(std::vector<std::pair<double, double>> points);

  /// Throws DomainError where the function is undefined.
  double operator()(double x) const;
  /// Derivative; one-sided (right, except at the last node) for tables.
  double derivative(double x) const;

  const Rep& rep() const noexcept { return rep_; }
  std::string describe() const;

 private:
  explicit ScalarFunction(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

/// Pointwise map x -> psi(x) of a memoryless behavior.
class MemorylessMap {
 public:
  struct Identity {};
  struct Scale {
    double factor;
  };
  /// mu / (1 + k x) on x >= 0.
  struct Inhibition {
    double mu;
    double k;
  };
  struct TableLookup {
    std::vector<std::pair<double, double>> points;
  };

  using Rep = std::variant<Identity, Scale, Inhibition, TableLookup>;

  static MemorylessMap identity() { return MemorylessMap(Identity{}); }
  static MemorylessMap scale(double factor);
  static MemorylessMap inhibition(double mu, double k);
  static MemorylessMap table(std::vector<std::pair<double, double>> points);

  double operator()(double x) const;
  bool is_decreasing() const;
  /// Image of [lo, hi]; endpoints swap for decreasing maps.
  Interval map_interval(const Interval& in) const;
  /// Lipschitz constant of the map restricted to `in`.
  double lipschitz(const Interval& in) const;

  const Rep& rep() const noexcept { return rep_; }
  std::string describe() const;

 private:
  explicit MemorylessMap(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

inline constexpr int kDefaultStageCheckGrid = 1001;

/// Scalar stage x' = -alpha(x) + u beta(x) on [a, b] with alpha increasing,
/// beta decreasing and alpha(a) = beta(b) = 0, so [a, b] is invariant for
/// every input u >= 0.
class ScalarMonotoneOde {
 public:
  /// Throws InvalidStageError when the monotone-stage contract fails on a
  /// `check_grid`-point verification grid.
  ScalarMonotoneOde(ScalarFunction alpha, ScalarFunction beta, Interval state,
                    int check_grid = kDefaultStageCheckGrid);

  const ScalarFunction& alpha() const noexcept { return alpha_; }
  const ScalarFunction& beta() const noexcept { return beta_; }
  const Interval& state() const noexcept { return state_; }

  double rhs(double x, double u) const { return -alpha_(x) + u * beta_(x); }
  /// alpha / beta; +inf at b.
  double g(double x) const;
  /// Equilibrium state for constant input u >= 0, by bisection to machine
  /// precision (bracket width <= kInverseTolerance).
  double g_inverse(double u) const;
  /// d g^{-1} / du = beta^2 / (alpha' beta - alpha beta') at x = g^{-1}(u).
  double g_inverse_slope(double u) const;

 private:
  ScalarFunction alpha_;
  ScalarFunction beta_;
  Interval state_;
};

inline constexpr double kInverseTolerance = 1e-12;

/// The pair g = alpha/beta and its inverse, checked for consistency.
struct EquilibriumMap {
  std::function<double(double)> g;
  std::function<double(double)> g_inv;
};

/// Builds g and g^{-1} for a stage and checks g^{-1}(g(x)) = x within 1e-10 on
/// a verification grid; throws InvalidStageError otherwise.
EquilibriumMap g_and_inverse(const ScalarMonotoneOde& stage, int check_grid = 101);

inline constexpr int kDefaultLipschitzGrid = 10001;

/// Largest absolute difference quotient between adjacent points of a uniform
/// n_grid-point grid on `in`. A lower bound on the true Lipschitz constant.
double lipschitz_estimate(const std::function<double(double)>& fn, const Interval& in,
                          int n_grid = kDefaultLipschitzGrid);

/// Initial data for a delayed quantity on [-tau, 0].
class History {
 public:
  static History constant(std::vector<double> value);
  static History constant(double value) { return constant(std::vector<double>{value}); }
  /// Sampled history; its time axis must cover [-tau, 0] for the delays it serves.
  static History sampled(Signal sig);

  std::size_t dim() const;
  double value(double s, std::size_t coord = 0) const;
  /// Earliest time covered; -inf for constant histories.
  double earliest() const;

 private:
  using Rep = std::variant<std::vector<double>, Signal>;
  explicit History(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

/// Delay operator: out(t) = in(t - tau) for t - tau >= t0, history(t - tau - t0)
/// before that. Off-grid lookups interpolate linearly.
Signal apply_delay(const Signal& sig, double tau, const std::optional<History>& history);

/// Memoryless behavior: out(t) = psi(in(t)) coordinate-wise.
Signal apply_memoryless(const Signal& sig, const MemorylessMap& psi);

struct DelayStage {
  double tau;
};
struct MemorylessStage {
  MemorylessMap map;
};
struct OdeStage {
  ScalarMonotoneOde ode;
};
using StageSpec = std::variant<DelayStage, MemorylessStage, OdeStage>;

/// Inhibitory closure: the cascade output y feeds back as mu / (1 + k y(t - tau)).
struct Feedback {
  double mu;
  double k;
  double tau;

  MemorylessMap psi() const { return MemorylessMap::inhibition(mu, k); }
};

struct CascadeSpec {
  std::vector<StageSpec> stages;
  std::optional<Feedback> feedback;

  /// Throws ConfigError / InvalidStageError when the cascade is malformed.
  void validate() const;
  std::vector<std::size_t> ode_indices() const;
  const ScalarMonotoneOde& ode(std::size_t ode_ordinal) const;
  /// Range of the final cascade output when every state spans its interval.
  Interval output_range() const;
};

}  // namespace smallgain
