#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smallgain/behaviors.hpp"
#include "smallgain/gains.hpp"

namespace smallgain {

/// Candidate U-decrease function V on a scalar state interval.
class DecreaseFunction {
 public:
  /// V(x) = dist(x, [lo, hi]); Z_V = [lo, hi].
  struct DistanceToInterval {
    Interval target;
  };
  /// User-supplied V; the zero set is located numerically on the check grid.
  struct Custom {
    std::function<double(double)> value;
    std::function<double(double)> gradient;  ///< may be empty
  };

  static DecreaseFunction distance_to(Interval target) { return DecreaseFunction(DistanceToInterval{target}); }
  static DecreaseFunction custom(std::function<double(double)> value,
                                 std::function<double(double)> gradient = {}) {
    return DecreaseFunction(Custom{std::move(value), std::move(gradient)});
  }

  double operator()(double x) const;
  /// Analytic gradient when known; nullopt means finite differences.
  std::optional<double> gradient(double x) const;
  const std::variant<DistanceToInterval, Custom>& rep() const noexcept { return rep_; }

 private:
  explicit DecreaseFunction(std::variant<DistanceToInterval, Custom> rep) : rep_(std::move(rep)) {}
  std::variant<DistanceToInterval, Custom> rep_;
};

struct DecreaseWitness {
  double x;
  double u;
  double directional_derivative;
};

struct VerificationReport {
  bool ok = false;
  /// Zero set covers the whole state interval; nothing was checked.
  bool vacuous = false;
  std::optional<DecreaseWitness> witness;
  /// Largest V'(x) f(x, u) over the checked grid (negative when ok).
  double margin_found = 0.0;
  std::size_t points_checked = 0;
};

struct DecreaseGrid {
  int n_x = 2001;
  int n_u = 101;
  /// Collar around Z_V that is skipped; <= 0 selects 1e-6 (b - a).
  double exclusion_eps = 0.0;
};

/// Checks V'(x) f(x, u) < 0 on a grid over {x in [a, b] : dist(x, Z_V) >= eps} x U.
/// A failing report carries the grid point with the largest directional derivative.
VerificationReport verify_u_decrease(const DecreaseFunction& v, const ScalarMonotoneOde& stage,
                                     const Interval& inputs, const DecreaseGrid& grid = {});

struct StageGain {
  GainFunction gain;
  double lambda;
  Interval z_set;
};

/// Linear gain of a monotone stage on inputs restricted to U = [c, d], with
/// Z_V = [g^{-1}(c), g^{-1}(d)]. The slope serves as both Cauchy gain and
/// incremental limit gain on U.
///
/// lambda is the larger of the difference-quotient estimate of g^{-1} on U and
/// the analytic slope of g^{-1} at the grid nodes. Degenerate U = [c, c] is
/// probed on a small neighbourhood of c.
StageGain stage_gain(const ScalarMonotoneOde& stage, const Interval& inputs,
                     int n_grid = kDefaultLipschitzGrid);

enum class GainMode { global, relative };

std::string to_string(GainMode mode);
GainMode parse_gain_mode(const std::string& text);

enum class StageKind { delay, memoryless, ode };

struct StageGainRow {
  std::size_t stage_index;
  StageKind kind;
  Interval input_interval;
  Interval output_interval;
  double lambda;
  std::optional<Interval> z_set;  ///< ODE stages only
};

struct CascadeGain {
  GainFunction gain;
  double lambda_product;
  std::vector<StageGainRow> per_stage;
};

/// Forward gain of a cascade fed by inputs in U0.
///
/// Global mode: every ODE stage takes the full range its upstream can produce
/// (stage 1 gets U0, later stages get the upstream state interval).
/// Relative mode: intervals propagate as U_i = g_i^{-1}(U_{i-1}) so each slope
/// is measured on the inputs the stage can actually see asymptotically.
/// Delays pass intervals through with factor 1; memoryless stages map endpoints.
CascadeGain cascade_gain(const CascadeSpec& cascade, const Interval& u0, GainMode mode,
                         int n_grid = kDefaultLipschitzGrid);

}  // namespace smallgain
