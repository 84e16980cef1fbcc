#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace smallgain {

/// Comparison function r -> gamma(r) on [0, inf).
///
/// Every representation vanishes at 0, is strictly increasing and unbounded
/// (class K-infinity). The one exception is the degenerate zero gain
/// `GainFunction::zero()`, which is what a constant-output behavior has; it
/// satisfies every gain inequality vacuously and reports `is_zero()`.
class GainFunction {
 public:
  struct Linear {
    double slope;
  };
  struct PowerLaw {
    double coeff;
    double exponent;
  };
  /// Breakpoints (r, gamma(r)) with the origin implied; linear between
  /// breakpoints and extrapolated at the final slope.
  struct PiecewiseLinear {
    std::vector<std::pair<double, double>> breakpoints;
  };
  /// factors[0] o factors[1] o ... ; the last factor is applied first.
  struct Composed {
    std::vector<GainFunction> factors;
  };

  using Rep = std::variant<Linear, PowerLaw, PiecewiseLinear, Composed>;

  static GainFunction linear(double slope);
  static GainFunction identity() { return linear(1.0); }
  static GainFunction zero();
  static GainFunction power_law(double coeff, double exponent);
  static GainFunction piecewise_linear(std::vector<std::pair<double, double>> breakpoints);
  static GainFunction composed(std::vector<GainFunction> factors);

  double operator()(double r) const { return eval(r); }
  double eval(double r) const;

  const Rep& rep() const noexcept { return rep_; }
  bool is_linear() const noexcept { return std::holds_alternative<Linear>(rep_); }
  /// Slope of a Linear gain; nullopt for every other representation.
  std::optional<double> linear_slope() const;
  bool is_zero() const noexcept;

  std::string describe() const;

 private:
  explicit GainFunction(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

/// outer o inner. Linear o Linear collapses to Linear(product of slopes).
GainFunction compose(const GainFunction& outer, const GainFunction& inner);

/// Log-spaced radii used to check "for all r > 0" conditions.
struct GridSpec {
  double r_min = 1e-9;
  double r_max = 1e9;
  int points_per_decade = 50;

  std::vector<double> radii() const;
};

struct ContractionVerdict {
  bool holds = false;
  bool exact = false;  ///< decided in closed form (both gains linear)
  std::optional<double> witness;
  /// sup over checked radii of gamma1(gamma2(r)) / r; the exact slope product
  /// in the linear case.
  double worst_ratio = 0.0;
};

inline constexpr double kDefaultContractionMargin = 1e-6;

/// Decides gamma1(gamma2(r)) < r for all r > 0.
///
/// Two linear gains are decided exactly (slope product < 1). Otherwise the
/// check is gamma1(gamma2(r)) <= (1 - margin) r on every grid radius; a
/// failing verdict reports the radius with the largest ratio
/// gamma1(gamma2(r)) / r as witness, ties going to the radius closest to 1
/// on a log scale.
ContractionVerdict is_contraction(const GainFunction& gamma1, const GainFunction& gamma2,
                                  const GridSpec& grid = {},
                                  double margin = kDefaultContractionMargin);

}  // namespace smallgain
