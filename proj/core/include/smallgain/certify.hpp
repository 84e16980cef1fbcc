#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/decrease.hpp"
#include "smallgain/gains.hpp"
#include "smallgain/simulate.hpp"

namespace smallgain {

inline constexpr const char* kToolVersion = "smallgain 0.3.0";

struct CertifyOptions {
  GridSpec grid;
  double margin = kDefaultContractionMargin;
  int lipschitz_grid = kDefaultLipschitzGrid;
  /// Digest of the configuration the cascade came from; echoed as provenance.
  std::string config_digest;
};

/// Steady state of the closed loop predicted by the fixed-point chain.
struct PredictedLimits {
  double input;                 ///< u-bar, limit of the effective input
  std::vector<double> states;   ///< one per ODE stage
  double output;                ///< y-bar, limit of the cascade output
};

struct Certificate {
  GainMode mode = GainMode::global;
  Interval input_interval{0.0, 0.0};  ///< U0 fed to the forward cascade
  std::vector<StageGainRow> per_stage;
  GainFunction forward_gain = GainFunction::identity();
  GainFunction feedback_gain = GainFunction::zero();
  ContractionVerdict contraction;
  double loop_factor = 0.0;  ///< k mu prod(lambda_i)
  std::optional<double> k_max;  ///< 1 / (mu prod(lambda_i)); global mode only
  std::optional<PredictedLimits> predicted_limits;
  double mu = 0.0;
  double k = 0.0;
  std::string config_digest;
  std::string tool_version = kToolVersion;
  std::vector<std::string> notes;
};

/// Small-gain certificate for a cascade closed by inhibitory feedback.
///
/// The forward gain is the cascade gain on U0 = [0, mu] (global) or on the
/// range of psi over the cascade output interval (relative); the feedback gain
/// is Linear(k mu). Both are linear, so the convergence and uniqueness
/// conditions collapse to the single test k mu prod(lambda_i) < 1.
Certificate certify(const CascadeSpec& cascade, GainMode mode, const CertifyOptions& options = {});

/// Solves x = G(x) for the last stage's state by bisection, where G runs
/// psi followed by the g^{-1} chain. Tolerance 1e-12.
PredictedLimits solve_fixed_point(const CascadeSpec& cascade);

/// Steady-state stage values and output of the open cascade for constant input c.
PredictedLimits open_loop_chain(const CascadeSpec& cascade, double c);

struct ValidationOptions {
  std::size_t n_runs = 10;
  double tol = 1e-5;
  double tail_fraction = kDefaultTailFraction;
  unsigned max_threads = 0;
};

struct RunLimits {
  std::optional<std::vector<double>> states;  ///< per ODE stage; absent if any failed to settle
  std::optional<double> input;
  std::vector<double> amplitudes;             ///< per ODE stage
};

struct ValidationReport {
  bool all_converged = false;
  bool predictions_match = false;
  double max_limit_spread = 0.0;
  double max_prediction_error = 0.0;
  std::optional<std::size_t> offending_run;
  std::vector<RunLimits> per_run;
};

/// Runs the closed-loop ensemble and checks that every run settles (tail
/// amplitude < tol) on the same limits, and that those limits match the
/// certificate's prediction within tol.
ValidationReport validate_certificate(const Certificate& cert, const CascadeSpec& cascade, const SimConfig& config,
                                      const ValidationOptions& options = {});

struct GainCheckOptions {
  std::size_t n_inputs = 100;   ///< oscillatory inputs for the Cauchy-gain inequality
  std::size_t n_pairs = 50;     ///< convergent pairs for the incremental inequality
  double tail_fraction = kDefaultTailFraction;
  double limit_tol = 1e-5;
};

struct InequalityCheck {
  double max_violation = 0.0;
  std::optional<std::size_t> worst_input_id;
  std::size_t tests = 0;
};

struct GainCheckReport {
  InequalityCheck cauchy;
  InequalityCheck incremental;
  double max_violation = 0.0;
  std::optional<std::size_t> worst_input_id;  ///< id within the worse of the two checks
};

/// lhs - gamma(rhs) for ||eta||_aa <= gamma(||omega||_aa) on one input.
double cauchy_gain_violation(const ScalarMonotoneOde& stage, const GainFunction& claimed, const Signal& input,
                             double x0, const SimConfig& config, double tail_fraction = kDefaultTailFraction);

/// lhs - gamma(rhs) for |eta1_inf - eta2_inf| <= gamma(|omega1_inf - omega2_inf|).
/// +inf when a limit fails to settle within `limit_tol`.
double incremental_gain_violation(const ScalarMonotoneOde& stage, const GainFunction& claimed, const Signal& input1,
                                  const Signal& input2, double x01, double x02, const SimConfig& config,
                                  double limit_tol, double tail_fraction = kDefaultTailFraction);

/// Seeded empirical check of a claimed gain against simulation on inputs in `range`.
GainCheckReport empirical_gain_check(const ScalarMonotoneOde& stage, const GainFunction& claimed,
                                     const Interval& range, const SimConfig& config, std::uint64_t seed,
                                     const GainCheckOptions& options = {});

}  // namespace smallgain
