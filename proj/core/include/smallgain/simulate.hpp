#pragma once

#include <cstdint>
#include <vector>

#include "smallgain/behaviors.hpp"
#include "smallgain/signals.hpp"

namespace smallgain {

struct SimConfig {
  double dt = 0.01;
  double horizon = 200.0;
  /// Largest overshoot of a state interval that is clamped back silently.
  double clamp_tol = 1e-9;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t steps() const;
};

/// One history per ODE stage, in cascade order. Each history supplies x_i(0)
/// and the values of x_i on [-tau_max, 0] used by delayed lookups.
using HistoryFunction = std::vector<History>;

HistoryFunction constant_histories(const std::vector<double>& values);

struct Trajectory {
  std::vector<Signal> states;  ///< one scalar signal per ODE stage
  /// Input of the forward cascade: the external input (open loop) or
  /// psi(y(t - tau_n)) (closed loop).
  Signal effective_input;
  SimConfig config;
  /// Largest distance by which any state left its interval before clamping.
  double max_overshoot = 0.0;
};

/// Integrates the open cascade with classical RK4 at fixed step dt.
///
/// Delayed couplings x_{i-1}(t - tau) are read by linear interpolation from
/// the computed trajectory or the history. Zero delays are coupled inside the
/// RK stages; a positive delay shorter than the stage offset reads the value
/// frozen at the step start. Inputs before t = 0 hold the first input sample.
Trajectory simulate_open(const CascadeSpec& cascade, const Signal& input, const HistoryFunction& histories,
                         const SimConfig& config);

/// Integrates the closed loop: the first stage receives mu / (1 + k y(t - tau_n)).
Trajectory simulate_closed(const CascadeSpec& cascade, const HistoryFunction& histories, const SimConfig& config);

/// Constant histories drawn uniformly from each stage interval, `n_runs` sets
/// in order, from a 64-bit Mersenne twister seeded with `seed`.
std::vector<HistoryFunction> draw_constant_histories(const CascadeSpec& cascade, std::uint64_t seed,
                                                     std::size_t n_runs);

/// Closed-loop runs from `draw_constant_histories(cascade, config.seed, n_runs)`.
/// Runs may execute concurrently; results are ordered by run index.
std::vector<Trajectory> ensemble(const CascadeSpec& cascade, const SimConfig& config, std::size_t n_runs,
                                 unsigned max_threads = 0);

}  // namespace smallgain
