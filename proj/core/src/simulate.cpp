#include "smallgain/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "smallgain/error.hpp"

namespace smallgain {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(horizon >= 10.0 * dt) || !std::isfinite(horizon)) throw ConfigError("horizon must be at least 10 dt");
  if (!(clamp_tol > 0.0)) throw ConfigError("clamp_tol must be positive");
}

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

HistoryFunction constant_histories(const std::vector<double>& values) {
  HistoryFunction out;
  out.reserve(values.size());
  for (double v : values) out.push_back(History::constant(v));
  return out;
}

namespace {

// Input of one ODE stage: maps(source(t - delay)), maps applied in order.
struct Link {
  bool external = false;     // open-loop external input
  std::size_t source = 0;    // ODE ordinal when !external
  double delay = 0.0;
  std::vector<const MemorylessMap*> maps;
};

struct Wiring {
  std::vector<const ScalarMonotoneOde*> odes;
  std::vector<Link> links;
  // output segment after the last ODE
  double tail_delay = 0.0;
  std::vector<const MemorylessMap*> tail_maps;
};

Wiring wire(const CascadeSpec& cascade) {
  Wiring w;
  double pending_delay = 0.0;
  std::vector<const MemorylessMap*> pending_maps;
  std::optional<std::size_t> prev;
  for (const auto& stage : cascade.stages) {
    if (const auto* d = std::get_if<DelayStage>(&stage)) {
      pending_delay += d->tau;
    } else if (const auto* m = std::get_if<MemorylessStage>(&stage)) {
      pending_maps.push_back(&m->map);
    } else {
      const auto& o = std::get<OdeStage>(stage);
      Link link;
      link.external = !prev.has_value();
      link.source = prev.value_or(0);
      link.delay = pending_delay;
      link.maps = std::move(pending_maps);
      w.links.push_back(std::move(link));
      prev = w.odes.size();
      w.odes.push_back(&o.ode);
      pending_delay = 0.0;
      pending_maps.clear();
    }
  }
  w.tail_delay = pending_delay;
  w.tail_maps = std::move(pending_maps);
  return w;
}

double apply_maps(const std::vector<const MemorylessMap*>& maps, double v) {
  for (const auto* m : maps) v = (*m)(v);
  return v;
}

class Integrator {
 public:
  Integrator(const CascadeSpec& cascade, const HistoryFunction& histories, const SimConfig& config,
             const Signal* input, const MemorylessMap* psi, double feedback_delay)
      : w_(wire(cascade)), histories_(histories), config_(config), input_(input), psi_(psi) {
    const std::size_t n_ode = w_.odes.size();
    if (histories_.size() != n_ode) {
      throw ConfigError("need one history per ODE stage (" + std::to_string(n_ode) + "), got " +
                        std::to_string(histories_.size()));
    }
    if (psi_ != nullptr) {
      // close the loop: first stage reads head(psi(tail(x_last(t - tail - tau_n - head))))
      Link& head = w_.links.front();
      std::vector<const MemorylessMap*> maps = w_.tail_maps;
      maps.push_back(psi_);
      maps.insert(maps.end(), head.maps.begin(), head.maps.end());
      head.external = false;
      head.source = n_ode - 1;
      head.delay += w_.tail_delay + feedback_delay;
      head.maps = std::move(maps);
      omega_delay_ = w_.tail_delay + feedback_delay;
    }
    for (std::size_t j = 0; j < n_ode; ++j) {
      const auto& link = w_.links[j];
      if (!link.external && link.delay > 0.0 && histories_[link.source].earliest() > -link.delay + 1e-9 * config_.dt) {
        throw ConfigError("history of stage " + std::to_string(link.source + 1) + " does not cover [-" +
                          std::to_string(link.delay) + ", 0]");
      }
    }
    if (psi_ != nullptr && omega_delay_ > 0.0 && histories_.back().earliest() > -omega_delay_ + 1e-9 * config_.dt) {
      throw ConfigError("history of the last stage does not cover the feedback delay");
    }
  }

  Trajectory run() {
    const std::size_t n_ode = w_.odes.size();
    const std::size_t steps = config_.steps();
    const double h = config_.dt;
    x_.assign(n_ode, {});
    for (std::size_t j = 0; j < n_ode; ++j) {
      x_[j].reserve(steps + 1);
      const double x0 = histories_[j].value(0.0);
      const Interval iv = w_.odes[j]->state();
      if (x0 < iv.lo - config_.clamp_tol || x0 > iv.hi + config_.clamp_tol) {
        throw ConfigError("initial state of stage " + std::to_string(j + 1) + " lies outside its interval");
      }
      x_[j].push_back(std::clamp(x0, iv.lo, iv.hi));
    }

    std::vector<double> y(n_ode), k1(n_ode), k2(n_ode), k3(n_ode), k4(n_ode), tmp(n_ode);
    double max_over = 0.0;
    for (std::size_t n = 0; n < steps; ++n) {
      const double t = static_cast<double>(n) * h;
      for (std::size_t j = 0; j < n_ode; ++j) y[j] = x_[j][n];
      rhs(n, t, 0.0, y, k1);
      for (std::size_t j = 0; j < n_ode; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
      rhs(n, t, 0.5 * h, tmp, k2);
      for (std::size_t j = 0; j < n_ode; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
      rhs(n, t, 0.5 * h, tmp, k3);
      for (std::size_t j = 0; j < n_ode; ++j) tmp[j] = y[j] + h * k3[j];
      rhs(n, t, h, tmp, k4);
      const double t_next = static_cast<double>(n + 1) * h;
      for (std::size_t j = 0; j < n_ode; ++j) {
        double next = y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        const Interval iv = w_.odes[j]->state();
        const double over = std::max(iv.lo - next, next - iv.hi);
        if (over > 0.0) {
          max_over = std::max(max_over, over);
          if (over > config_.clamp_tol) {
            std::ostringstream os;
            os.precision(17);
            os << "state of stage " << (j + 1) << " left [" << iv.lo << ", " << iv.hi << "] by " << over
               << " at t = " << t_next;
            throw InvarianceViolation(os.str(), static_cast<int>(j), t_next);
          }
          next = std::clamp(next, iv.lo, iv.hi);
        }
        x_[j].push_back(next);
      }
    }

    Trajectory traj{{}, Signal::scalar(0.0, h, omega(steps)), config_, max_over};
    for (auto& xs : x_) traj.states.push_back(Signal::scalar(0.0, h, std::move(xs)));
    return traj;
  }

 private:
  // Value of ODE state j at time s while step n (from t_n) is in progress.
  double stored(std::size_t j, std::size_t n, double s) const {
    const double p = s / config_.dt;
    if (p < -1e-9) return histories_[j].value(s);
    if (p <= 0.0) return x_[j][0];
    const double np = static_cast<double>(n);
    if (p >= np) return x_[j][n];  // frozen at the step start
    const double nearest = std::round(p);
    if (std::abs(p - nearest) < 1e-9) return x_[j][static_cast<std::size_t>(nearest)];
    const auto i = static_cast<std::size_t>(std::floor(p));
    const double f = p - static_cast<double>(i);
    const double a = x_[j][i];
    const double b = x_[j][i + 1];
    return a + f * (b - a);
  }

  double external(double s) const { return input_->interpolate(std::max(s, input_->t0())); }

  void rhs(std::size_t n, double t, double offset, const std::vector<double>& y, std::vector<double>& out) const {
    const double ts = t + offset;
    for (std::size_t j = 0; j < w_.odes.size(); ++j) {
      const Link& link = w_.links[j];
      double src;
      if (link.external) {
        src = external(ts - link.delay);
      } else if (link.delay == 0.0) {
        const Interval iv = w_.odes[link.source]->state();
        src = std::clamp(y[link.source], iv.lo, iv.hi);
      } else {
        src = stored(link.source, n, ts - link.delay);
      }
      const double u = apply_maps(link.maps, src);
      const Interval iv = w_.odes[j]->state();
      out[j] = w_.odes[j]->rhs(std::clamp(y[j], iv.lo, iv.hi), u);
    }
  }

  std::vector<double> omega(std::size_t steps) const {
    std::vector<double> out(steps + 1);
    const std::size_t last = w_.odes.size() - 1;
    for (std::size_t n = 0; n <= steps; ++n) {
      const double t = static_cast<double>(n) * config_.dt;
      if (psi_ == nullptr) {
        out[n] = external(t);
      } else {
        const double y = apply_maps(w_.tail_maps, stored(last, n, t - omega_delay_));
        out[n] = (*psi_)(y);
      }
    }
    return out;
  }

  Wiring w_;
  const HistoryFunction& histories_;
  SimConfig config_;
  const Signal* input_;
  const MemorylessMap* psi_;
  double omega_delay_ = 0.0;
  std::vector<std::vector<double>> x_;
};

}  // namespace

Trajectory simulate_open(const CascadeSpec& cascade, const Signal& input, const HistoryFunction& histories,
                         const SimConfig& config) {
  cascade.validate();
  config.validate();
  if (input.dim() != 1) throw ConfigError("open-loop input must be scalar");
  if (input.t0() > 1e-9 * config.dt || input.t_end() < config.horizon - 1e-9 * config.horizon) {
    throw ConfigError("open-loop input must cover [0, horizon]");
  }
  return Integrator(cascade, histories, config, &input, nullptr, 0.0).run();
}

Trajectory simulate_closed(const CascadeSpec& cascade, const HistoryFunction& histories, const SimConfig& config) {
  cascade.validate();
  config.validate();
  if (!cascade.feedback) throw ConfigError("closed-loop simulation needs a feedback block");
  const MemorylessMap psi = cascade.feedback->psi();
  return Integrator(cascade, histories, config, nullptr, &psi, cascade.feedback->tau).run();
}

std::vector<HistoryFunction> draw_constant_histories(const CascadeSpec& cascade, std::uint64_t seed,
                                                     std::size_t n_runs) {
  std::mt19937_64 rng(seed);
  const auto idx = cascade.ode_indices();
  std::vector<HistoryFunction> out(n_runs);
  for (auto& run : out) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const Interval iv = cascade.ode(j).state();
      // 53-bit uniform in [0, 1), independent of the standard library's distributions
      const double unit = static_cast<double>(rng() >> 11) * 0x1p-53;
      run.push_back(History::constant(iv.lo + unit * iv.width()));
    }
  }
  return out;
}

std::vector<Trajectory> ensemble(const CascadeSpec& cascade, const SimConfig& config, std::size_t n_runs,
                                 unsigned max_threads) {
  if (n_runs == 0) throw ConfigError("ensemble needs at least one run");
  const auto histories = draw_constant_histories(cascade, config.seed, n_runs);
  std::vector<std::optional<Trajectory>> results(n_runs);
  std::vector<std::exception_ptr> errors(n_runs);

  unsigned workers = max_threads != 0 ? max_threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_runs));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < n_runs; r = next++) {
      try {
        results[r] = simulate_closed(cascade, histories[r], config);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<Trajectory> out;
  out.reserve(n_runs);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace smallgain
