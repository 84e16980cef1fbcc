#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace smallgain {

/// Uniformly sampled trajectory t -> R^m.
///
/// Samples are stored row-major: sample i occupies data[i*m, (i+1)*m).
class Signal {
 public:
  Signal(double t0, double dt, std::size_t dim, std::vector<double> data);

  static Signal scalar(double t0, double dt, std::vector<double> values);

  /// Samples f(t0 + i dt) for i = 0..count-1.
  template <class F>
  static Signal sample(double t0, double dt, std::size_t count, F&& f) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = f(t0 + static_cast<double>(i) * dt);
    return scalar(t0, dt, std::move(v));
  }

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size() / dim_; }
  double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
  double t_end() const noexcept { return time(size() - 1); }

  std::span<const double> at(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  double value(std::size_t i, std::size_t coord = 0) const { return data_[i * dim_ + coord]; }
  const std::vector<double>& data() const noexcept { return data_; }

  /// Coordinate `coord` at time t by linear interpolation. Times before t0 or
  /// after the last sample are clamped to the end values.
  double interpolate(double t, std::size_t coord = 0) const;

  /// Single coordinate as a scalar signal on the same grid.
  Signal component(std::size_t coord) const;

 private:
  double t0_;
  double dt_;
  std::size_t dim_;
  std::vector<double> data_;
};

struct Interval {
  double lo;
  double hi;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  double distance(double x) const noexcept { return x < lo ? lo - x : (x > hi ? x - hi : 0.0); }
};

/// Interval with lo <= hi enforced; throws DomainError otherwise.
Interval make_interval(double lo, double hi);

/// Product of closed intervals.
class BoxSet {
 public:
  explicit BoxSet(std::vector<Interval> sides);
  static BoxSet point(std::span<const double> p);
  static BoxSet interval(double lo, double hi) { return BoxSet({make_interval(lo, hi)}); }

  std::size_t dim() const noexcept { return sides_.size(); }
  const std::vector<Interval>& sides() const noexcept { return sides_; }

  /// Euclidean distance from p to the box.
  double distance(std::span<const double> p) const;

 private:
  std::vector<Interval> sides_;
};

inline constexpr double kDefaultTailFraction = 0.5;
/// Vector tails longer than this are thinned by uniform stride before the
/// pairwise diameter is taken.
inline constexpr std::size_t kMaxPairwiseTail = 4096;

/// Index of the first tail sample for the final `tail_fraction` of samples.
/// Throws InsufficientDataError if fewer than two samples remain.
std::size_t tail_start(const Signal& sig, double tail_fraction);

/// Diameter of the tail sample set: the sampled estimate of
/// limsup_{s,t -> inf} |w(t) - w(s)|.
double asymptotic_amplitude(const Signal& sig, double tail_fraction = kDefaultTailFraction);

/// Diameter of the sampled omega-limit set. Identical to the asymptotic
/// amplitude on sampled data.
double omega_limit_diameter(const Signal& sig, double tail_fraction = kDefaultTailFraction);

/// True iff every tail sample lies within `eps` of `target`.
bool converges_to(const Signal& sig, const BoxSet& target, double eps,
                  double tail_fraction = kDefaultTailFraction);

/// Tail mean when the tail amplitude is below eps, else nullopt.
std::optional<std::vector<double>> limit_value(const Signal& sig, double eps,
                                               double tail_fraction = kDefaultTailFraction);

double diameter(const BoxSet& set);

/// CSV with header `t,x1,...,xm` and 17 significant digits.
void write_csv(std::ostream& os, const Signal& sig);
Signal read_csv(std::istream& is);

}  // namespace smallgain
