#include "smallgain/signals.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "smallgain/error.hpp"

namespace smallgain {

Signal::Signal(double t0, double dt, std::size_t dim, std::vector<double> data)
    : t0_(t0), dt_(dt), dim_(dim), data_(std::move(data)) {
  if (!std::isfinite(t0)) throw DomainError("signal start time must be finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("signal sample step must be positive");
  if (dim == 0) throw DomainError("signal dimension must be at least 1");
  if (data_.empty() || data_.size() % dim != 0) {
    throw DomainError("signal needs a nonempty sample list of consistent dimension");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw DomainError("signal samples must be finite");
  }
}

Signal Signal::scalar(double t0, double dt, std::vector<double> values) {
  return Signal(t0, dt, 1, std::move(values));
}

double Signal::interpolate(double t, std::size_t coord) const {
  const std::size_t n = size();
  double p = (t - t0_) / dt_;
  if (p <= 0.0) return value(0, coord);
  if (p >= static_cast<double>(n - 1)) return value(n - 1, coord);
  const double nearest = std::round(p);
  if (std::abs(p - nearest) < 1e-9) return value(static_cast<std::size_t>(nearest), coord);
  const auto i = static_cast<std::size_t>(std::floor(p));
  const double f = p - static_cast<double>(i);
  const double a = value(i, coord);
  const double b = value(i + 1, coord);
  return a + f * (b - a);
}

Signal Signal::component(std::size_t coord) const {
  if (coord >= dim_) throw DomainError("signal component index out of range");
  std::vector<double> v(size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = value(i, coord);
  return scalar(t0_, dt_, std::move(v));
}

Interval make_interval(double lo, double hi) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("interval needs finite lo <= hi");
  }
  return {lo, hi};
}

BoxSet::BoxSet(std::vector<Interval> sides) : sides_(std::move(sides)) {
  if (sides_.empty()) throw DomainError("box needs at least one side");
  for (const auto& s : sides_) make_interval(s.lo, s.hi);
}

BoxSet BoxSet::point(std::span<const double> p) {
  std::vector<Interval> sides;
  sides.reserve(p.size());
  for (double v : p) sides.push_back({v, v});
  return BoxSet(std::move(sides));
}

double BoxSet::distance(std::span<const double> p) const {
  if (p.size() != sides_.size()) throw DomainError("point and box dimensions differ");
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = sides_[i].distance(p[i]);
    sq += d * d;
  }
  return std::sqrt(sq);
}

std::size_t tail_start(const Signal& sig, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw DomainError("tail_fraction must lie in (0, 1]");
  }
  const std::size_t n = sig.size();
  const auto start = static_cast<std::size_t>(std::floor((1.0 - tail_fraction) * static_cast<double>(n)));
  if (n - start < 2) throw InsufficientDataError("signal tail holds fewer than 2 samples");
  return start;
}

double asymptotic_amplitude(const Signal& sig, double tail_fraction) {
  const std::size_t start = tail_start(sig, tail_fraction);
  const std::size_t n = sig.size();
  if (sig.dim() == 1) {
    const auto& d = sig.data();
    const auto [mn, mx] = std::minmax_element(d.begin() + static_cast<std::ptrdiff_t>(start), d.end());
    return *mx - *mn;
  }
  const std::size_t count = n - start;
  const std::size_t stride = (count + kMaxPairwiseTail - 1) / kMaxPairwiseTail;
  std::vector<std::size_t> idx;
  for (std::size_t i = start; i < n; i += stride) idx.push_back(i);
  double best = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const auto pa = sig.at(idx[a]);
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const auto pb = sig.at(idx[b]);
      double sq = 0.0;
      for (std::size_t c = 0; c < pa.size(); ++c) {
        const double diff = pa[c] - pb[c];
        sq += diff * diff;
      }
      best = std::max(best, sq);
    }
  }
  return std::sqrt(best);
}

double omega_limit_diameter(const Signal& sig, double tail_fraction) {
  return asymptotic_amplitude(sig, tail_fraction);
}

bool converges_to(const Signal& sig, const BoxSet& target, double eps, double tail_fraction) {
  if (target.dim() != sig.dim()) throw DomainError("signal and target dimensions differ");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const std::size_t start = tail_start(sig, tail_fraction);
  for (std::size_t i = start; i < sig.size(); ++i) {
    if (target.distance(sig.at(i)) > eps) return false;
  }
  return true;
}

std::optional<std::vector<double>> limit_value(const Signal& sig, double eps, double tail_fraction) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (asymptotic_amplitude(sig, tail_fraction) >= eps) return std::nullopt;
  const std::size_t start = tail_start(sig, tail_fraction);
  std::vector<double> mean(sig.dim(), 0.0);
  for (std::size_t i = start; i < sig.size(); ++i) {
    const auto p = sig.at(i);
    for (std::size_t c = 0; c < p.size(); ++c) mean[c] += p[c];
  }
  const auto count = static_cast<double>(sig.size() - start);
  for (double& m : mean) m /= count;
  // constant tails must come back bit-exact
  for (std::size_t c = 0; c < mean.size(); ++c) {
    const double first = sig.value(start, c);
    bool constant = true;
    for (std::size_t i = start; i < sig.size() && constant; ++i) constant = sig.value(i, c) == first;
    if (constant) mean[c] = first;
  }
  return mean;
}

double diameter(const BoxSet& set) {
  double sq = 0.0;
  for (const auto& s : set.sides()) sq += s.width() * s.width();
  return std::sqrt(sq);
}

void write_csv(std::ostream& os, const Signal& sig) {
  const auto old = os.precision(17);
  os << "t";
  for (std::size_t c = 0; c < sig.dim(); ++c) os << ",x" << (c + 1);
  os << "\n";
  for (std::size_t i = 0; i < sig.size(); ++i) {
    os << sig.time(i);
    for (double v : sig.at(i)) os << "," << v;
    os << "\n";
  }
  os.precision(old);
}

Signal read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t", 0) != 0) {
    throw DomainError("signal CSV must start with a `t,x1,...` header");
  }
  const auto dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (dim == 0) throw DomainError("signal CSV header names no value columns");
  std::vector<double> times;
  std::vector<double> data;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      const double v = std::stod(cell);
      if (col == 0) {
        times.push_back(v);
      } else {
        data.push_back(v);
      }
      ++col;
    }
    if (col != dim + 1) throw DomainError("signal CSV row has the wrong number of columns");
  }
  if (times.size() < 2) throw DomainError("signal CSV needs at least two rows");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - (times.front() + static_cast<double>(i) * dt)) > 1e-9 * std::max(1.0, std::abs(times[i]))) {
      throw DomainError("signal CSV time column is not uniformly sampled");
    }
  }
  return Signal(times.front(), dt, dim, std::move(data));
}

}  // namespace smallgain
