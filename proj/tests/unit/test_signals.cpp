#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "smallgain/error.hpp"
#include "smallgain/signals.hpp"

using namespace smallgain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Signal sine(double amp, double horizon, double dt = 0.01) {
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;
  return Signal::sample(0.0, dt, n, [amp](double t) { return amp * std::sin(t); });
}

Signal decay(double c, double horizon, double dt = 0.01) {
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;
  return Signal::sample(0.0, dt, n, [c](double t) { return std::exp(-t) + c; });
}

Signal random_walk(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> step(0.0, 0.1);
  std::vector<double> data(n * dim);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) data[i * dim + j] = data[(i - 1) * dim + j] + step(rng);
  }
  return Signal(0.0, 0.1, dim, std::move(data));
}

}  // namespace

TEST_CASE("amplitude of a constant is zero", "[signals]") {
  const auto s = Signal::scalar(0.0, 0.1, std::vector<double>(100, 3.25));
  CHECK(asymptotic_amplitude(s) == 0.0);
  CHECK(omega_limit_diameter(s) == 0.0);
}

TEST_CASE("amplitude of a sine is twice its amplitude", "[signals]") {
  for (double a : {0.1, 1.0, 10.0}) {
    const auto s = sine(a, 40.0 * std::numbers::pi);
    CHECK_THAT(asymptotic_amplitude(s, 0.5), WithinRel(2.0 * a, 0.01));
    CHECK_THAT(omega_limit_diameter(s, 0.5), WithinRel(2.0 * a, 0.01));
  }
}

TEST_CASE("amplitude of a decaying exponential is its tail drop", "[signals]") {
  const auto s = decay(5.0, 30.0);
  CHECK(asymptotic_amplitude(s, 0.5) <= std::exp(-15.0));
}

TEST_CASE("tail too short is insufficient data", "[signals]") {
  const auto s = Signal::scalar(0.0, 1.0, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(asymptotic_amplitude(s, 0.1), InsufficientDataError);
  CHECK_THROWS_AS(asymptotic_amplitude(s, 0.0), DomainError);
}

TEST_CASE("vector amplitude is the Euclidean tail diameter", "[signals]") {
  // Circle of radius 2: diameter 4.
  const std::size_t n = 4001;
  std::vector<double> data;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 0.01 * static_cast<double>(i);
    data.push_back(2.0 * std::cos(t));
    data.push_back(2.0 * std::sin(t));
  }
  const Signal s(0.0, 0.01, 2, data);
  CHECK_THAT(asymptotic_amplitude(s, 0.5), WithinRel(4.0, 1e-3));
}

TEST_CASE("converges_to", "[signals]") {
  const auto c = Signal::scalar(0.0, 0.1, std::vector<double>(50, 0.3));
  CHECK(converges_to(c, BoxSet::interval(0.0, 1.0), 1e-12));
  const auto e = Signal::sample(0.0, 0.01, 2001, [](double t) { return std::exp(-t); });
  CHECK(converges_to(e, BoxSet::interval(0.0, 0.0), 1e-3, 0.5));
  CHECK_FALSE(converges_to(sine(2.0, 100.0), BoxSet::interval(0.0, 0.0), 1.0, 0.5));
}

TEST_CASE("limit_value", "[signals]") {
  const auto c = Signal::scalar(0.0, 0.1, std::vector<double>(50, 0.1 + 0.2));
  const auto lc = limit_value(c, 1e-9);
  REQUIRE(lc);
  CHECK(lc->front() == 0.1 + 0.2);

  const auto ld = limit_value(decay(5.0, 30.0), 1e-3);
  REQUIRE(ld);
  CHECK_THAT(ld->front(), WithinAbs(5.0, 1e-3));

  CHECK_FALSE(limit_value(sine(1.5, 100.0), 1.5));
}

TEST_CASE("box diameter", "[signals]") {
  CHECK(diameter(BoxSet::interval(0.0, 0.0)) == 0.0);
  CHECK_THAT(diameter(BoxSet::interval(1.6, 2.0)), WithinAbs(0.4, 1e-15));
  CHECK(diameter(BoxSet({Interval{0.0, 3.0}, Interval{0.0, 4.0}})) == 5.0);
  CHECK_THROWS_AS(make_interval(1.0, 0.0), DomainError);
}

TEST_CASE("amplitude is monotone in the tail fraction", "[signals][property]") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_walk(rng, 800, trial % 2 == 0 ? 1 : 3);
    double prev = asymptotic_amplitude(s, 1.0);
    for (double tf : {0.8, 0.6, 0.4, 0.2, 0.05}) {
      const double a = asymptotic_amplitude(s, tf);
      CHECK(a <= prev);
      prev = a;
    }
  }
}

TEST_CASE("amplitude is bounded by twice the tail radius", "[signals][property]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_walk(rng, 600, 1 + trial % 3);
    double radius = 0.0;
    for (std::size_t i = tail_start(s, 0.5); i < s.size(); ++i) {
      double r2 = 0.0;
      for (double v : s.at(i)) r2 += v * v;
      radius = std::max(radius, std::sqrt(r2));
    }
    CHECK(asymptotic_amplitude(s, 0.5) <= 2.0 * radius * (1.0 + 1e-12));
    CHECK(omega_limit_diameter(s, 0.5) == asymptotic_amplitude(s, 0.5));
  }
}

TEST_CASE("a present limit lies within eps plus amplitude", "[signals][property]") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> c(-3.0, 3.0), a(0.0, 1e-4);
  for (int trial = 0; trial < 30; ++trial) {
    const double center = c(rng), amp = a(rng);
    const auto s = Signal::sample(0.0, 0.05, 400, [&](double t) { return center + amp * std::sin(3.0 * t); });
    const double eps = 1e-3;
    const auto lim = limit_value(s, eps);
    REQUIRE(lim);
    CHECK(converges_to(s, BoxSet::point(*lim), eps + asymptotic_amplitude(s)));
  }
}

TEST_CASE("interpolation clamps and snaps to the grid", "[signals]") {
  const auto s = Signal::scalar(1.0, 0.5, {0.0, 1.0, 4.0});
  CHECK(s.interpolate(0.0) == 0.0);
  CHECK(s.interpolate(10.0) == 4.0);
  CHECK(s.interpolate(1.25) == 0.5);
  CHECK(s.interpolate(1.5 + 1e-12) == 1.0);
}

TEST_CASE("CSV round trip keeps every bit", "[signals]") {
  std::mt19937_64 rng(1);
  const auto s = random_walk(rng, 50, 2);
  std::stringstream ss;
  write_csv(ss, s);
  CHECK(ss.str().rfind("t,x1,x2\n", 0) == 0);
  const auto back = read_csv(ss);
  CHECK(back.dim() == 2);
  CHECK(back.data() == s.data());
  CHECK(back.dt() == s.dt());

  std::stringstream uneven("t,x1\n0,1\n0.1,2\n0.5,3\n");
  CHECK_THROWS_AS(read_csv(uneven), DomainError);
}
