#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "smallgain/error.hpp"
#include "smallgain/behaviors.hpp"

using namespace smallgain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Signal unit_step(double at, double horizon, double dt) {
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt)) + 1;
  return Signal::sample(0.0, dt, n, [at](double t) { return t < at - 1e-9 ? 0.0 : 1.0; });
}

ScalarMonotoneOde flagship_stage() {
  return ScalarMonotoneOde(ScalarFunction::affine(1.0, 0.0), ScalarFunction::affine(-1.0, 1.0), Interval{0.0, 1.0});
}

}  // namespace

TEST_CASE("zero delay is the identity", "[behaviors]") {
  const auto s = Signal::sample(0.0, 0.1, 30, [](double t) { return std::cos(t); });
  CHECK(apply_delay(s, 0.0, std::nullopt).data() == s.data());
}

TEST_CASE("delay shifts a step", "[behaviors]") {
  const auto s = unit_step(1.0, 5.0, 0.01);
  const auto d = apply_delay(s, 0.5, History::constant(0.0));
  const auto expected = unit_step(1.5, 5.0, 0.01);
  CHECK(d.data() == expected.data());
}

TEST_CASE("delay of a constant with matching history is constant", "[behaviors]") {
  const auto s = Signal::scalar(0.0, 0.1, std::vector<double>(40, 0.7));
  const auto d = apply_delay(s, 0.37, History::constant(0.7));
  for (double v : d.data()) CHECK(v == 0.7);
}

TEST_CASE("positive delay needs a covering history", "[behaviors]") {
  const auto s = Signal::scalar(0.0, 0.1, std::vector<double>(10, 1.0));
  CHECK_THROWS_AS(apply_delay(s, 0.3, std::nullopt), DomainError);
  const auto short_hist = History::sampled(Signal::scalar(-0.1, 0.1, {0.0, 0.0}));
  CHECK_THROWS_AS(apply_delay(s, 0.3, short_hist), DomainError);
}

TEST_CASE("delays compose", "[behaviors][property]") {
  const double dt = 0.01;
  const auto s = Signal::sample(0.0, dt, 2001, [](double t) { return std::sin(1.3 * t) + 0.2 * t; });
  const auto h = History::constant(0.0);

  // Grid-aligned delays compose exactly.
  const auto twice = apply_delay(apply_delay(s, 0.3, h), 0.5, h);
  const auto once = apply_delay(s, 0.8, h);
  for (std::size_t i = 80; i < s.size(); ++i) CHECK(twice.value(i) == once.value(i));

  // Off-grid: linear interpolation error is bounded by max|f''| dt^2 / 8 per
  // lookup, once lookups clear the kink where the history meets the signal.
  const auto twice_off = apply_delay(apply_delay(s, 0.233, h), 0.411, h);
  const auto once_off = apply_delay(s, 0.644, h);
  const double bound = 2.0 * (1.3 * 1.3) * dt * dt / 8.0;
  for (std::size_t i = 66; i < s.size(); ++i) CHECK(std::abs(twice_off.value(i) - once_off.value(i)) <= bound);
}

TEST_CASE("memoryless maps", "[behaviors]") {
  const auto s = Signal::sample(0.0, 0.1, 50, [](double t) { return 0.5 + 0.4 * std::sin(t); });
  CHECK(apply_memoryless(s, MemorylessMap::identity()).data() == s.data());
  const auto flat = apply_memoryless(s, MemorylessMap::inhibition(2.0, 0.0));
  for (double v : flat.data()) CHECK(v == 2.0);
  const auto one = apply_memoryless(Signal::scalar(0.0, 0.1, std::vector<double>(5, 1.0)),
                                    MemorylessMap::inhibition(2.0, 1.0));
  for (double v : one.data()) CHECK(v == 1.0);
  const auto neg = Signal::scalar(0.0, 0.1, {0.1, -0.2});
  CHECK_THROWS_AS(apply_memoryless(neg, MemorylessMap::inhibition(2.0, 1.0)), DomainError);
}

TEST_CASE("inhibition map intervals and Lipschitz constant", "[behaviors]") {
  const auto psi = MemorylessMap::inhibition(2.0, 0.25);
  CHECK(psi.is_decreasing());
  const auto img = psi.map_interval(Interval{0.0, 1.0});
  CHECK(img.lo == 2.0 / 1.25);
  CHECK(img.hi == 2.0);
  CHECK(psi.lipschitz(Interval{0.0, 1.0}) == 0.5);
  const double lip = lipschitz_estimate([&](double x) { return psi(x); }, Interval{0.0, 1.0});
  CHECK(lip <= psi.lipschitz(Interval{0.0, 1.0}));
  CHECK_THAT(lip, WithinAbs(0.5, 1e-4));
}

TEST_CASE("Lipschitz estimates", "[behaviors]") {
  CHECK_THAT(lipschitz_estimate([](double u) { return 3.0 * u; }, Interval{-2.0, 5.0}), WithinRel(3.0, 1e-12));
  CHECK(lipschitz_estimate([](double u) { return 3.0 * u; }, Interval{0.0, 1.0}, 5) == 3.0);
  CHECK_THAT(lipschitz_estimate(oracle::flagship_ginv, Interval{0.0, 10.0}, 10001), WithinAbs(1.0, 1e-3));
  CHECK_THAT(lipschitz_estimate(oracle::flagship_ginv, Interval{1.6, 2.0}, 10001),
             WithinAbs(oracle::flagship_ginv_slope(1.6), 1e-4));
  CHECK(lipschitz_estimate(oracle::flagship_ginv, Interval{1.0, 1.0}) == 0.0);
  CHECK_THROWS_AS(lipschitz_estimate(oracle::flagship_ginv, Interval{0.0, 1.0}, 1), ConfigError);
}

TEST_CASE("Lipschitz estimate grows with the interval", "[behaviors][property]") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(0.0, 5.0);
  for (int trial = 0; trial < 40; ++trial) {
    double lo = d(rng), hi = d(rng);
    if (lo > hi) std::swap(lo, hi);
    // Nested grids: the sub-interval is a union of 10 cells of the outer 101-point grid.
    const double w = (hi - lo) / 100.0;
    const int start = trial % 90;
    const Interval inner{lo + w * start, lo + w * (start + 10)};
    const double outer_est = lipschitz_estimate(oracle::flagship_ginv, Interval{lo, hi}, 101);
    const double inner_est = lipschitz_estimate(oracle::flagship_ginv, inner, 11);
    CHECK(inner_est <= outer_est * (1.0 + 1e-9));
  }
}

TEST_CASE("flagship g and its inverse", "[behaviors]") {
  const auto stage = flagship_stage();
  const auto eq = g_and_inverse(stage);
  CHECK_THAT(eq.g(0.5), WithinRel(1.0, 1e-15));
  CHECK(eq.g(0.0) == 0.0);
  CHECK(std::isinf(stage.g(1.0)));
  for (double u : {0.0, 0.3, 1.0, 2.0, 10.0, 1e4}) {
    CHECK_THAT(eq.g_inv(u), WithinAbs(oracle::flagship_ginv(u), 1e-12));
    CHECK_THAT(stage.g_inverse_slope(u), WithinRel(oracle::flagship_ginv_slope(u), 1e-6));
  }
  CHECK_THROWS_AS(stage.g_inverse(-1.0), DomainError);
}

TEST_CASE("invalid stages are rejected", "[behaviors]") {
  // alpha decreasing
  CHECK_THROWS_AS(ScalarMonotoneOde(ScalarFunction::affine(-1.0, 1.0), ScalarFunction::affine(-1.0, 1.0),
                                    Interval{0.0, 1.0}),
                  InvalidStageError);
  // beta(b) != 0
  CHECK_THROWS_AS(ScalarMonotoneOde(ScalarFunction::affine(1.0, 0.0), ScalarFunction::affine(-1.0, 2.0),
                                    Interval{0.0, 1.0}),
                  InvalidStageError);
  // table undefined on part of the interval
  CHECK_THROWS_AS(ScalarMonotoneOde(ScalarFunction::table({{0.0, 0.0}, {0.5, 1.0}}),
                                    ScalarFunction::affine(-1.0, 1.0), Interval{0.0, 1.0}),
                  InvalidStageError);
}

TEST_CASE("table stages use the same equilibrium", "[behaviors]") {
  const ScalarMonotoneOde table(ScalarFunction::table({{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}}),
                                ScalarFunction::table({{0.0, 1.0}, {0.5, 0.5}, {1.0, 0.0}}), Interval{0.0, 1.0});
  for (double u : {0.25, 1.0, 4.0}) CHECK_THAT(table.g_inverse(u), WithinAbs(oracle::flagship_ginv(u), 1e-12));
}

TEST_CASE("g inverse is an equilibrium for random stages", "[behaviors][property]") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logu(-3.0, 3.0);
  for (int trial = 0; trial < 60; ++trial) {
    const auto rs = oracle::random_stage(rng);
    for (int j = 0; j < 5; ++j) {
      const double u = std::pow(10.0, logu(rng));
      const double x = rs.ode.g_inverse(u);
      CHECK(std::abs(rs.ode.rhs(x, u)) <= 1e-9);
      CHECK_THAT(x, WithinAbs(oracle::equilibrium(rs.alpha, rs.beta, rs.a, rs.b, u), 1e-10));
    }
    CHECK(rs.ode.g_inverse(0.0) == rs.a);
  }
}

TEST_CASE("cascade validation and output range", "[behaviors]") {
  auto c = oracle::flagship_cascade(2.0, 0.25);
  CHECK_NOTHROW(c.validate());
  CHECK(c.ode_indices() == std::vector<std::size_t>{0, 2});
  CHECK(c.output_range().lo == 0.0);
  CHECK(c.output_range().hi == 1.0);

  c.stages.push_back(MemorylessStage{MemorylessMap::scale(3.0)});
  CHECK(c.output_range().hi == 3.0);

  CascadeSpec empty;
  CHECK_THROWS_AS(empty.validate(), ConfigError);
  auto bad = oracle::flagship_cascade(2.0, -1.0);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
