#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "smallgain/error.hpp"
#include "smallgain/certify.hpp"

using namespace smallgain;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ScalarMonotoneOde flagship_stage() {
  return ScalarMonotoneOde(ScalarFunction::affine(1.0, 0.0), ScalarFunction::affine(-1.0, 1.0), Interval{0.0, 1.0});
}

std::vector<double> k_grid() {
  std::vector<double> ks;
  for (int i = 0; i <= 40; ++i) ks.push_back(0.05 * i);
  return ks;
}

}  // namespace

TEST_CASE("single-stage global certificate", "[certify]") {
  const auto c = oracle::flagship_cascade(2.0, 0.25, 1);
  const auto cert = certify(c, GainMode::global);
  REQUIRE(cert.per_stage.size() == 1);
  CHECK_THAT(cert.per_stage[0].lambda, WithinAbs(oracle::flagship_ginv_slope(0.0), 1e-3));
  REQUIRE(cert.k_max);
  CHECK_THAT(*cert.k_max, WithinAbs(0.5, 1e-3));
  CHECK(cert.contraction.holds);
  CHECK(cert.contraction.exact);
  CHECK_THAT(cert.loop_factor, WithinAbs(0.5, 1e-3));
  CHECK(cert.input_interval.lo == 0.0);
  CHECK(cert.input_interval.hi == 2.0);
  REQUIRE(cert.predicted_limits);
  const auto expected = oracle::flagship_closed_loop(1, 2.0, 0.25);
  CHECK_THAT(cert.predicted_limits->states[0], WithinAbs(expected.states[0], 1e-11));
  CHECK_THAT(cert.predicted_limits->input, WithinAbs(expected.input, 1e-11));
}

TEST_CASE("zero feedback is a trivial contraction", "[certify]") {
  const auto c = oracle::flagship_cascade(2.0, 0.0);
  const auto cert = certify(c, GainMode::global);
  CHECK(cert.feedback_gain.is_zero());
  CHECK(cert.contraction.holds);
  CHECK(cert.loop_factor == 0.0);
  REQUIRE(cert.predicted_limits);
  const double x1 = oracle::flagship_ginv(2.0);
  CHECK_THAT(cert.predicted_limits->states[0], WithinAbs(x1, 1e-11));
  CHECK_THAT(cert.predicted_limits->states[1], WithinAbs(oracle::flagship_ginv(x1), 1e-11));
  const auto chain = open_loop_chain(c, 2.0);
  CHECK_THAT(chain.output, WithinAbs(oracle::flagship_ginv(x1), 1e-11));
}

TEST_CASE("relative certificate of the two-stage cascade", "[certify]") {
  const auto c = oracle::flagship_cascade(2.0, 0.25);
  const auto rel = certify(c, GainMode::relative);
  const auto glob = certify(c, GainMode::global);
  // U0 = psi([0, 1]) = [2 / 1.25, 2].
  CHECK_THAT(rel.input_interval.lo, WithinRel(1.6, 1e-15));
  CHECK(rel.input_interval.hi == 2.0);
  const double l1 = oracle::flagship_ginv_slope(1.6);
  const double l2 = oracle::flagship_ginv_slope(oracle::flagship_ginv(1.6));
  REQUIRE(rel.forward_gain.linear_slope());
  CHECK_THAT(*rel.forward_gain.linear_slope(), WithinRel(l1 * l2, 1e-4));
  CHECK_THAT(rel.loop_factor, WithinRel(0.5 * l1 * l2, 1e-4));
  CHECK(rel.loop_factor < 0.05);
  CHECK_FALSE(rel.k_max);
  CHECK(rel.contraction.holds);
  CHECK_THAT(glob.loop_factor, WithinAbs(0.5, 1e-3));
}

TEST_CASE("failing certificate carries a witness and no prediction", "[certify]") {
  const auto cert = certify(oracle::flagship_cascade(2.0, 0.75), GainMode::global);
  CHECK_FALSE(cert.contraction.holds);
  REQUIRE(cert.contraction.witness);
  CHECK(*cert.contraction.witness > 0.0);
  CHECK_FALSE(cert.predicted_limits);
  CHECK_THAT(cert.loop_factor, WithinAbs(1.5, 1e-3));
}

TEST_CASE("the global bound is strict", "[certify]") {
  const auto at = certify(oracle::flagship_cascade(2.0, 0.5), GainMode::global);
  CHECK_FALSE(at.contraction.holds);
  const auto below = certify(oracle::flagship_cascade(2.0, 0.499), GainMode::global);
  CHECK(below.contraction.holds);
}

TEST_CASE("certify is deterministic", "[certify][property]") {
  const auto c = oracle::flagship_cascade(2.0, 0.25);
  for (auto mode : {GainMode::global, GainMode::relative}) {
    const auto a = certify(c, mode);
    const auto b = certify(c, mode);
    CHECK(a.loop_factor == b.loop_factor);
    CHECK(a.predicted_limits->states == b.predicted_limits->states);
    for (std::size_t i = 0; i < a.per_stage.size(); ++i) CHECK(a.per_stage[i].lambda == b.per_stage[i].lambda);
    CHECK(a.notes == b.notes);
  }
}

TEST_CASE("verdicts are monotone in k and relative dominates global", "[certify][property]") {
  for (double mu : {1.0, 2.0, 4.0}) {
    bool global_seen_fail = false, relative_seen_fail = false;
    for (double k : k_grid()) {
      const auto c = oracle::flagship_cascade(mu, k);
      const bool g = certify(c, GainMode::global).contraction.holds;
      const bool r = certify(c, GainMode::relative).contraction.holds;
      if (global_seen_fail) CHECK_FALSE(g);
      if (relative_seen_fail) CHECK_FALSE(r);
      global_seen_fail = global_seen_fail || !g;
      relative_seen_fail = relative_seen_fail || !r;
      if (g) CHECK(r);
    }
  }
}

TEST_CASE("fixed point matches the closed form", "[certify]") {
  for (double k : {0.0, 0.1, 0.25, 0.45}) {
    for (int n : {1, 2, 3}) {
      const auto fp = solve_fixed_point(oracle::flagship_cascade(2.0, k, n));
      const auto expected = oracle::flagship_closed_loop(n, 2.0, k);
      CHECK_THAT(fp.input, WithinAbs(expected.input, 1e-11));
      for (int i = 0; i < n; ++i) CHECK_THAT(fp.states[i], WithinAbs(expected.states[i], 1e-11));
      CHECK(fp.output == fp.states.back());
    }
  }
}

TEST_CASE("validation of certified loops", "[certify]") {
  SimConfig cfg{0.01, 200.0, 1e-9, 7};

  const auto c0 = oracle::flagship_cascade(2.0, 0.0);
  const auto r0 = validate_certificate(certify(c0, GainMode::global), c0, cfg, {4});
  CHECK(r0.all_converged);
  CHECK(r0.max_limit_spread < 1e-9);

  const auto c = oracle::flagship_cascade(2.0, 0.25);
  const auto r = validate_certificate(certify(c, GainMode::global), c, cfg, {10});
  CHECK(r.all_converged);
  CHECK(r.predictions_match);
  CHECK(r.max_limit_spread < 2e-5);
  CHECK(r.max_prediction_error < 1e-5);
  CHECK_FALSE(r.offending_run);
  CHECK(r.per_run.size() == 10);

  const auto bad = oracle::flagship_cascade(2.0, 0.75);
  CHECK_THROWS_AS(validate_certificate(certify(bad, GainMode::global), bad, cfg), ConfigError);
}

TEST_CASE("short horizons flag the offending run", "[certify]") {
  const auto c = oracle::flagship_cascade(2.0, 0.25);
  SimConfig cfg{0.01, 3.0, 1e-9, 7};
  const auto r = validate_certificate(certify(c, GainMode::global), c, cfg, {3});
  CHECK_FALSE(r.all_converged);
  REQUIRE(r.offending_run);
  CHECK(*r.offending_run == 0);
}

TEST_CASE("gain inequalities on trivial inputs", "[certify]") {
  const auto stage = flagship_stage();
  SimConfig cfg{0.01, 60.0};
  const auto constant = Signal::scalar(0.0, cfg.dt, std::vector<double>(cfg.steps() + 1, 1.0));
  const double v = cauchy_gain_violation(stage, GainFunction::identity(), constant, 0.5, cfg);
  CHECK(v <= 1e-12);
  CHECK(v >= -1e-12);

  const auto approach = Signal::sample(0.0, cfg.dt, cfg.steps() + 1, [](double t) { return 1.0 - std::exp(-t); });
  const double inc = incremental_gain_violation(stage, GainFunction::identity(), constant, approach, 0.0, 0.9, cfg, 1e-5);
  CHECK(inc < 2e-5);
}

TEST_CASE("flagship stage respects its unit gain empirically", "[certify]") {
  SimConfig cfg{0.01, 200.0};
  const auto rep = empirical_gain_check(flagship_stage(), GainFunction::identity(), {0.0, 2.0}, cfg, 42,
                                        {20, 10});
  CHECK(rep.cauchy.tests == 20);
  CHECK(rep.incremental.tests == 10);
  CHECK(rep.max_violation <= 0.02);
  CHECK(rep.incremental.max_violation <= 2e-4);

  // A gain far below the true slope must be caught.
  const auto tight = empirical_gain_check(flagship_stage(), GainFunction::linear(0.05), {0.0, 2.0}, cfg, 42, {20, 10});
  CHECK(tight.max_violation > 0.0);
  CHECK(tight.worst_input_id);
}
