#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lossnet/analytic.hpp"

using namespace lossnet;

namespace {
ModelParams reference(int n) {
  ModelParams p;
  p.n = n;
  return p;  // lambda_h=0.7, lambda_l=0.8, mu=1, r_h=2, r_l=1
}
}  // namespace

TEST_CASE("fluid reward closed form") {
  CHECK(fluid_reward(reference(100)) == doctest::Approx(170.0).epsilon(1e-12));

  ModelParams p = reference(100);
  p.r_l = 1e-12;  // r_l must stay positive; the limit is r_h channel only
  CHECK(fluid_reward(p) == doctest::Approx(100 * 2.0 * 0.7).epsilon(1e-9));

  p = reference(100);
  p.mu = p.lambda_h + 1e-9;
  CHECK(fluid_reward(p) == doctest::Approx(100 * 2.0 * 0.7).epsilon(1e-6));
}

TEST_CASE("sss window constant at the reference rates") {
  CHECK(sss_window_constant(reference(100)) == doctest::Approx(501.5 / 0.01575).epsilon(1e-12));
  // c_override = 10, N = 3 (nearest integer check of c*log(N)/N)
  ModelParams p = reference(3);
  CHECK(sss_window(p, 10.0) == doctest::Approx(10.0 * std::log(3.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("window constant decreases in the overload margin") {
  ModelParams a = reference(100);
  ModelParams b = a;
  b.lambda_l = 1.0;  // larger lambda_h + lambda_l - mu
  CHECK(sss_window_constant(b) < sss_window_constant(a));
  ModelParams c = a;
  c.lambda_l = 0.75;
  CHECK(sss_window_constant(c) > sss_window_constant(a));
}

TEST_CASE("two-state stationary distribution") {
  BirthDeathSpec spec;
  spec.birth = {3.0, 0.0};
  spec.death = {0.0, 5.0};
  const auto pi = stationary_distribution(spec);
  CHECK(pi[0] == doctest::Approx(5.0 / 8.0));
  CHECK(pi[1] == doctest::Approx(3.0 / 8.0));
}

TEST_CASE("Erlang-B product form, N=2 offered load 3") {
  BirthDeathSpec spec;
  spec.birth = {3.0, 3.0, 0.0};
  spec.death = {0.0, 1.0, 2.0};
  const auto pi = stationary_distribution(spec);
  CHECK(pi[2] == doctest::Approx(4.5 / 8.5).epsilon(1e-12));
  double total = 0.0;
  for (double p : pi) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("stationary distribution satisfies global balance") {
  ModelParams p = reference(50);
  const auto chain = threshold_busy_chain(p, 5);
  const auto pi = stationary_distribution(chain);
  for (std::size_t k = 0; k < pi.size(); ++k) {
    double flux = -(chain.birth[k] + chain.death[k]) * pi[k];
    if (k > 0) flux += chain.birth[k - 1] * pi[k - 1];
    if (k + 1 < pi.size()) flux += chain.death[k + 1] * pi[k + 1];
    CHECK(std::abs(flux) < 1e-10);
  }
}

TEST_CASE("threshold reward exact values") {
  CHECK(threshold_reward(reference(2), 0) ==
        doctest::Approx(4.4 * (1.0 - 4.5 / 8.5)).epsilon(1e-12));

  // theta = N: L never enters; M/M/N/N with load lambda_h/mu
  const ModelParams p = reference(3);
  BirthDeathSpec erlang;
  erlang.birth = {3 * 0.7, 3 * 0.7, 3 * 0.7, 0.0};
  erlang.death = {0.0, 1.0, 2.0, 3.0};
  const auto pi = stationary_distribution(erlang);
  CHECK(threshold_reward(p, 3) ==
        doctest::Approx(2.0 * 3 * 0.7 * (1.0 - pi[3])).epsilon(1e-12));
}

TEST_CASE("fluid dominates every threshold") {
  for (int n : {2, 10, 50}) {
    const ModelParams p = reference(n);
    const double fluid = fluid_reward(p);
    for (int theta = 0; theta <= n; ++theta) CHECK(threshold_reward(p, theta) <= fluid + 1e-9);
  }
}

TEST_CASE("threshold reward eventually decreases past its argmax") {
  const ModelParams p = reference(50);
  const int best = best_threshold(p);
  double prev = threshold_reward(p, best);
  for (int theta = best + 1; theta <= p.n; ++theta) {
    const double v = threshold_reward(p, theta);
    CHECK(v <= prev + 1e-9);
    prev = v;
  }
}

TEST_CASE("race probability boundaries and symmetry") {
  const ModelParams p = reference(50);
  CHECK(race_probability(p, 7, 1, 7) == doctest::Approx(1.0));
  CHECK(race_probability(p, 1, 1, 7) == doctest::Approx(0.0));

  // constant equal rates reduce to the symmetric gambler's ruin
  BirthDeathSpec flat;
  flat.birth = {1.0, 1.0, 1.0, 0.0};
  flat.death = {0.0, 1.0, 1.0, 1.0};
  CHECK(hit_probability(flat, 1, 0, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("race probability is monotone in the start level") {
  const ModelParams p = reference(50);
  double prev = 0.0;
  for (int y = 1; y <= 7; ++y) {
    const double h = race_probability(p, y, 1, 7);
    CHECK(h >= prev - 1e-12);
    prev = h;
  }
}

TEST_CASE("transient absorption boundaries") {
  const ModelParams p = reference(10);
  CHECK(transient_absorption(p, 3, 0.0) == doctest::Approx(0.0));
  CHECK(transient_absorption(p, 3, 200.0) == doctest::Approx(1.0).epsilon(1e-6));
  // monotone in the horizon
  CHECK(transient_absorption(p, 3, 0.1) < transient_absorption(p, 3, 0.5));
}

TEST_CASE("gambler's ruin closed form") {
  CHECK(walk_ruin_prob(0.5, 2, 0, 5) == doctest::Approx(2.0 / 5.0));
  CHECK(walk_ruin_prob(0.3, 0, 0, 4) == doctest::Approx(0.0));
  CHECK(walk_ruin_prob(0.3, 4, 0, 4) == doctest::Approx(1.0));
  CHECK(walk_ruin_prob(0.6, 1, 0, 3) == doctest::Approx(9.0 / 19.0).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  ModelParams p = reference(10);
  p.lambda_h = 1.2;  // lambda_h > mu
  CHECK_THROWS_AS(fluid_reward(p), std::invalid_argument);
  p = reference(10);
  p.r_h = 0.5;  // r_h < r_l
  CHECK_THROWS_AS(fluid_reward(p), std::invalid_argument);
}
