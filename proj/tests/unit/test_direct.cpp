#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "cumdamage/direct.hpp"
#include "cumdamage/error.hpp"
#include "cumdamage/simulate.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cumdamage;
using namespace cumdamage::direct;

namespace {

constexpr auto kNone = std::nullopt;

// N-only cost rate under constant strength K: the unit fails before the N-th
// shock iff the first N-1 damages reach K.
double n_only_oracle(double lambda, double mu, double K, double c_N, double c_K, std::uint32_t N) {
  double shocks = 0;
  for (std::uint32_t j = 0; j < N; ++j) shocks += j == 0 ? 1.0 : boost::math::gamma_p(j, mu * K);
  const double p_N = boost::math::gamma_p(N, mu * K);
  return (c_N * p_N + c_K * (1 - p_N)) / (shocks / lambda);
}

// Z-only cost rate under constant strength K: the overshoot past Z is
// exponential, and the shock count to cross Z is 1 + Poisson(mu Z).
double z_only_oracle(double lambda, double mu, double K, double c_Z, double c_K, double Z) {
  const double p_K = std::exp(-mu * (K - Z));
  return (c_Z * (1 - p_K) + c_K * p_K) / ((1 + mu * Z) / lambda);
}

bool within_se(double estimate, double se, double truth, double k = 3) {
  return std::abs(estimate - truth) <= k * se;
}

const Policy kPanel[] = {
    {29.34, kNone, kNone}, {kNone, 10u, kNone}, {kNone, kNone, 2.51}, {31.2, 19u, 4.2},
    {20.0, 5u, kNone},     {30.0, kNone, 3.0},  {kNone, 12u, 3.5},   {5.0, 2u, 1.0},
};

}  // namespace

TEST_CASE("T-only cost rate examples") {
  CHECK(cost_rate_T(test::constant_exp_exp(2), 20.25) == doctest::Approx(0.084).epsilon(0.001 / 0.084));
  CHECK(cost_rate_T(test::expdecay_exp_exp(2), 29.34) == doctest::Approx(0.035).epsilon(0.001 / 0.035));
}

TEST_CASE("T-only cost rate matches the independent quadrature oracle") {
  CHECK(cost_rate_T(test::expdecay_exp_exp(2), 29.34) ==
        doctest::Approx(0.035443203520420137).epsilon(1e-7));
  CHECK(cost_rate_T(test::linear_exp_exp(2), 20.48) == doctest::Approx(0.057580495395331513).epsilon(1e-7));
  CHECK(cost_rate_T(test::constant_exp_exp(2), 20.25) ==
        doctest::Approx(0.083792631472912119).epsilon(1e-7));
  CHECK(cost_rate_T(test::linear_exp_exp(6), 45.0) == doctest::Approx(0.23529281457378939).epsilon(1e-7));
}

TEST_CASE("N-only cost rate examples and constant-strength oracle") {
  CHECK(cost_rate_N(test::constant_exp_exp(2), 9) == doctest::Approx(0.078).epsilon(0.001 / 0.078));
  CHECK(cost_rate_N(test::linear_exp_exp(6), 8) == doctest::Approx(0.070).epsilon(0.001 / 0.070));
  for (std::uint32_t N : {1u, 2u, 9u, 15u, 40u}) {
    for (double c_K : {2.0, 6.0}) {
      CHECK(cost_rate_N(test::constant_exp_exp(c_K), N) ==
            doctest::Approx(n_only_oracle(0.5, 1, 10, 1, c_K, N)).epsilon(1e-9));
    }
  }
}

TEST_CASE("Z-only cost rate examples and constant-strength oracle") {
  CHECK(cost_rate_Z(test::constant_exp_exp(2), 7.93) == doctest::Approx(0.063).epsilon(0.001 / 0.063));
  CHECK(cost_rate_Z(test::expdecay_exp_exp(4), 1.92) == doctest::Approx(0.056).epsilon(0.001 / 0.056));
  for (double Z : {0.5, 4.0, 7.93, 9.99}) {
    for (double c_K : {2.0, 6.0}) {
      CHECK(cost_rate_Z(test::constant_exp_exp(c_K), Z) ==
            doctest::Approx(z_only_oracle(0.5, 1, 10, 1, c_K, Z)).epsilon(1e-9));
    }
  }
}

TEST_CASE("joint cost rate examples") {
  CHECK(cost_rate_TNZ(test::expdecay_exp_exp(4), {31.2, 19u, 4.2}) ==
        doctest::Approx(0.034).epsilon(0.001 / 0.034));
  CHECK(cost_rate_TNZ(test::linear_exp_exp(6), {24.2, 13u, 21.5}) ==
        doctest::Approx(0.052).epsilon(0.001 / 0.052));
  CHECK(cost_rate_TNZ(test::expdecay_exp_exp(6, {0.5, 1.5, 1, 6}), {28.66, 26u, 5.42}) ==
        doctest::Approx(0.018).epsilon(0.001 / 0.018));
  CHECK_THROWS_AS(cost_rate_TNZ(test::expdecay_exp_exp(4), {31.2, kNone, 4.2}), ValidationError);
}

TEST_CASE("equal costs make cost rate times mean time the common cost") {
  const Scenario scenarios[] = {
      test::expdecay_exp_exp(2).with_costs({3, 3, 3, 3.0000001}),
      test::constant_exp_exp(2).with_costs({1.5, 1.5, 1.5, 1.5000001}),
      test::linear_exp_exp(2).with_costs({1, 1, 1, 1.0000001}),
  };
  for (const auto& s : scenarios) {
    for (const auto& p : kPanel) {
      if (!validate_policy(s, p).empty()) continue;
      CAPTURE(describe(p));
      const Evaluation e = evaluate(s, p);
      const double c = s.costs.c_T;
      const double weighted = c * (1 - e.probabilities.p_K) + s.costs.c_K * e.probabilities.p_K;
      CHECK(std::abs(e.cost_rate * e.mean_time - weighted) <= 1e-8 * c);
      CHECK(std::abs(e.cost_rate * mean_time_to_replacement(s, p) - c) <= 1e-6 * c);
    }
  }
  const Scenario s = test::linear_exp_exp(2);
  for (const auto& p : kPanel) {
    if (!validate_policy(s, p).empty()) continue;
    const Evaluation e = evaluate(s, p);
    const double rebuilt = (e.probabilities.p_T * s.costs.c_T + e.probabilities.p_N * s.costs.c_N +
                            e.probabilities.p_Z * s.costs.c_Z + e.probabilities.p_K * s.costs.c_K) /
                           e.mean_time;
    CHECK(e.cost_rate == doctest::Approx(rebuilt).epsilon(1e-12));
  }
}

TEST_CASE("probabilities partition and limits") {
  const Scenario scenarios[] = {test::expdecay_exp_exp(4), test::constant_exp_exp(2), test::linear_exp_exp(6),
                                test::expdecay_exp_exp(6, {0.5, 1.5, 1, 6})};
  for (const auto& s : scenarios) {
    for (const auto& p : kPanel) {
      if (!validate_policy(s, p).empty()) continue;
      const Probabilities q = evaluate(s, p).probabilities;
      CHECK(std::abs(q.p_T + q.p_N + q.p_Z + q.p_K - 1) <= 1e-8);
      for (double v : {q.p_T, q.p_N, q.p_Z, q.p_K}) CHECK((v >= -1e-12 && v <= 1 + 1e-12));
    }
    const Policy tiny{1e-6, 5u, initial_strength(s.strength) * 0.5};
    const Probabilities q = replacement_probabilities(s, tiny);
    CHECK(q.p_T == doctest::Approx(1).epsilon(1e-5));
    CHECK(mean_time_to_replacement(s, tiny) == doctest::Approx(1e-6).epsilon(1e-5));
    // A single-shock cycle, cut short where a linear strength reaches zero.
    const double cut = -std::expm1(-zero_time(s.strength) / s.mean_inter_arrival());
    CHECK(mean_time_to_replacement(s, {kNone, 1u, kNone}) ==
          doctest::Approx(s.mean_inter_arrival() * cut).epsilon(1e-14));
  }
}

TEST_CASE("series truncation audit") {
  NumericsConfig audit;
  audit.extra_series_terms = 100;
  const Scenario scenarios[] = {test::expdecay_exp_exp(4), test::constant_exp_exp(2), test::linear_exp_exp(6)};
  for (const auto& s : scenarios) {
    for (const auto& p : kPanel) {
      if (!validate_policy(s, p).empty()) continue;
      CAPTURE(describe(p));
      const Evaluation a = evaluate(s, p);
      const Evaluation b = evaluate(s, p, audit);
      CHECK(std::abs(a.cost_rate - b.cost_rate) <= 1e-9 * a.cost_rate);
      CHECK(std::abs(a.mean_time - b.mean_time) <= 1e-9 * a.mean_time);
      CHECK(std::abs(a.probabilities.p_K - b.probabilities.p_K) <= 1e-9);
    }
  }
}

TEST_CASE("inner damage quadrature matches the closed form") {
  for (std::uint64_t j : {0ull, 1ull, 4ull, 19ull, 60ull}) {
    for (double Z : {0.5, 4.2, 21.5}) {
      const double closed = inner_damage_mass(j, 0.5, Z, Z + 3, false);
      const double quad = inner_damage_mass(j, 0.5, Z, Z + 3, true);
      CHECK(std::abs(closed - quad) <= 1e-9 * std::max(closed, 1e-300) + 1e-15);
    }
  }
  NumericsConfig quad;
  quad.inner_damage_quadrature = true;
  const Scenario s = test::expdecay_exp_exp(4);
  for (const auto& p : {Policy{31.2, 19u, 4.2}, Policy{kNone, kNone, 2.51}, Policy{kNone, 12u, 3.5}}) {
    CHECK(evaluate(s, p, quad).cost_rate == doctest::Approx(evaluate(s, p).cost_rate).epsilon(1e-7));
  }
}

TEST_CASE("the joint formula degenerates to the T-only formula") {
  NumericsConfig cfg;
  const auto cap = static_cast<std::uint32_t>(cfg.series_cap);
  for (double c_K : {2.0, 4.0, 6.0}) {
    const Scenario s = test::constant_exp_exp(c_K);
    for (double T : {5.0, 20.25, 60.0}) {
      CHECK(cost_rate_TNZ(s, {T, cap, 10.0}, cfg) == doctest::Approx(cost_rate_T(s, T, cfg)).epsilon(1e-8));
    }
  }
  // On decaying curves every crossing of K(T) before T becomes a damage-level
  // replacement, so agreement needs T short enough for such crossings to be rare.
  for (const auto& s : {test::expdecay_exp_exp(2), test::linear_exp_exp(2), test::expdecay_exp_exp(4),
                        test::linear_exp_exp(6)}) {
    for (double T : {2.0, 5.0, 10.0}) {
      const double Z = strength_at(s.strength, T);
      CAPTURE(s.label);
      CAPTURE(T);
      CHECK(std::abs(cost_rate_TNZ(s, {T, cap, Z}, cfg) - cost_rate_T(s, T, cfg)) <= 2e-3);
    }
  }
}

TEST_CASE("huge planned times leave the joint policy at its Z-only value") {
  const Scenario s = test::constant_exp_exp(2);
  for (double T : {1e3, 1e5, 1e7}) {
    CHECK(cost_rate_TNZ(s, {T, 100000u, 7.93}) == doctest::Approx(cost_rate_Z(s, 7.93)).epsilon(1e-9));
  }
  const Scenario decay = test::expdecay_exp_exp(4);
  CHECK(evaluate(decay, {1e6, 50u, kNone}).cost_rate ==
        doctest::Approx(cost_rate_N(decay, 50)).epsilon(1e-9));
}

TEST_CASE("constant strength has no z-horizon") {
  const Scenario s = test::constant_exp_exp(2);
  const Evaluation general = evaluate(s, {1e6, kNone, 7.93});
  CHECK(general.cost_rate == doctest::Approx(cost_rate_Z(s, 7.93)).epsilon(1e-8));
  CHECK(evaluate(s, {1e6, 100000u, 7.93}).cost_rate == doctest::Approx(cost_rate_Z(s, 7.93)).epsilon(1e-8));
}

TEST_CASE("Z at the initial strength matches simulation without a damage trigger") {
  const Scenario s = test::expdecay_exp_exp(2);
  const double direct = cost_rate_Z(s, 100);
  CHECK(evaluate(s, {kNone, kNone, 100.0}).probabilities.p_Z <= 1e-12);
  const auto mc = estimate_cost_rate(s, {1e4, kNone, kNone}, 100000, 17);
  CHECK(within_se(mc.cost_rate, mc.std_error_cost_rate, direct));
}

TEST_CASE("simulation agrees with the direct engine") {
  const Scenario constant = test::constant_exp_exp(2);
  const auto c = estimate_cost_rate(constant, {20.25, kNone, kNone}, 100000, 21);
  CHECK(within_se(c.cost_rate, c.std_error_cost_rate, cost_rate_T(constant, 20.25)));

  const Scenario decay = test::expdecay_exp_exp(2);
  const auto t = estimate_cost_rate(decay, {29.34, kNone, kNone}, 100000, 22);
  const Probabilities qt = evaluate(decay, {29.34, kNone, kNone}).probabilities;
  CHECK(t.p_T + t.p_K == 1);
  const double se_t = std::sqrt(qt.p_T * (1 - qt.p_T) / 1e5);
  CHECK(within_se(t.p_T, se_t, qt.p_T));

  const Scenario joint = test::expdecay_exp_exp(4);
  const Policy p{31.2, 19u, 4.2};
  const auto j = estimate_cost_rate(joint, p, 100000, 23);
  const Probabilities q = replacement_probabilities(joint, p);
  const double truth[] = {q.p_T, q.p_N, q.p_Z, q.p_K};
  const double est[] = {j.p_T, j.p_N, j.p_Z, j.p_K};
  for (int k = 0; k < 4; ++k) {
    CHECK(within_se(est[k], std::sqrt(truth[k] * (1 - truth[k]) / 1e5), truth[k]));
  }
  CHECK(within_se(j.cost_rate, j.std_error_cost_rate, cost_rate_TNZ(joint, p)));
}

TEST_CASE("the evaluator matches the free functions") {
  const Scenario s = test::expdecay_exp_exp(4);
  const Evaluator ev(s);
  for (const auto& p : kPanel) {
    CAPTURE(describe(p));
    CHECK(ev(p).cost_rate == doctest::Approx(evaluate(s, p).cost_rate).epsilon(1e-12));
    CHECK(ev(p).cost_rate == ev(p).cost_rate);
  }
}

TEST_CASE("unsupported scenarios and invalid settings") {
  const Scenario ln(LogNormal(0, 1), IidDamage{Weibull(1, 2)}, ConstantStrength(10), {1, 1, 1, 2});
  CHECK_FALSE(supports(ln));
  CHECK(supports(test::linear_exp_exp()));
  CHECK_THROWS_AS(evaluate(ln, {10.0, kNone, kNone}), UnsupportedError);
  const Scenario dep(Exponential(1), DependentAdditive(0.5, 1), ConstantStrength(10), {1, 1, 1, 2});
  CHECK_THROWS_AS(cost_rate_T(dep, 10), UnsupportedError);
  CHECK_THROWS_AS(cost_rate_Z(test::constant_exp_exp(), 11), ValidationError);
  CHECK_THROWS_AS(evaluate(test::constant_exp_exp(), {}), ValidationError);

  NumericsConfig bad;
  bad.horizon_quantile = 1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = {};
  bad.series_cap = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_NOTHROW(NumericsConfig{}.validate());
}
