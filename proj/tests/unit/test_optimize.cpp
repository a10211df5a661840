#include <cmath>
#include <memory>

#include "cumdamage/direct.hpp"
#include "cumdamage/error.hpp"
#include "cumdamage/optimize.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cumdamage;

namespace {

constexpr auto kNone = std::nullopt;

double parabola(const Policy& p) { return (*p.T - 3) * (*p.T - 3); }

Objective direct_for(const Scenario& s) {
  return direct_objective(std::make_shared<const direct::Evaluator>(s));
}

SearchSpace space_of(const Scenario& s, std::optional<Range> T, std::optional<IntRange> N,
                     std::optional<Range> Z) {
  SearchSpace space;
  space.T = T;
  space.N = N;
  space.Z = Z;
  space.strength = s.strength;
  return space;
}

void check_trace(const OptimResult& r, const SearchSpace& space) {
  double lowest = INFINITY;
  for (const auto& e : r.trace) {
    CHECK(space.feasible(e.policy));
    lowest = std::min(lowest, e.value);
  }
  CHECK(r.best_value == lowest);
  CHECK(space.feasible(r.best_policy));
  CHECK(r.evaluations == r.trace.size());
}

bool same(const OptimResult& a, const OptimResult& b) {
  if (a.best_policy != b.best_policy || a.best_value != b.best_value || a.trace.size() != b.trace.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    if (a.trace[i].policy != b.trace[i].policy || a.trace[i].value != b.trace[i].value ||
        a.trace[i].accepted != b.trace[i].accepted) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("grid search on a synthetic parabola") {
  SearchSpace space;
  space.T = Range{0, 10};
  GridConfig cfg;
  cfg.passes = 2;
  const OptimResult r = grid_search(parabola, space, cfg);
  const double resolution = 10.0 / (cfg.coarse_points - 1) / cfg.refine_factor;
  CHECK(std::abs(*r.best_policy.T - 3) <= resolution);
  CHECK(r.best_value <= resolution * resolution);
  REQUIRE(r.coarse_best.has_value());
  CHECK(*r.coarse_best >= r.best_value);
  check_trace(r, space);
}

TEST_CASE("annealing on a synthetic parabola") {
  SearchSpace space;
  space.T = Range{0, 10};
  const OptimResult r = simulated_annealing(parabola, space, {}, 5);
  CHECK(r.best_value <= 1e-3);
  CHECK(r.method == Method::Anneal);
  check_trace(r, space);
}

TEST_CASE("grid search recovers the Table 1 planned time") {
  const Scenario s = test::expdecay_exp_exp(2);
  const SearchSpace space = space_of(s, Range{1, 60}, kNone, kNone);
  const OptimResult r = grid_search(direct_for(s), space);
  CHECK(*r.best_policy.T == doctest::Approx(29.34).epsilon(0.5 / 29.34));
  CHECK(std::abs(r.best_value - 0.035) <= 0.001);
}

TEST_CASE("grid search on the Table 2 joint row") {
  const Scenario s = test::expdecay_exp_exp(4);
  const SearchSpace space = space_of(s, Range{1, 60}, IntRange{1, 60}, Range{0.5, 100});
  const Objective f = direct_for(s);
  const OptimResult r = grid_search(f, space);
  CHECK(std::abs(*r.best_policy.T - 31.2) <= 1);
  CHECK(std::abs(*r.best_policy.Z - 4.2) <= 0.5);
  CHECK(std::abs(r.best_value - 0.034) <= 0.002);
  // The cost rate is nearly flat in N around the optimum.
  CHECK(f({31.2, 19u, 4.2}) - r.best_value <= 2e-4);
  check_trace(r, space);
}

TEST_CASE("simulation-backed annealing on the Table 2 joint row") {
  const Scenario s = test::expdecay_exp_exp(4);
  const SearchSpace space = space_of(s, Range{1, 60}, IntRange{1, 60}, Range{0.5, 100});
  const auto bank = std::make_shared<const ReplicationBank>(s, 10000, 11, bank_horizon(space));
  const Objective f = simulation_objective(bank, s.costs);
  const OptimResult a = simulated_annealing(f, space, {}, 11);
  CHECK(std::abs(a.best_value - 0.034) <= 0.003);
  check_trace(a, space);
  const OptimResult b = simulated_annealing(f, space, {}, 11);
  CHECK(same(a, b));
  const OptimResult c = simulated_annealing(f, space, {}, 12);
  CHECK_FALSE(same(a, c));
}

TEST_CASE("grid search is deterministic and independent of worker count") {
  const Scenario s = test::linear_exp_exp(6);
  const SearchSpace space = space_of(s, Range{1, 50}, IntRange{1, 60}, Range{0.5, 50});
  const OptimResult one = grid_search(direct_for(s), space);
  GridConfig four;
  four.workers = 4;
  CHECK(same(one, grid_search(direct_for(s), space, four)));
  CHECK(same(one, grid_search(direct_for(s), space)));
}

TEST_CASE("scaling the costs keeps the grid argmin") {
  for (const Scenario& s : {test::expdecay_exp_exp(2), test::linear_exp_exp(6), test::constant_exp_exp(4)}) {
    const SearchSpace space = space_of(s, Range{1, 60}, IntRange{1, 60}, kNone);
    const OptimResult base = grid_search(direct_for(s), space);
    for (double k : {0.5, 3.0, 10.0}) {
      const OptimResult scaled = grid_search(direct_for(s.with_costs(s.costs.scaled(k))), space);
      CHECK(scaled.best_policy == base.best_policy);
      CHECK(scaled.best_value == doctest::Approx(k * base.best_value).epsilon(1e-12));
    }
  }
  const Scenario s = test::expdecay_exp_exp(4);
  const SearchSpace space = space_of(s, Range{1, 60}, IntRange{1, 40}, kNone);
  const auto bank = std::make_shared<const ReplicationBank>(s, 5000, 3, bank_horizon(space));
  const OptimResult base = grid_search(simulation_objective(bank, s.costs), space);
  const OptimResult scaled = grid_search(simulation_objective(bank, s.costs.scaled(4)), space);
  CHECK(scaled.best_policy == base.best_policy);
  CHECK(scaled.best_value == 4 * base.best_value);
}

TEST_CASE("annealing at least matches the coarse grid on the Exp/Exp panel") {
  struct Case {
    Scenario scenario;
    SearchSpace space;
  };
  const Scenario d2 = test::expdecay_exp_exp(2), c4 = test::constant_exp_exp(4), l6 = test::linear_exp_exp(6),
                 d4 = test::expdecay_exp_exp(4), l6j = test::linear_exp_exp(6);
  const Case cases[] = {
      {d2, space_of(d2, Range{1, 60}, kNone, kNone)},
      {d2, space_of(d2, kNone, IntRange{1, 60}, kNone)},
      {d2, space_of(d2, kNone, kNone, Range{0.5, 100})},
      {c4, space_of(c4, Range{1, 60}, kNone, kNone)},
      {c4, space_of(c4, kNone, kNone, Range{0.5, 10})},
      {l6, space_of(l6, kNone, IntRange{1, 60}, kNone)},
      {d4, space_of(d4, Range{1, 60}, IntRange{1, 60}, Range{0.5, 100})},
      {l6j, space_of(l6j, Range{1, 50}, IntRange{1, 60}, Range{0.5, 50})},
  };
  std::uint64_t seed = 40;
  for (const auto& c : cases) {
    const Objective f = direct_for(c.scenario);
    const OptimResult grid = grid_search(f, c.space);
    const OptimResult sa = simulated_annealing(f, c.space, {}, ++seed);
    CAPTURE(c.scenario.label);
    CAPTURE(describe(sa.best_policy));
    CHECK(sa.best_value <= *grid.coarse_best + 1e-9);
    check_trace(sa, c.space);
  }
}

TEST_CASE("infeasible and invalid search spaces") {
  const Scenario s = test::expdecay_exp_exp(2);
  const SearchSpace infeasible = space_of(s, Range{50, 60}, kNone, Range{90, 100});
  CHECK_THROWS_AS(grid_search(direct_for(s), infeasible), InfeasibleSpaceError);
  CHECK_THROWS_AS(simulated_annealing(direct_for(s), infeasible, {}, 1), InfeasibleSpaceError);
  CHECK_THROWS_AS(space_of(s, Range{5, 1}, kNone, kNone).validate(), ValidationError);
  CHECK_THROWS_AS(space_of(s, kNone, kNone, Range{1, 150}).validate(), ValidationError);
  CHECK_THROWS_AS(space_of(s, kNone, IntRange{0, 5}, kNone).validate(), ValidationError);
  CHECK_THROWS_AS(SearchSpace{}.validate(), ValidationError);
  GridConfig bad;
  bad.coarse_points = 1;
  CHECK_THROWS_AS(grid_search(parabola, space_of(s, Range{1, 5}, kNone, kNone), bad), ValidationError);
  AnnealConfig cool;
  cool.cooling_ratio = 1;
  CHECK_THROWS_AS(simulated_annealing(parabola, space_of(s, Range{1, 5}, kNone, kNone), cool, 1),
                  ValidationError);
}

TEST_CASE("ties go to the lexicographically smallest cell") {
  SearchSpace space;
  space.T = Range{2, 4};
  space.N = IntRange{3, 9};
  const OptimResult r = grid_search([](const Policy&) { return 1.0; }, space);
  CHECK(r.best_policy == Policy{2.0, 3u, kNone});
}

TEST_CASE("feasibility projection") {
  const Scenario s = test::expdecay_exp_exp(2);
  const SearchSpace space = space_of(s, Range{1, 60}, kNone, Range{0.5, 100});
  CHECK(space.feasible({29.0, kNone, 5.0}));
  CHECK_FALSE(space.feasible({31.2, kNone, 50.0}));
  CHECK_FALSE(space.feasible({29.0, 4u, 5.0}));
  const auto lowered = project_feasible(space, {31.2, kNone, 4.5});
  REQUIRE(lowered.has_value());
  CHECK(space.feasible(*lowered));
  CHECK(*lowered->T == 31.2);
  CHECK(*lowered->Z == doctest::Approx(strength_at(s.strength, 31.2)).epsilon(1e-14));
  const auto earlier = project_feasible(space, {59.0, kNone, 50.0});
  REQUIRE(earlier.has_value());
  CHECK(*earlier->Z == 50.0);
  CHECK(*earlier->T == doctest::Approx(std::log(2.0) / 0.1).epsilon(1e-12));
  CHECK(space.feasible(*earlier));
}

TEST_CASE("default search space and bank horizon") {
  const Scenario s = test::expdecay_exp_exp(2);
  const SearchSpace space = default_search_space(s, true, true, true);
  CHECK(space.T->low == doctest::Approx(0.25));
  CHECK(space.T->high == doctest::Approx(125));
  CHECK(space.N->low == 1);
  CHECK(space.N->high == 200);
  CHECK(space.Z->low == doctest::Approx(5));
  CHECK(space.Z->high == 100);
  const auto h = bank_horizon(space);
  CHECK(*h.t_max == space.T->high);
  CHECK(*h.n_max == 200);
  CHECK_FALSE(default_search_space(s, false, false, true).T.has_value());
  CHECK(method_name(Method::Grid) == "grid");
  CHECK(method_name(Method::Anneal) == "anneal");
}
