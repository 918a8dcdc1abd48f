#include <doctest.h>

#include <cmath>

#include "dnaplan/error.hpp"
#include "dnaplan/flow_sim.hpp"
#include "dnaplan/graph.hpp"
#include "support.hpp"

using namespace dnaplan;
using namespace dnaplan::flow;

namespace {

SimScenario scalar_scenario() {
  SimScenario s;
  s.x0 = {0.0};
  s.z = {2.0};
  s.u = {1.0};
  s.e_grid = TimeGrid({0.0, 0.5, 1.0});
  s.e_values = {0.0, 0.1, 0.3};
  s.check();
  return s;
}

std::vector<double> exp_errors(const TimeGrid& g, double rate) {
  std::vector<double> e(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) e[i] = std::sqrt(std::expm1(rate * g[i]) / std::expm1(rate));
  return e;
}

}  // namespace

TEST_CASE("scalar closed forms") {
  const auto s = scalar_scenario();
  CHECK(ideal_state(s, 0.5)[0] == 1.0);
  CHECK(clean_estimate(s, 0.5)[0] == 0.1);
  CHECK(model_velocity(s, 0.5)[0] == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(propagate(s, 0.5, 0.25)[0] == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(s.error_at(0.75) == doctest::Approx(0.2).epsilon(1e-15));
  // s(0.5, 0.25) * e(0.5)^2 = 0.25 * 0.01
  CHECK(verify_lever_identity(s, 0.5, 0.25) <= 1e-16);
  CHECK_THROWS_AS(model_velocity(s, 0.0), DomainError);
  CHECK_THROWS_AS(propagate(s, 0.25, 0.5), DomainError);
  CHECK_THROWS_AS(ideal_state(s, 1.5), DomainError);
}

TEST_CASE("lever identity on random draws") {
  std::mt19937_64 rng(1);
  const auto grid = TimeGrid::uniform(50, true);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = make_scenario(8, grid, exp_errors(grid, 2.0 + seed * 0.2), seed);
    for (int i = 0; i < 20; ++i) {
      const double t = 0.01 + 0.99 * testing::uniform01(rng);
      const double k = t * testing::uniform01(rng);
      REQUIRE(verify_lever_identity(s, t, k) <= 1e-10);
    }
  }
}

TEST_CASE("extracted DNA is the squared error table") {
  const auto grid = TimeGrid::uniform(20);
  const auto s = make_scenario(6, grid, grid.points(), 3);
  const auto dna = extract_dna(s, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(dna.values[i] == doctest::Approx(grid[i] * grid[i]).epsilon(1e-13));
  }
  CHECK(dna.meta["source"] == "flow_sim");
}

TEST_CASE("scenario validation") {
  auto s = scalar_scenario();
  s.u = {0.5};
  CHECK_THROWS_AS(s.check(), InvalidInput);
  s = scalar_scenario();
  s.e_values = {0.0, -0.1, 0.3};
  CHECK_THROWS_AS(s.check(), InvalidInput);
  s = scalar_scenario();
  s.z = {1.0, 2.0};
  CHECK_THROWS_AS(s.check(), InvalidInput);
}

TEST_CASE("corrected rollout drift equals the planner's transition costs") {
  const auto grid = TimeGrid::uniform(40);
  const auto s = make_scenario(5, grid, exp_errors(grid, 3.0), 2);
  const auto dna = extract_dna(s, grid);
  const auto g = build_graph(dna);
  const auto plan = plan_fixed(g, 8);
  const auto uni = uniform_schedule(g, 8);
  const auto rp = rollout(s, plan.timesteps, true);
  const auto ru = rollout(s, uni, true);

  double sum_w = 0.0;
  for (std::size_t m = 0; m + 1 < plan.indices.size(); ++m) sum_w += transition_cost(dna, plan.indices[m], plan.indices[m + 1]);
  CHECK(rp.total_drift_sq == doctest::Approx(sum_w).epsilon(1e-12));
  CHECK(rp.steps.size() == 8);
  CHECK(rp.states.size() == 9);
  // same endpoints, so the cheaper plan also drifts less
  CHECK(rp.total_drift_sq <= ru.total_drift_sq * (1.0 + 1e-12));
}

TEST_CASE("rollout edge cases") {
  const auto grid = TimeGrid::uniform(10, true);
  const auto zero = make_scenario(3, grid, std::vector<double>(10, 0.0), 1);
  CHECK_THROWS_AS(rollout(zero, std::vector<double>{1.0}, true), DomainError);
  CHECK_THROWS_AS(rollout(zero, std::vector<double>{0.5, 1.0}, true), DomainError);
  const std::vector<double> down{1.0, 0.5, 0.2, 0.0};
  const auto rz = rollout(zero, down, false);
  CHECK(rz.total_drift_sq <= 1e-28);
  CHECK(rz.final_err_sq <= 1e-28);

  std::vector<double> e(10, 0.0);
  e.back() = 0.7;
  const auto s = make_scenario(4, grid, e, 5);
  const auto one = rollout(s, std::vector<double>{1.0, 0.0}, true);
  CHECK(one.total_drift_sq == doctest::Approx(0.49).epsilon(1e-13));
  CHECK(one.final_err_sq == doctest::Approx(0.49).epsilon(1e-13));
}

TEST_CASE("uncorrected rollout accumulates deviations along the error direction") {
  const auto grid = TimeGrid::uniform(30, true);
  std::vector<double> e(30);
  for (std::size_t i = 0; i < 30; ++i) e[i] = 0.2 + grid[i];
  const auto s = make_scenario(6, grid, e, 9);
  const std::vector<double> sched{1.0, 0.7, 0.4, 0.2, 0.1};
  const auto off = rollout(s, sched, false);
  const auto on = rollout(s, sched, true);
  double dev = 0.0;
  for (std::size_t m = 0; m + 1 < sched.size(); ++m) {
    const double t = sched[m], k = sched[m + 1];
    dev += (t - k) / t * s.error_at(t);
    REQUIRE(off.steps[m].drift_sq == doctest::Approx(dev * dev).epsilon(1e-12));
    REQUIRE(off.steps[m].drift_sq >= on.steps[m].drift_sq * (1.0 - 1e-12));
  }
  CHECK(off.steps.back().drift_sq > on.total_drift_sq);
}

TEST_CASE("Monte-Carlo extraction converges to the squared error") {
  const auto grid = TimeGrid::uniform(8);
  const auto s = make_scenario(4, grid, grid.points(), 0);
  const auto mc = extract_dna_monte_carlo(s, grid, 20000, 11);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(mc.values[i] == doctest::Approx(grid[i] * grid[i]).epsilon(0.05));
  }
  CHECK(extract_dna_monte_carlo(s, grid, 100, 3).values == extract_dna_monte_carlo(s, grid, 100, 3).values);
  CHECK_THROWS_AS(extract_dna_monte_carlo(s, grid, 0, 3), DomainError);
}
