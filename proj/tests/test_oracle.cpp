#include <doctest.h>

#include <cmath>
#include <limits>

#include "dnaplan/error.hpp"
#include "dnaplan/graph.hpp"
#include "dnaplan/oracle.hpp"
#include "support.hpp"

using namespace dnaplan;

TEST_CASE("enumerated counts follow the pin structure") {
  const DnaProfile d(TimeGrid({0.0, 0.33, 0.66, 1.0}), {0.0, 0.1, 1.0, 4.0});
  // pinned both ends: 2^2 subsets of the interior
  CHECK(oracle::enumerate_best(d, std::nullopt, true, true).enumerated_count == 4);
  CHECK(oracle::enumerate_best(d, std::nullopt, true, false).enumerated_count == 7);
  CHECK(oracle::enumerate_best(d, std::nullopt, false, true).enumerated_count == 7);
  CHECK(oracle::enumerate_best(d, std::nullopt, false, false).enumerated_count == 11);

  const auto tt = oracle::enumerate_best(d, std::nullopt, true, true);
  CHECK(tt.best_sequence == std::vector<double>{1.0, 0.66, 0.33, 0.0});
  CHECK(tt.best_cost == doctest::Approx(-3.1876).epsilon(1e-14));
  // tie between 0.33 and 0.0 as the stop: fewer steps wins
  CHECK(oracle::enumerate_best(d, std::nullopt, false, false).best_sequence == std::vector<double>{1.0, 0.66, 0.33});

  CHECK(oracle::enumerate_best(d, 2, true, true).best_sequence == std::vector<double>{1.0, 0.66, 0.0});
  CHECK(oracle::enumerate_best(d, 2, true, true).best_cost == doctest::Approx(-2.5376).epsilon(1e-14));
}

TEST_CASE("small hand cases") {
  const DnaProfile c(TimeGrid({0.0, 0.5, 1.0}), {2.0, 2.0, 2.0});
  CHECK(oracle::enumerate_best(c, 1, true, true).enumerated_count == 1);
  CHECK(oracle::enumerate_best(c, 1, true, false).best_cost == 0.5);
  CHECK(oracle::enumerate_best(c, 1, false, true).best_cost == 2.0);
  CHECK(oracle::enumerate_best(c, 1, false, false).enumerated_count == 3);

  const DnaProfile zero(TimeGrid({0.0, 0.5, 1.0}), {0.0, 0.0, 0.0});
  const auto z = oracle::enumerate_best(zero, std::nullopt, false, false);
  CHECK(z.best_cost == 0.0);
  CHECK(z.best_sequence == std::vector<double>{1.0, 0.5});
  CHECK(z.enumerated_count == 4);

  const DnaProfile inc(TimeGrid({0.0, 0.5, 1.0}), {1.0, 2.0, 3.0});
  const auto r = oracle::enumerate_best(inc, std::nullopt, false, false);
  CHECK(r.best_cost == -0.25);
  CHECK(r.best_sequence == std::vector<double>{1.0, 0.5});
}

TEST_CASE("recompute_cost") {
  const DnaProfile d(TimeGrid({0.0, 0.5, 1.0}), {0.0, 1.0, 4.0});
  CHECK(oracle::recompute_cost(d, std::vector<double>{1.0, 0.5, 0.0}) == -2.0);
  CHECK(oracle::recompute_cost(d, std::vector<double>{1.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(oracle::recompute_cost(d, std::vector<double>{1.0, 0.3}), DomainError);
}

TEST_CASE("best_cost_by_steps agrees with per-k enumeration") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = testing::random_profile(10, seed);
    const auto all = oracle::best_cost_by_steps(d, true, true);
    REQUIRE(all.size() == 9);
    for (std::size_t k = 1; k <= 9; ++k) {
      REQUIRE(all[k - 1] == oracle::enumerate_best(d, k, true, true).best_cost);
    }
    const auto g = build_graph(d);
    const auto lib = budget_costs(g, 9);
    for (std::size_t k = 0; k < 9; ++k) REQUIRE(std::abs(lib[k] - all[k]) <= 1e-12);
  }
}

TEST_CASE("limits") {
  const auto big = testing::random_profile(oracle::kMaxGridPoints + 1, 0);
  CHECK_THROWS_AS(oracle::enumerate_best(big, std::nullopt, true, true), DomainError);
  const auto d = testing::random_profile(5, 0);
  CHECK_THROWS_AS(oracle::enumerate_best(d, 5, true, true), Infeasible);
  CHECK_THROWS_AS(oracle::enumerate_best(d, 0, true, true), Infeasible);
}
