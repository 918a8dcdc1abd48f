#include <doctest.h>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dnaplan/error.hpp"
#include "dnaplan/graph.hpp"
#include "dnaplan/oracle.hpp"
#include "support.hpp"

using namespace dnaplan;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Forward (start-rooted) DP written independently of the planner.
std::vector<double> naive_budget_costs(const DnaProfile& d, std::size_t k_max, bool pin_start, bool pin_end) {
  const std::size_t n = d.size();
  std::vector<double> f(n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    if (!pin_start || i == n - 1) f[i] = -d.values[i];
  }
  std::vector<double> out;
  for (std::size_t step = 1; step <= k_max; ++step) {
    std::vector<double> g(n, kInf);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = j + 1; i < n; ++i) {
        if (f[i] == kInf) continue;
        const double r = (d.grid[i] - d.grid[j]) / d.grid[i];
        g[j] = std::min(g[j], f[i] + r * r * d.values[i]);
      }
    }
    f = g;
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (f[j] == kInf || (pin_end && j != 0)) continue;
      best = std::min(best, f[j] + d.values[j]);
    }
    out.push_back(best);
  }
  return out;
}

const DnaProfile& decaying4() {
  static const DnaProfile d(TimeGrid({0.0, 0.33, 0.66, 1.0}), {0.0, 0.1, 1.0, 4.0});
  return d;
}

}  // namespace

TEST_CASE("build_graph edge structure") {
  const auto dna = testing::exp_decay_profile(100, 3.0, 1.0, true);
  const auto g = build_graph(dna, false, false);
  CHECK(g.size() == 100);
  CHECK(g.source_edge_count() == 100);
  CHECK(g.end_edge_count() == 100);
  CHECK(g.transition_edge_count() == 100 * 99 / 2);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.source_weights()[i] + g.credit_weights()[i] == 0.0);

  const auto pinned = build_graph(dna, true, false);
  CHECK(pinned.end_edge_count() == 1);
  CHECK(pinned.has_end_edge(99));
  const auto both = build_graph(dna, true, true);
  CHECK(both.source_edge_count() == 1);
  CHECK(both.has_source_edge(0));

  const DnaProfile two(TimeGrid({0.0, 1.0}), {0.0, 1.0});
  const auto g2 = build_graph(two);
  CHECK(g2.transition_edge_count() == 1);
  CHECK(g2.transition_weight(0, 1) == 1.0);
  CHECK_FALSE(g2.has_transition(1, 0));
  CHECK_THROWS_AS((void)g2.transition_weight(1, 0), DomainError);
}

TEST_CASE("path_cost") {
  const DnaProfile dna(TimeGrid({0.0, 0.5, 1.0}), {0.0, 1.0, 4.0});
  const auto g = build_graph(dna);
  CHECK(path_cost(g, std::vector<double>{1.0, 0.5, 0.0}) == -2.0);

  const DnaProfile zero(TimeGrid({0.0, 0.5, 1.0}), {0.0, 0.0, 0.0});
  CHECK(path_cost(build_graph(zero), std::vector<double>{1.0, 0.5}) == 0.0);

  CHECK_THROWS_AS(path_cost(g, std::vector<double>{1.0, 0.25}), DomainError);
  CHECK_THROWS_AS(path_cost(g, std::vector<double>{0.5, 1.0}), DomainError);
  CHECK_THROWS_AS(path_cost(g, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("path_cost matches the oracle on random sequences") {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto dna = testing::random_profile(13, seed);
    const auto g = build_graph(dna);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> seq;
      for (std::size_t i = 13; i-- > 0;) {
        if (testing::uniform01(rng) < 0.5) seq.push_back(dna.grid[i]);
      }
      if (seq.size() < 2) continue;
      REQUIRE(std::abs(path_cost(g, seq) - oracle::recompute_cost(dna, seq)) <= 1e-12);
    }
  }
}

TEST_CASE("plan_unconstrained on an all-zero profile picks the full single jump") {
  const DnaProfile zero(TimeGrid::uniform(7, true), std::vector<double>(7, 0.0));
  const auto s = plan_unconstrained(build_graph(zero));
  CHECK(s.timesteps == std::vector<double>{1.0, 0.0});
  CHECK(s.total_cost == 0.0);
  CHECK(s.steps == 1);
}

TEST_CASE("plan_unconstrained on a hand-enumerated decaying profile") {
  // Costs enumerated by hand for every candidate path; the pinned-start
  // variants tie between stopping at 0.33 and continuing to 0.
  struct Case {
    bool pin_start, pin_end;
    std::vector<double> seq;
  };
  const Case cases[] = {
      {true, true, {1.0, 0.66, 0.33, 0.0}},
      {true, false, {1.0, 0.66, 0.33}},
      {false, true, {1.0, 0.66, 0.33, 0.0}},
      {false, false, {1.0, 0.66, 0.33}},
  };
  for (const auto& c : cases) {
    const auto s = plan_unconstrained(build_graph(decaying4(), c.pin_start, c.pin_end));
    CHECK(s.timesteps == c.seq);
    CHECK(s.total_cost == doctest::Approx(-3.1876).epsilon(1e-14));
  }
  const auto g = build_graph(decaying4());
  CHECK(plan_fixed(g, 1).timesteps == std::vector<double>{1.0, 0.0});
  CHECK(plan_fixed(g, 1).total_cost == 0.0);
  CHECK(plan_fixed(g, 2).timesteps == std::vector<double>{1.0, 0.66, 0.0});
  CHECK(plan_fixed(g, 2).total_cost == doctest::Approx(-2.5376).epsilon(1e-14));
}

TEST_CASE("plan_fixed single step on constant DNA") {
  const DnaProfile c(TimeGrid({0.0, 0.5, 1.0}), {2.0, 2.0, 2.0});
  // pairs: 1->0 costs 2, 1->0.5 costs 0.5, 0.5->0 costs 2
  CHECK(plan_fixed(build_graph(c, false, false), 1).timesteps == std::vector<double>{1.0, 0.5});
  CHECK(plan_fixed(build_graph(c, false, false), 1).total_cost == 0.5);
  CHECK(plan_fixed(build_graph(c, true, false), 1).timesteps == std::vector<double>{1.0, 0.5});
  CHECK(plan_fixed(build_graph(c, true, true), 1).timesteps == std::vector<double>{1.0, 0.0});
  CHECK(plan_fixed(build_graph(c, true, true), 1).total_cost == 2.0);
}

TEST_CASE("plan_fixed with the full budget visits every node") {
  const auto dna = testing::random_profile(9, 4);
  const auto g = build_graph(dna);
  const auto s = plan_fixed(g, 8);
  std::vector<double> dense(dna.grid.points().rbegin(), dna.grid.points().rend());
  CHECK(s.timesteps == dense);
  CHECK(s.total_cost == path_cost(g, dense));
  CHECK_THROWS_AS(plan_fixed(g, 9), Infeasible);
  CHECK_THROWS_AS(plan_fixed(g, 0), Infeasible);
}

TEST_CASE("planner equals brute force on random 13-point profiles") {
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const auto dna = testing::random_profile(13, seed);
    for (bool ps : {true, false}) {
      for (bool pe : {true, false}) {
        const auto g = build_graph(dna, ps, pe);
        const auto u = plan_unconstrained(g);
        const auto ou = oracle::enumerate_best(dna, std::nullopt, ps, pe);
        REQUIRE(std::abs(u.total_cost - ou.best_cost) <= 1e-9);
        REQUIRE(u.timesteps == ou.best_sequence);
        for (std::size_t k = 1; k <= 6; ++k) {
          const auto f = plan_fixed(g, k);
          const auto of = oracle::enumerate_best(dna, k, ps, pe);
          REQUIRE(std::abs(f.total_cost - of.best_cost) <= 1e-9);
          REQUIRE(f.timesteps == of.best_sequence);
        }
      }
    }
  }
}

TEST_CASE("schedule invariants") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto dna = testing::random_decaying_profile(60, seed);
    const auto g = build_graph(dna);
    for (std::size_t k : {1u, 3u, 10u, 25u}) {
      const auto s = plan_fixed(g, k);
      REQUIRE(s.steps == k);
      REQUIRE(s.timesteps.size() == k + 1);
      REQUIRE(std::is_sorted(s.timesteps.rbegin(), s.timesteps.rend()));
      REQUIRE(path_cost(g, s.timesteps) == s.total_cost);
      REQUIRE(s.gain == -s.total_cost);
      // duality: gain = C(start) - sum W - C(end)
      double sum_w = 0.0;
      for (std::size_t m = 0; m + 1 < s.indices.size(); ++m) sum_w += transition_cost(dna, s.indices[m], s.indices[m + 1]);
      REQUIRE(s.gain == doctest::Approx(dna.values[s.indices.front()] - dna.values[s.indices.back()] - sum_w).epsilon(1e-13));
      // feasible dominance over the uniform schedule
      REQUIRE(s.total_cost <= path_cost(g, uniform_schedule(g, k)) + 1e-15);
    }
    // trivial-path dominance with both ends pinned
    const auto best = plan_unconstrained(g);
    const std::vector<double> single{dna.grid.back(), dna.grid.front()};
    REQUIRE(best.total_cost <= path_cost(g, single));
  }
}

TEST_CASE("scale covariance") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto dna = testing::random_profile(12, seed);
    auto scaled = dna;
    for (double& v : scaled.values) v *= 4.0;  // power of two: exact scaling
    for (std::size_t k : {2u, 5u}) {
      const auto a = plan_fixed(build_graph(dna), k);
      const auto b = plan_fixed(build_graph(scaled), k);
      REQUIRE(a.timesteps == b.timesteps);
      REQUIRE(b.total_cost == 4.0 * a.total_cost);
    }
    auto scaled3 = dna;
    for (double& v : scaled3.values) v *= 3.0;
    const auto a = plan_unconstrained(build_graph(dna, false, false));
    const auto b = plan_unconstrained(build_graph(scaled3, false, false));
    REQUIRE(a.timesteps == b.timesteps);
    REQUIRE(b.total_cost == doctest::Approx(3.0 * a.total_cost).epsilon(1e-12));
  }
}

TEST_CASE("uniform schedule") {
  const auto dna = testing::exp_decay_profile(100, 3.0);
  const auto g = build_graph(dna);
  const auto u = uniform_schedule(g, 10);
  REQUIRE(u.size() == 11);
  CHECK(u.front() == 1.0);
  CHECK(u.back() == 0.01);
  CHECK(u[1] == dna.grid[89]);  // round(99 * 9 / 10) = 89
  const auto dense = uniform_schedule(g, 99);
  CHECK(dense.size() == 100);
}

TEST_CASE("plan_adaptive") {
  SUBCASE("normalization endpoints") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto dna = testing::random_profile(13, seed);
      const auto g = build_graph(dna);
      const auto r = plan_adaptive(g, 1.0, 12);
      REQUIRE(r.rho_curve.front().first == 1);
      REQUIRE(r.rho_curve.front().second == 0.0);
      REQUIRE(r.rho_curve.back().second >= 1.0);
      REQUIRE(r.rho_curve.size() == r.schedule.steps);
    }
  }
  SUBCASE("exponential decay stop step against an independent W_n scan") {
    const auto dna = testing::exp_decay_profile(100, 3.0);
    const auto g = build_graph(dna);
    const auto r = plan_adaptive(g, 0.99, 50);
    const auto w = naive_budget_costs(dna, 50, true, true);
    const auto lib = budget_costs(g, 50);
    for (std::size_t n = 0; n < 50; ++n) REQUIRE(lib[n] == doctest::Approx(w[n]).epsilon(1e-12));
    std::size_t expected = 50;
    for (std::size_t n = 1; n <= 50; ++n) {
      if ((w[0] - w[n - 1]) / (w[0] - w[49]) >= 0.99) {
        expected = n;
        break;
      }
    }
    CHECK(r.schedule.steps == expected);
    CHECK(r.rho_curve.size() == expected);
    CHECK(r.rho_curve.back().second >= 0.99);
    CHECK(r.rho_curve[expected - 2].second < 0.99);
    CHECK(r.w_max == lib[0]);
    CHECK(r.w_min == lib[49]);
    CHECK(r.schedule.total_cost == doctest::Approx(lib[expected - 1]).epsilon(1e-12));
  }
  SUBCASE("flat landscape") {
    const DnaProfile zero(TimeGrid::uniform(10), std::vector<double>(10, 0.0));
    const auto r = plan_adaptive(build_graph(zero), 0.99, 5);
    CHECK(r.schedule.steps == 1);
    REQUIRE(r.rho_curve.size() == 1);
    CHECK(r.rho_curve[0].second == 1.0);
  }
  SUBCASE("prefix mode") {
    const auto dna = testing::exp_decay_profile(60, 4.0);
    const auto g = build_graph(dna);
    const auto full = plan_fixed(g, 20);
    const auto r = plan_adaptive(g, 0.9, 20, RhoMode::prefix);
    REQUIRE(r.schedule.steps >= 1);
    CHECK(std::equal(r.schedule.timesteps.begin(), r.schedule.timesteps.end(), full.timesteps.begin()));
    CHECK(r.rho_curve.back().second >= 0.9);
  }
  SUBCASE("errors") {
    const auto g = build_graph(testing::random_profile(8, 1));
    CHECK_THROWS_AS(plan_adaptive(g, 0.0, 3), DomainError);
    CHECK_THROWS_AS(plan_adaptive(g, 1.5, 3), DomainError);
    CHECK_THROWS_AS(plan_adaptive(g, 0.9, 8), Infeasible);
  }
}

TEST_CASE("restrict_nodes") {
  const auto dna = testing::random_decaying_profile(100, 8);
  const auto g = build_graph(dna);

  std::vector<std::size_t> all(100);
  std::iota(all.begin(), all.end(), 0);
  const auto same = restrict_nodes(g, all);
  CHECK(plan_fixed(same, 10).timesteps == plan_fixed(g, 10).timesteps);

  const auto r = restrict_nodes(g, stride_indices(100, 2));
  CHECK(r.active_count() == 50);
  const auto coarse = build_graph(resample(dna, 2));
  for (std::size_t k : {1u, 5u, 10u, 49u}) {
    CHECK(plan_fixed(r, k).timesteps == plan_fixed(coarse, k).timesteps);
  }
  CHECK(plan_unconstrained(r).timesteps == plan_unconstrained(coarse).timesteps);

  const std::vector<std::size_t> ends{0, 99};
  const auto two = restrict_nodes(g, ends);
  CHECK(two.max_steps() == 1);
  CHECK(plan_unconstrained(two).timesteps == std::vector<double>{1.0, 0.01});
  CHECK_THROWS_AS(plan_fixed(two, 2), Infeasible);

  const std::vector<std::size_t> one{5};
  CHECK_THROWS_AS(restrict_nodes(g, one), DomainError);
  const std::vector<std::size_t> bad{5, 100};
  CHECK_THROWS_AS(restrict_nodes(g, bad), DomainError);
}

TEST_CASE("batch planning: parallel and serial agree") {
  omp_set_num_threads(4);
  std::vector<PlannerGraph> graphs;
  for (std::uint64_t seed = 0; seed < 24; ++seed) graphs.push_back(build_graph(testing::random_decaying_profile(80, seed)));
  graphs.push_back(build_graph(testing::random_profile(5, 1)));  // infeasible at k = 10
  const auto a = plan_fixed_batch(graphs, 10, false);
  const auto b = plan_fixed_batch(graphs, 10, true);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].schedule.has_value() == b[i].schedule.has_value());
    if (a[i].schedule) {
      CHECK(a[i].schedule->timesteps == b[i].schedule->timesteps);
      CHECK(a[i].schedule->total_cost == b[i].schedule->total_cost);
    } else {
      CHECK(a[i].error == b[i].error);
    }
  }
  CHECK_FALSE(a.back().schedule.has_value());
}

TEST_CASE("invalid profiles are rejected by build_graph") {
  DnaProfile bad;
  bad.grid = TimeGrid({0.0, 1.0});
  bad.values = {0.5, -1.0};
  CHECK_THROWS_AS(build_graph(bad), InvalidInput);
}
