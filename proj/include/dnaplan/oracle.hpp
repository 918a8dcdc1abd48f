#pragma once

// Exhaustive reference planner for small grids. Shares no cost arithmetic with
// the graph planner: levers, transition costs and path totals are recomputed
// here from the DNA values.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dnaplan/dna.hpp"

namespace dnaplan::oracle {

inline constexpr std::size_t kMaxGridPoints = 16;

struct OracleResult {
  std::vector<double> best_sequence;  // decreasing
  double best_cost = 0.0;
  std::uint64_t enumerated_count = 0;
};

/// Best sequence over every strictly decreasing grid subsequence satisfying the
/// pins (and exactly k_steps transitions when given). Same tie rule as the planner.
OracleResult enumerate_best(const DnaProfile& dna, std::optional<std::size_t> k_steps, bool pin_start,
                            bool pin_end);

/// Best cost for every exact step count 1..grid_len-1 in one enumeration
/// (index n-1; +inf where no sequence exists).
std::vector<double> best_cost_by_steps(const DnaProfile& dna, bool pin_start, bool pin_end);

/// Path cost recomputed from first principles.
double recompute_cost(const DnaProfile& dna, std::span<const double> timesteps);

}  // namespace dnaplan::oracle
