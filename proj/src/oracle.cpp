#include "dnaplan/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "dnaplan/error.hpp"

namespace dnaplan::oracle {

namespace {

double lever(double from, double to) {
  const double jump = from - to;
  return (jump * jump) / (from * from);
}

// Cost of the sequence encoded by `mask` (bit i = grid index i), walked from
// the highest set bit down.
double mask_cost(const DnaProfile& dna, std::uint32_t mask) {
  const int hi = 31 - std::countl_zero(mask);
  const int lo = std::countr_zero(mask);
  double corrections = 0.0;
  int prev = hi;
  for (int i = hi - 1; i >= lo; --i) {
    if (!(mask >> i & 1u)) continue;
    corrections += lever(dna.grid[prev], dna.grid[i]) * dna.values[prev];
    prev = i;
  }
  return (dna.values[lo] + corrections) - dna.values[hi];
}

std::vector<double> mask_sequence(const DnaProfile& dna, std::uint32_t mask) {
  std::vector<double> seq;
  for (int i = static_cast<int>(dna.size()) - 1; i >= 0; --i) {
    if (mask >> i & 1u) seq.push_back(dna.grid[i]);
  }
  return seq;
}

// Lexicographic comparison of two equal-popcount masks as decreasing sequences.
bool lex_greater(std::uint32_t a, std::uint32_t b) {
  while (a != 0 && b != 0) {
    const int ha = 31 - std::countl_zero(a);
    const int hb = 31 - std::countl_zero(b);
    if (ha != hb) return ha > hb;
    a &= ~(1u << ha);
    b &= ~(1u << hb);
  }
  return false;
}

void check_size(const DnaProfile& dna) {
  if (auto report = validate(dna); !report.ok()) {
    throw InvalidInput(report.to_string());
  }
  if (dna.size() > kMaxGridPoints) {
    throw DomainError("oracle enumeration is limited to " + std::to_string(kMaxGridPoints) + " grid points");
  }
}

bool admissible(std::uint32_t mask, std::size_t n, bool pin_start, bool pin_end) {
  if (std::popcount(mask) < 2) return false;
  if (pin_start && !(mask >> (n - 1) & 1u)) return false;
  if (pin_end && !(mask & 1u)) return false;
  return true;
}

}  // namespace

OracleResult enumerate_best(const DnaProfile& dna, std::optional<std::size_t> k_steps, bool pin_start,
                            bool pin_end) {
  check_size(dna);
  const std::size_t n = dna.size();
  const std::uint32_t full = (1u << n) - 1u;

  std::vector<std::uint32_t> masks;
  std::vector<double> costs;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    if (!admissible(mask, n, pin_start, pin_end)) continue;
    if (k_steps && static_cast<std::size_t>(std::popcount(mask)) != *k_steps + 1) continue;
    masks.push_back(mask);
    costs.push_back(mask_cost(dna, mask));
  }
  if (masks.empty()) {
    throw Infeasible("oracle: no admissible sequence");
  }

  const double best = *std::min_element(costs.begin(), costs.end());
  const double bound = best + tie_tolerance(dna);
  std::size_t pick = masks.size();
  for (std::size_t m = 0; m < masks.size(); ++m) {
    if (costs[m] > bound) continue;
    if (pick == masks.size()) {
      pick = m;
      continue;
    }
    const int pa = std::popcount(masks[m]);
    const int pb = std::popcount(masks[pick]);
    if (pa < pb || (pa == pb && lex_greater(masks[m], masks[pick]))) pick = m;
  }

  OracleResult r;
  r.best_sequence = mask_sequence(dna, masks[pick]);
  r.best_cost = costs[pick];
  r.enumerated_count = masks.size();
  return r;
}

std::vector<double> best_cost_by_steps(const DnaProfile& dna, bool pin_start, bool pin_end) {
  check_size(dna);
  const std::size_t n = dna.size();
  const std::uint32_t full = (1u << n) - 1u;
  std::vector<double> best(n - 1, std::numeric_limits<double>::infinity());
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    if (!admissible(mask, n, pin_start, pin_end)) continue;
    auto& slot = best[static_cast<std::size_t>(std::popcount(mask)) - 2];
    slot = std::min(slot, mask_cost(dna, mask));
  }
  return best;
}

double recompute_cost(const DnaProfile& dna, std::span<const double> timesteps) {
  if (timesteps.size() < 2) {
    throw DomainError("recompute_cost needs at least 2 timesteps");
  }
  const auto pts = dna.grid.points();
  auto value_at = [&](double t) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i] == t) return dna.values[i];
    }
    throw DomainError("recompute_cost: timestep off grid");
  };
  double corrections = 0.0;
  for (std::size_t m = 0; m + 1 < timesteps.size(); ++m) {
    const double from = timesteps[m];
    const double to = timesteps[m + 1];
    if (!(from > to) || !(from > 0.0)) {
      throw DomainError("recompute_cost: timesteps must be strictly decreasing");
    }
    corrections += lever(from, to) * value_at(from);
  }
  return (value_at(timesteps.back()) + corrections) - value_at(timesteps.front());
}

}  // namespace dnaplan::oracle
