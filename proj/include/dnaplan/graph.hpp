#pragma once

// Super-node DAG over a DNA profile and the dynamic programs that plan on it.
//
// Graph orientation: transition edges run from the lower timestep to the
// higher one (k -> t carries W(t, k)); the super-source S attaches to every
// admissible stopping node with weight C(k) and every admissible starting node
// attaches to the super-end E with weight -C(t). A path S -> k_0 -> ... -> t -> E
// is therefore a denoising schedule read backwards. Schedules are reported in
// denoising order (decreasing t).
//
// Ties between equal-cost plans (within tie_tolerance) resolve to fewer steps
// first, then to the lexicographically largest timestep sequence.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dnaplan/dna.hpp"
#include "dnaplan/kernels.hpp"

namespace dnaplan {

class PlannerGraph {
 public:
  /// pin_start: only the largest active timestep may start a schedule.
  /// pin_end: only the smallest active timestep may end one.
  static PlannerGraph build(DnaProfile dna, bool pin_start = true, bool pin_end = true);

  [[nodiscard]] const DnaProfile& dna() const { return dna_; }
  [[nodiscard]] std::size_t size() const { return dna_.size(); }
  [[nodiscard]] bool pin_start() const { return pin_start_; }
  [[nodiscard]] bool pin_end() const { return pin_end_; }

  /// Terminal risk, S -> i.
  [[nodiscard]] std::span<const double> source_weights() const { return source_; }
  /// Information credit, i -> E.
  [[nodiscard]] std::span<const double> credit_weights() const { return credit_; }

  [[nodiscard]] bool is_active(std::size_t i) const { return active_[i] != 0; }
  [[nodiscard]] std::span<const unsigned char> active_mask() const { return active_; }
  [[nodiscard]] std::size_t active_count() const;
  [[nodiscard]] std::size_t min_active() const;
  [[nodiscard]] std::size_t max_active() const;

  /// Whether S -> i exists (i may end a schedule).
  [[nodiscard]] bool has_source_edge(std::size_t i) const;
  /// Whether i -> E exists (i may start a schedule).
  [[nodiscard]] bool has_end_edge(std::size_t i) const;
  /// Transition edge low -> high exists iff both are active and t_high > t_low.
  [[nodiscard]] bool has_transition(std::size_t low, std::size_t high) const;
  /// W'(low -> high) = W(t_high, t_low).
  [[nodiscard]] double transition_weight(std::size_t low, std::size_t high) const;

  [[nodiscard]] std::size_t source_edge_count() const;
  [[nodiscard]] std::size_t end_edge_count() const;
  [[nodiscard]] std::size_t transition_edge_count() const;

  /// Longest admissible chain, in transitions.
  [[nodiscard]] std::size_t max_steps() const { return active_count() - 1; }

  /// Dense transition table: row = later (source) timestep, column = earlier one.
  [[nodiscard]] kernels::MatrixView transitions() const { return {weights_.data(), size(), size()}; }

  /// Same graph with a different pin configuration.
  [[nodiscard]] PlannerGraph with_pins(bool pin_start, bool pin_end) const;

 private:
  friend PlannerGraph restrict_nodes(const PlannerGraph&, std::span<const std::size_t>);

  DnaProfile dna_;
  bool pin_start_ = true;
  bool pin_end_ = true;
  std::vector<double> source_;
  std::vector<double> credit_;
  std::vector<double> weights_;
  std::vector<unsigned char> active_;
};

struct Schedule {
  std::vector<double> timesteps;  // strictly decreasing
  std::vector<std::size_t> indices;  // grid indices of timesteps
  double total_cost = 0.0;
  double gain = 0.0;
  std::size_t steps = 0;
};

enum class RhoMode {
  replan,  // W_n is the best n-step plan
  prefix,  // W_n is the cost of stopping the K_max plan after n steps
};

struct AdaptivePlanResult {
  Schedule schedule;
  std::vector<std::pair<std::size_t, double>> rho_curve;
  double w_max = 0.0;
  double w_min = 0.0;
  double threshold = 0.0;
  RhoMode mode = RhoMode::replan;
};

PlannerGraph build_graph(const DnaProfile& dna, bool pin_start = true, bool pin_end = true);

/// Keeps the intersection of the graph's active nodes with `allowed`.
PlannerGraph restrict_nodes(const PlannerGraph& graph, std::span<const std::size_t> allowed);

/// C(t_end) + sum W(t_m, t_{m+1}) - C(t_start) for a decreasing on-grid sequence.
double path_cost(const PlannerGraph& graph, std::span<const double> timesteps);

/// Minimum-cost schedule over all lengths >= 1 transition.
Schedule plan_unconstrained(const PlannerGraph& graph);

/// Minimum-cost schedule with exactly k_steps transitions.
Schedule plan_fixed(const PlannerGraph& graph, std::size_t k_steps);

/// Best n-step cost W_n for n = 1..k_max (index n-1).
std::vector<double> budget_costs(const PlannerGraph& graph, std::size_t k_max);

/// Stops at the first n with rho(n) >= rho_th.
AdaptivePlanResult plan_adaptive(const PlannerGraph& graph, double rho_th, std::size_t k_max,
                                 RhoMode mode = RhoMode::replan);

/// Index-aligned schedule with k evenly spaced transitions between the largest
/// and smallest active nodes (rounded to the nearest grid index).
std::vector<double> uniform_schedule(const PlannerGraph& graph, std::size_t k_steps);

struct BatchEntry {
  std::optional<Schedule> schedule;
  std::string error;
};

/// plan_fixed over many graphs; `parallel` selects the OpenMP loop. Entry
/// order and contents do not depend on the execution mode.
std::vector<BatchEntry> plan_fixed_batch(std::span<const PlannerGraph> graphs, std::size_t k_steps,
                                         bool parallel = true);

}  // namespace dnaplan
