#pragma once

// Linear-flow world with a rank-one imperfect denoiser.
//
// Ideal states follow x_t* = (1 - t) x0 + t z. The denoiser's clean estimate
// at the ideal state is x0 + e(t) u, so the reconstruction error is exactly
// e(t)^2 and every quantity the planner reasons about can be checked against
// closed-form arithmetic.

#include <cstdint>
#include <span>
#include <vector>

#include "dnaplan/dna.hpp"
#include "dnaplan/graph.hpp"

namespace dnaplan::flow {

using Vec = std::vector<double>;

struct SimScenario {
  Vec x0;
  Vec z;
  Vec u;  // unit error direction
  TimeGrid e_grid;
  std::vector<double> e_values;  // e(t) >= 0 on e_grid, linearly interpolated between points
  /// Fraction of an off-manifold deviation passed through by the denoiser
  /// (only used by uncorrected rollouts).
  double off_manifold_gain = 1.0;

  /// Throws InvalidInput on dimension mismatch, non-unit u, or bad e table.
  void check() const;
  [[nodiscard]] std::size_t dim() const { return x0.size(); }
  [[nodiscard]] double error_at(double t) const;
};

/// Random scenario: x0, z ~ N(0, I), random unit u, error table on `grid`.
SimScenario make_scenario(std::size_t dim, const TimeGrid& grid, std::span<const double> e_values,
                          std::uint64_t seed);

Vec ideal_state(const SimScenario& s, double t);
/// Denoiser clean estimate at the ideal state.
Vec clean_estimate(const SimScenario& s, double t);
/// v_t = (x_t* - x0_hat) / t.
Vec model_velocity(const SimScenario& s, double t);
/// One first-order step from x_t* to k.
Vec propagate(const SimScenario& s, double t, double k);
/// | ||x_k - x_k*||^2 - s(t,k) e(t)^2 |
double verify_lever_identity(const SimScenario& s, double t, double k);

/// values[i] = ||x0_hat(x_{t_i}*, t_i) - x0||^2.
DnaProfile extract_dna(const SimScenario& s, const TimeGrid& grid);
/// Expectation form over random (x0, z, error direction) draws.
DnaProfile extract_dna_monte_carlo(const SimScenario& s, const TimeGrid& grid, std::size_t draws, std::uint64_t seed);

struct RolloutStep {
  std::size_t step = 0;
  double t = 0.0;  // timestep reached by this step
  double drift_sq = 0.0;
  double err_sq = 0.0;
};

struct RolloutReport {
  std::vector<double> schedule;
  std::vector<Vec> states;  // states[0] is the start state
  std::vector<RolloutStep> steps;
  double total_drift_sq = 0.0;
  double final_err_sq = 0.0;
};

/// correction = true restarts every step from the ideal state.
RolloutReport rollout(const SimScenario& s, std::span<const double> schedule, bool correction);

}  // namespace dnaplan::flow
