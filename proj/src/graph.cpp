#include "dnaplan/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dnaplan/error.hpp"

namespace dnaplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// tails[n][j]: best cost of leaving node j with exactly n transitions and
// stopping, terminal risk included. This is the S-rooted layered DP read from
// the other side: dp[n][j] from S equals tails[n][j].
using Layers = std::vector<std::vector<double>>;

Layers layered_tails(const PlannerGraph& g, std::size_t n_max) {
  const std::size_t n = g.size();
  Layers tails(n_max + 1, std::vector<double>(n, kInf));
  for (std::size_t j = 0; j < n; ++j) {
    if (g.has_source_edge(j)) tails[0][j] = g.source_weights()[j];
  }
  for (std::size_t m = 1; m <= n_max; ++m) {
    kernels::relax_layer(g.transitions(), g.active_mask(), tails[m - 1], tails[m]);
  }
  return tails;
}

double best_start(const PlannerGraph& g, std::span<const double> tail) {
  double best = kInf;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.has_end_edge(i) || tail[i] == kInf) continue;
    best = std::min(best, tail[i] + g.credit_weights()[i]);
  }
  return best;
}

// Lexicographically largest n-step sequence whose cost stays within `bound`.
std::vector<std::size_t> reconstruct(const PlannerGraph& g, const Layers& tails, std::size_t n_steps,
                                     double bound) {
  const auto w = g.transitions();
  std::vector<std::size_t> seq;
  seq.reserve(n_steps + 1);

  std::size_t cur = g.size();
  double remaining = 0.0;
  for (std::size_t i = g.size(); i-- > 0;) {
    if (g.has_end_edge(i) && tails[n_steps][i] != kInf && tails[n_steps][i] + g.credit_weights()[i] <= bound) {
      cur = i;
      remaining = bound - g.credit_weights()[i];
      break;
    }
  }
  if (cur == g.size()) {
    // Rounding pushed every candidate past the bound; fall back to the exact argmin.
    double best = kInf;
    for (std::size_t i = g.size(); i-- > 0;) {
      if (!g.has_end_edge(i) || tails[n_steps][i] == kInf) continue;
      const double c = tails[n_steps][i] + g.credit_weights()[i];
      if (c < best) {
        best = c;
        cur = i;
      }
    }
    remaining = tails[n_steps][cur];
  }
  seq.push_back(cur);

  for (std::size_t m = n_steps; m >= 1; --m) {
    const auto& next = tails[m - 1];
    std::size_t pick = g.size();
    for (std::size_t l = cur; l-- > 0;) {
      if (!g.is_active(l) || next[l] == kInf) continue;
      if (w(cur, l) + next[l] <= remaining) {
        pick = l;
        break;
      }
    }
    if (pick == g.size()) {
      double best = kInf;
      for (std::size_t l = cur; l-- > 0;) {
        if (!g.is_active(l) || next[l] == kInf) continue;
        const double c = w(cur, l) + next[l];
        if (c < best) {
          best = c;
          pick = l;
        }
      }
      remaining = next[pick];
    } else {
      remaining -= w(cur, pick);
    }
    seq.push_back(pick);
    cur = pick;
  }
  return seq;
}

Schedule make_schedule(const PlannerGraph& g, std::vector<std::size_t> idx) {
  Schedule s;
  s.timesteps.reserve(idx.size());
  for (std::size_t i : idx) s.timesteps.push_back(g.dna().grid[i]);
  s.indices = std::move(idx);
  s.steps = s.timesteps.size() - 1;

  const auto& c = g.dna().values;
  double acc = c[s.indices.back()];
  for (std::size_t m = 0; m + 1 < s.indices.size(); ++m) {
    acc += transition_cost(g.dna(), s.indices[m], s.indices[m + 1]);
  }
  s.total_cost = acc - c[s.indices.front()];
  s.gain = c[s.indices.front()] - acc;
  return s;
}

void require_budget(const PlannerGraph& g, std::size_t k) {
  if (k == 0) {
    throw Infeasible("step budget must be at least 1");
  }
  if (k > g.max_steps()) {
    throw Infeasible("step budget " + std::to_string(k) + " exceeds the longest admissible chain (" +
                     std::to_string(g.max_steps()) + " transitions)");
  }
}

}  // namespace

PlannerGraph PlannerGraph::build(DnaProfile dna, bool pin_start, bool pin_end) {
  if (auto report = validate(dna); !report.ok()) {
    throw InvalidInput(report.to_string());
  }
  PlannerGraph g;
  const std::size_t n = dna.size();
  g.pin_start_ = pin_start;
  g.pin_end_ = pin_end;
  g.source_ = dna.values;
  g.credit_.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.credit_[i] = -dna.values[i];
  g.weights_.assign(n * n, kInf);
  for (std::size_t hi = 0; hi < n; ++hi) {
    if (!(dna.grid[hi] > 0.0)) continue;
    for (std::size_t lo = 0; lo < hi; ++lo) g.weights_[hi * n + lo] = transition_cost(dna, hi, lo);
  }
  g.active_.assign(n, 1);
  g.dna_ = std::move(dna);
  return g;
}

std::size_t PlannerGraph::active_count() const {
  return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), 1));
}

std::size_t PlannerGraph::min_active() const {
  return static_cast<std::size_t>(std::find(active_.begin(), active_.end(), 1) - active_.begin());
}

std::size_t PlannerGraph::max_active() const {
  return static_cast<std::size_t>(active_.rend() - std::find(active_.rbegin(), active_.rend(), 1)) - 1;
}

bool PlannerGraph::has_source_edge(std::size_t i) const {
  return is_active(i) && (!pin_end_ || i == min_active());
}

bool PlannerGraph::has_end_edge(std::size_t i) const {
  return is_active(i) && (!pin_start_ || i == max_active());
}

bool PlannerGraph::has_transition(std::size_t low, std::size_t high) const {
  return low < high && high < size() && is_active(low) && is_active(high) && dna_.grid[high] > 0.0;
}

double PlannerGraph::transition_weight(std::size_t low, std::size_t high) const {
  if (!has_transition(low, high)) {
    throw DomainError("no transition edge " + std::to_string(low) + " -> " + std::to_string(high));
  }
  return weights_[high * size() + low];
}

std::size_t PlannerGraph::source_edge_count() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < size(); ++i) c += has_source_edge(i) ? 1 : 0;
  return c;
}

std::size_t PlannerGraph::end_edge_count() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < size(); ++i) c += has_end_edge(i) ? 1 : 0;
  return c;
}

std::size_t PlannerGraph::transition_edge_count() const {
  std::size_t c = 0;
  for (std::size_t hi = 0; hi < size(); ++hi) {
    for (std::size_t lo = 0; lo < hi; ++lo) c += has_transition(lo, hi) ? 1 : 0;
  }
  return c;
}

PlannerGraph PlannerGraph::with_pins(bool pin_start, bool pin_end) const {
  PlannerGraph g = *this;
  g.pin_start_ = pin_start;
  g.pin_end_ = pin_end;
  return g;
}

PlannerGraph build_graph(const DnaProfile& dna, bool pin_start, bool pin_end) {
  return PlannerGraph::build(dna, pin_start, pin_end);
}

PlannerGraph restrict_nodes(const PlannerGraph& graph, std::span<const std::size_t> allowed) {
  std::vector<unsigned char> keep(graph.size(), 0);
  for (std::size_t i : allowed) {
    if (i >= graph.size()) {
      throw DomainError("restrict_nodes: index " + std::to_string(i) + " out of range");
    }
    keep[i] = graph.active_[i];
  }
  if (std::count(keep.begin(), keep.end(), 1) < 2) {
    throw DomainError("restrict_nodes: fewer than 2 nodes remain");
  }
  PlannerGraph g = graph;
  g.active_ = std::move(keep);
  return g;
}

double path_cost(const PlannerGraph& graph, std::span<const double> timesteps) {
  if (timesteps.size() < 2) {
    throw DomainError("path_cost needs at least 2 timesteps");
  }
  const auto& dna = graph.dna();
  std::vector<std::size_t> idx;
  idx.reserve(timesteps.size());
  for (std::size_t m = 0; m < timesteps.size(); ++m) {
    const std::size_t i = dna.grid.find(timesteps[m]);
    if (i == TimeGrid::npos) {
      throw DomainError("path_cost: timestep " + std::to_string(timesteps[m]) + " is not a grid point");
    }
    if (m > 0 && !(i < idx.back())) {
      throw DomainError("path_cost: timesteps must be strictly decreasing");
    }
    idx.push_back(i);
  }
  double acc = dna.values[idx.back()];
  for (std::size_t m = 0; m + 1 < idx.size(); ++m) acc += transition_cost(dna, idx[m], idx[m + 1]);
  return acc - dna.values[idx.front()];
}

Schedule plan_fixed(const PlannerGraph& graph, std::size_t k_steps) {
  require_budget(graph, k_steps);
  const auto tails = layered_tails(graph, k_steps);
  const double best = best_start(graph, tails[k_steps]);
  if (best == kInf) {
    throw Infeasible("no admissible " + std::to_string(k_steps) + "-step path");
  }
  const double bound = best + tie_tolerance(graph.dna());
  return make_schedule(graph, reconstruct(graph, tails, k_steps, bound));
}

std::vector<double> budget_costs(const PlannerGraph& graph, std::size_t k_max) {
  require_budget(graph, k_max);
  const auto tails = layered_tails(graph, k_max);
  std::vector<double> w(k_max);
  for (std::size_t n = 1; n <= k_max; ++n) w[n - 1] = best_start(graph, tails[n]);
  return w;
}

Schedule plan_unconstrained(const PlannerGraph& graph) {
  const std::size_t n = graph.size();
  if (graph.active_count() < 2) {
    throw Infeasible("no admissible transition");
  }
  // Single topological pass for the optimum over all lengths.
  const auto w = graph.transitions();
  std::vector<double> any(n, kInf);       // >= 0 transitions to a stop
  std::vector<double> nonempty(n, kInf);  // >= 1 transition
  for (std::size_t j = 0; j < n; ++j) {
    if (!graph.is_active(j)) continue;
    for (std::size_t l = 0; l < j; ++l) {
      if (!graph.is_active(l) || any[l] == kInf) continue;
      nonempty[j] = std::min(nonempty[j], w(j, l) + any[l]);
    }
    any[j] = graph.has_source_edge(j) ? std::min(graph.source_weights()[j], nonempty[j]) : nonempty[j];
  }
  const double best = best_start(graph, nonempty);
  if (best == kInf) {
    throw Infeasible("no admissible path");
  }
  const double bound = best + tie_tolerance(graph.dna());

  // Fewest steps attaining the optimum, via the exact-length layers.
  Layers tails;
  tails.emplace_back(n, kInf);
  for (std::size_t j = 0; j < n; ++j) {
    if (graph.has_source_edge(j)) tails[0][j] = graph.source_weights()[j];
  }
  for (std::size_t steps = 1; steps <= graph.max_steps(); ++steps) {
    tails.emplace_back(n, kInf);
    kernels::relax_layer(w, graph.active_mask(), tails[steps - 1], tails[steps]);
    if (best_start(graph, tails[steps]) <= bound) {
      return make_schedule(graph, reconstruct(graph, tails, steps, bound));
    }
  }
  throw Infeasible("no admissible path");  // unreachable for a consistent graph
}

AdaptivePlanResult plan_adaptive(const PlannerGraph& graph, double rho_th, std::size_t k_max, RhoMode mode) {
  if (!(rho_th > 0.0 && rho_th <= 1.0)) {
    throw DomainError("rho threshold must lie in (0, 1]");
  }
  require_budget(graph, k_max);
  const auto tails = layered_tails(graph, k_max);
  const double tol = tie_tolerance(graph.dna());

  AdaptivePlanResult out;
  out.threshold = rho_th;
  out.mode = mode;
  out.w_max = best_start(graph, tails[1]);
  out.w_min = best_start(graph, tails[k_max]);
  if (out.w_max == kInf || out.w_min == kInf) {
    throw Infeasible("no admissible path");
  }

  std::vector<double> w_n(k_max + 1, kInf);
  std::optional<Schedule> full;
  if (mode == RhoMode::replan) {
    for (std::size_t n = 1; n <= k_max; ++n) w_n[n] = best_start(graph, tails[n]);
  } else {
    full = make_schedule(graph, reconstruct(graph, tails, k_max, out.w_min + tol));
    for (std::size_t n = 1; n <= k_max; ++n) {
      w_n[n] = path_cost(graph, std::span<const double>(full->timesteps).first(n + 1));
    }
  }

  const double span = out.w_max - out.w_min;
  if (span == 0.0) {
    out.rho_curve.emplace_back(1, 1.0);
    out.schedule = mode == RhoMode::replan
                       ? make_schedule(graph, reconstruct(graph, tails, 1, out.w_max + tol))
                       : make_schedule(graph, {full->indices[0], full->indices[1]});
    return out;
  }

  std::size_t stop = k_max;
  for (std::size_t n = 1; n <= k_max; ++n) {
    const double rho = n == k_max ? 1.0 : (out.w_max - w_n[n]) / span;
    out.rho_curve.emplace_back(n, rho);
    if (rho >= rho_th) {
      stop = n;
      break;
    }
  }
  if (mode == RhoMode::replan) {
    out.schedule = make_schedule(graph, reconstruct(graph, tails, stop, w_n[stop] + tol));
  } else {
    out.schedule = make_schedule(graph, {full->indices.begin(), full->indices.begin() + static_cast<long>(stop) + 1});
  }
  return out;
}

std::vector<double> uniform_schedule(const PlannerGraph& graph, std::size_t k_steps) {
  require_budget(graph, k_steps);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (graph.is_active(i)) active.push_back(i);
  }
  const std::size_t last = active.size() - 1;
  std::vector<double> ts;
  ts.reserve(k_steps + 1);
  for (std::size_t m = 0; m <= k_steps; ++m) {
    // round(last * (k - m) / k) in integer arithmetic
    const std::size_t pos = (2 * last * (k_steps - m) + k_steps) / (2 * k_steps);
    ts.push_back(graph.dna().grid[active[pos]]);
  }
  return ts;
}

std::vector<BatchEntry> plan_fixed_batch(std::span<const PlannerGraph> graphs, std::size_t k_steps, bool parallel) {
  std::vector<BatchEntry> out(graphs.size());
  auto one = [&](std::size_t i) {
    try {
      out[i].schedule = plan_fixed(graphs[i], k_steps);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  };
  const auto n = static_cast<long>(graphs.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < n; ++i) one(static_cast<std::size_t>(i));
  }
  return out;
}

}  // namespace dnaplan
