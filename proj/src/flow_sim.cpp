#include "dnaplan/flow_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dnaplan/error.hpp"

namespace dnaplan::flow {

namespace {

double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double norm(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("timestep outside [0, 1]");
  }
}

void check_step(double t, double k) {
  check_time(t);
  check_time(k);
  if (!(k <= t) || !(t > 0.0)) {
    throw DomainError("step requires 0 <= k <= t and t > 0");
  }
}

Vec random_normal(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vec v(dim);
  for (double& x : v) x = n01(rng);
  return v;
}

Vec random_unit(std::size_t dim, std::mt19937_64& rng) {
  Vec v;
  double n = 0.0;
  do {
    v = random_normal(dim, rng);
    n = norm(v);
  } while (n == 0.0);
  for (double& x : v) x /= n;
  return v;
}

// Velocity the model reports at an arbitrary state x near the ideal state x_t*.
Vec velocity_at(const SimScenario& s, const Vec& x, double t) {
  const Vec ideal = ideal_state(s, t);
  const double e = s.error_at(t);
  Vec v(s.dim());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x0_hat = s.x0[i] + e * s.u[i] + s.off_manifold_gain * (x[i] - ideal[i]);
    v[i] = (x[i] - x0_hat) / t;
  }
  return v;
}

}  // namespace

void SimScenario::check() const {
  if (x0.empty() || z.size() != x0.size() || u.size() != x0.size()) {
    throw InvalidInput("scenario vectors must share a nonzero dimension");
  }
  if (std::abs(norm(u) - 1.0) > 1e-12) {
    throw InvalidInput("scenario error direction u must have unit norm");
  }
  if (e_values.size() != e_grid.size()) {
    throw InvalidInput("scenario error table length does not match its grid");
  }
  for (double e : e_values) {
    if (!std::isfinite(e) || e < 0.0) throw InvalidInput("scenario error values must be finite and >= 0");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x0.begin(), x0.end(), finite) || !std::all_of(z.begin(), z.end(), finite)) {
    throw InvalidInput("scenario vectors must be finite");
  }
}

double SimScenario::error_at(double t) const {
  const auto g = e_grid.points();
  if (t <= g.front()) return e_values.front();
  if (t >= g.back()) return e_values.back();
  const std::size_t hi = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), t) - g.begin());
  const std::size_t lo = hi - 1;
  if (g[lo] == t) return e_values[lo];
  const double w = (t - g[lo]) / (g[hi] - g[lo]);
  return (1.0 - w) * e_values[lo] + w * e_values[hi];
}

SimScenario make_scenario(std::size_t dim, const TimeGrid& grid, std::span<const double> e_values,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SimScenario s;
  s.x0 = random_normal(dim, rng);
  s.z = random_normal(dim, rng);
  s.u = random_unit(dim, rng);
  s.e_grid = grid;
  s.e_values.assign(e_values.begin(), e_values.end());
  s.check();
  return s;
}

Vec ideal_state(const SimScenario& s, double t) {
  check_time(t);
  Vec x(s.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - t) * s.x0[i] + t * s.z[i];
  return x;
}

Vec clean_estimate(const SimScenario& s, double t) {
  check_time(t);
  const double e = s.error_at(t);
  Vec x(s.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = s.x0[i] + e * s.u[i];
  return x;
}

Vec model_velocity(const SimScenario& s, double t) {
  check_time(t);
  if (!(t > 0.0)) {
    throw DomainError("model velocity is undefined at t = 0");
  }
  const Vec ideal = ideal_state(s, t);
  const Vec x0_hat = clean_estimate(s, t);
  Vec v(s.dim());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (ideal[i] - x0_hat[i]) / t;
  return v;
}

Vec propagate(const SimScenario& s, double t, double k) {
  check_step(t, k);
  const Vec ideal = ideal_state(s, t);
  const Vec v = model_velocity(s, t);
  Vec x(s.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = ideal[i] - (t - k) * v[i];
  return x;
}

double verify_lever_identity(const SimScenario& s, double t, double k) {
  check_step(t, k);
  const double drift = sq_dist(propagate(s, t, k), ideal_state(s, k));
  const double e = s.error_at(t);
  return std::abs(drift - temporal_lever(t, k) * e * e);
}

DnaProfile extract_dna(const SimScenario& s, const TimeGrid& grid) {
  s.check();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = sq_dist(clean_estimate(s, grid[i]), s.x0);
  }
  nlohmann::ordered_json meta = {{"source", "flow_sim"}, {"protocol", "single-step clean estimate"},
                                 {"dim", s.dim()}};
  return DnaProfile(grid, std::move(values), std::move(meta));
}

DnaProfile extract_dna_monte_carlo(const SimScenario& s, const TimeGrid& grid, std::size_t draws,
                                   std::uint64_t seed) {
  s.check();
  if (draws == 0) {
    throw DomainError("Monte-Carlo extraction needs at least one draw");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<double> values(grid.size(), 0.0);
  for (std::size_t d = 0; d < draws; ++d) {
    SimScenario draw = s;
    draw.x0 = random_normal(s.dim(), rng);
    draw.z = random_normal(s.dim(), rng);
    draw.u = random_unit(s.dim(), rng);
    const double mag = std::abs(n01(rng));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Vec est = clean_estimate(draw, grid[i]);
      // rescale the estimate's error by |xi| so the expectation is e(t)^2
      for (std::size_t j = 0; j < est.size(); ++j) est[j] = draw.x0[j] + mag * (est[j] - draw.x0[j]);
      values[i] += sq_dist(est, draw.x0);
    }
  }
  for (double& v : values) v /= static_cast<double>(draws);
  nlohmann::ordered_json meta = {{"source", "flow_sim"}, {"protocol", "monte-carlo"}, {"draws", draws}};
  return DnaProfile(grid, std::move(values), std::move(meta));
}

RolloutReport rollout(const SimScenario& s, std::span<const double> schedule, bool correction) {
  s.check();
  if (schedule.size() < 2) {
    throw DomainError("rollout needs at least 2 timesteps");
  }
  for (std::size_t m = 0; m < schedule.size(); ++m) {
    check_time(schedule[m]);
    if (m > 0 && !(schedule[m] < schedule[m - 1])) {
      throw DomainError("rollout schedule must be strictly decreasing");
    }
  }
  RolloutReport r;
  r.schedule.assign(schedule.begin(), schedule.end());
  Vec x = ideal_state(s, schedule[0]);
  r.states.push_back(x);
  for (std::size_t m = 0; m + 1 < schedule.size(); ++m) {
    const double t = schedule[m];
    const double k = schedule[m + 1];
    const Vec start = correction ? ideal_state(s, t) : x;
    const Vec v = velocity_at(s, start, t);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = start[i] - (t - k) * v[i];
    r.states.push_back(x);

    RolloutStep st;
    st.step = m + 1;
    st.t = k;
    const Vec ideal_k = ideal_state(s, k);
    st.drift_sq = sq_dist(x, ideal_k);
    if (k > 0.0) {
      const Vec vk = velocity_at(s, x, k);
      double err = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - k * vk[i] - s.x0[i];
        err += d * d;
      }
      st.err_sq = err;
    } else {
      st.err_sq = sq_dist(x, s.x0);
    }
    r.total_drift_sq += st.drift_sq;
    r.steps.push_back(st);
  }
  r.final_err_sq = r.steps.back().err_sq;
  return r;
}

}  // namespace dnaplan::flow
