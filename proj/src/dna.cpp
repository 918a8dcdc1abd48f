#include "dnaplan/dna.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dnaplan/error.hpp"

namespace dnaplan {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_grid(std::span<const double> g, std::vector<Violation>& out) {
  if (g.size() < 2) {
    out.push_back({"grid-size", g.size(), "grid needs at least 2 points, got " + std::to_string(g.size())});
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      out.push_back({"non-finite", i, "grid[" + std::to_string(i) + "] is not finite"});
    } else if (g[i] < 0.0 || g[i] > 1.0) {
      out.push_back({"grid-range", i, "grid[" + std::to_string(i) + "] = " + fmt_double(g[i]) + " outside [0, 1]"});
    }
    if (i > 0 && !(g[i] > g[i - 1])) {
      out.push_back({"grid-order", i, "grid not strictly increasing at index " + std::to_string(i)});
    }
  }
  if (!g.empty() && !(g.back() > 0.0)) {
    out.push_back({"grid-range", g.size() - 1, "largest grid point must be > 0"});
  }
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  std::vector<Violation> v;
  check_grid(points_, v);
  if (!v.empty()) {
    throw InvalidInput(ValidationReport{std::move(v)}.to_string());
  }
}

TimeGrid TimeGrid::uniform(std::size_t n, bool include_zero) {
  if (n < 2) {
    throw DomainError("uniform grid needs at least 2 points");
  }
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = include_zero ? static_cast<double>(i) / static_cast<double>(n - 1)
                        : static_cast<double>(i + 1) / static_cast<double>(n);
  }
  return TimeGrid(std::move(p));
}

std::size_t TimeGrid::find(double t) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), t);
  if (it == points_.end() || *it != t) {
    return npos;
  }
  return static_cast<std::size_t>(it - points_.begin());
}

DnaProfile::DnaProfile(TimeGrid g, std::vector<double> v, nlohmann::ordered_json m)
    : grid(std::move(g)), values(std::move(v)), meta(std::move(m)) {
  if (auto report = validate(*this); !report.ok()) {
    throw InvalidInput(report.to_string());
  }
}

double DnaProfile::max_value() const {
  double m = 0.0;
  for (double c : values) m = std::max(m, c);
  return m;
}

std::string ValidationReport::to_string() const {
  std::string s;
  for (const auto& v : violations) {
    s += v.kind + ": " + v.message + "\n";
  }
  return s;
}

ValidationReport validate(std::span<const double> grid, std::span<const double> values) {
  ValidationReport report;
  check_grid(grid, report.violations);
  if (grid.size() != values.size()) {
    report.violations.push_back({"length-mismatch", std::min(grid.size(), values.size()),
                                 "grid has " + std::to_string(grid.size()) + " points but values has " +
                                     std::to_string(values.size())});
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      report.violations.push_back({"non-finite", i, "values[" + std::to_string(i) + "] is not finite"});
    } else if (values[i] < 0.0) {
      report.violations.push_back(
          {"negative", i, "values[" + std::to_string(i) + "] = " + fmt_double(values[i]) + " is negative"});
    }
  }
  return report;
}

ValidationReport validate(const DnaProfile& dna) { return validate(dna.grid.points(), dna.values); }

double temporal_lever(double t, double k) {
  if (!(t > 0.0) || k < 0.0 || k > t) {
    throw DomainError("temporal_lever requires 0 <= k <= t and t > 0 (t=" + fmt_double(t) + ", k=" +
                      fmt_double(k) + ")");
  }
  const double r = (t - k) / t;
  return r * r;
}

double transition_cost(const DnaProfile& dna, std::size_t src_index, std::size_t dst_index) {
  const std::size_t n = dna.size();
  if (src_index >= n || dst_index >= n) {
    throw DomainError("transition_cost index out of range");
  }
  const double t = dna.grid[src_index];
  const double k = dna.grid[dst_index];
  if (!(t > k)) {
    throw DomainError("transition_cost requires the source timestep to be later than the destination");
  }
  return temporal_lever(t, k) * dna.values[src_index];
}

std::vector<std::size_t> stride_indices(std::size_t n, std::size_t stride) {
  if (stride == 0) {
    throw DomainError("stride must be >= 1");
  }
  if (n == 0) return {};
  std::vector<std::size_t> idx;
  for (std::size_t i = n - 1;; i -= stride) {
    idx.push_back(i);
    if (i < stride) break;
  }
  std::reverse(idx.begin(), idx.end());
  return idx;
}

DnaProfile resample(const DnaProfile& dna, std::size_t stride) {
  const auto idx = stride_indices(dna.size(), stride);
  if (idx.size() < 2) {
    throw DomainError("stride " + std::to_string(stride) + " leaves fewer than 2 grid points");
  }
  std::vector<double> g, v;
  g.reserve(idx.size());
  v.reserve(idx.size());
  for (std::size_t i : idx) {
    g.push_back(dna.grid[i]);
    v.push_back(dna.values[i]);
  }
  auto meta = dna.meta;
  if (stride > 1) meta["resample_stride"] = stride;
  return DnaProfile(TimeGrid(std::move(g)), std::move(v), std::move(meta));
}

}  // namespace dnaplan

namespace dnaplan {

double tie_tolerance(const DnaProfile& dna) { return 1e-12 * dna.max_value(); }

}  // namespace dnaplan
