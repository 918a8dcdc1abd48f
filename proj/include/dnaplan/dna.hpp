#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace dnaplan {

/// Strictly increasing timesteps in normalized time [0, 1].
class TimeGrid {
 public:
  TimeGrid() = default;
  /// Throws InvalidInput if the points violate the grid invariants.
  explicit TimeGrid(std::vector<double> points);

  /// n evenly spaced points. With include_zero the grid is {0, 1/(n-1), ..., 1};
  /// otherwise {1/n, 2/n, ..., 1}, i.e. the evaluation points of an n-step solver.
  static TimeGrid uniform(std::size_t n, bool include_zero = false);

  [[nodiscard]] std::span<const double> points() const { return points_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return points_[i]; }
  [[nodiscard]] double front() const { return points_.front(); }
  [[nodiscard]] double back() const { return points_.back(); }

  /// Index of an exact grid value, or npos.
  [[nodiscard]] std::size_t find(double t) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> points_;
};

/// Per-timestep reconstruction error C(t): the planning substrate.
struct DnaProfile {
  TimeGrid grid;
  std::vector<double> values;
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();

  DnaProfile() = default;
  /// Validating constructor; throws InvalidInput with the validation report.
  DnaProfile(TimeGrid g, std::vector<double> v,
             nlohmann::ordered_json m = nlohmann::ordered_json::object());

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] double max_value() const;
};

struct Violation {
  std::string kind;  // "grid-order", "grid-range", "grid-size", "length-mismatch", "negative", "non-finite"
  std::size_t index = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] std::string to_string() const;
};

/// Checks raw grid/value arrays without constructing a profile.
ValidationReport validate(std::span<const double> grid, std::span<const double> values);
ValidationReport validate(const DnaProfile& dna);

/// s(t, k) = ((t - k) / t)^2 for 0 <= k <= t, t > 0.
double temporal_lever(double t, double k);

/// W(t_src, t_dst) = s(t_src, t_dst) * C(t_src). Requires t_src > t_dst.
double transition_cost(const DnaProfile& dna, std::size_t src_index, std::size_t dst_index);

/// Keeps grid indices last, last - stride, last - 2*stride, ... (values copied verbatim).
DnaProfile resample(const DnaProfile& dna, std::size_t stride);

/// Indices retained by resample(dna, stride) on a grid of n points, ascending.
std::vector<std::size_t> stride_indices(std::size_t n, std::size_t stride);

}  // namespace dnaplan

namespace dnaplan {

/// Absolute tolerance under which two path costs on `dna` count as tied:
/// 1e-12 relative to the largest DNA value (exactly 0 for an all-zero profile).
double tie_tolerance(const DnaProfile& dna);

}  // namespace dnaplan
