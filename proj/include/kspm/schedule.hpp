#ifndef KSPM_SCHEDULE_HPP
#define KSPM_SCHEDULE_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kspm/errors.hpp"

namespace kspm {

/// Strictly increasing integration instants t_0 < t_1 < ... < t_n.
class TimeGrid {
 public:
  TimeGrid() : times_{0.0} {}
  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty()) throw InvalidArgument("time grid needs at least one instant");
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (!std::isfinite(times_[k])) throw InvalidArgument("time grid has a non-finite instant");
      if (k > 0 && !(times_[k] > times_[k - 1])) {
        throw InvalidArgument("time grid must be strictly increasing");
      }
    }
  }

  /// n equal steps on [0, t_end].
  static TimeGrid uniform(double t_end, std::size_t nsteps) {
    if (nsteps > 0 && !(t_end > 0.0)) throw InvalidArgument("uniform time grid needs t_end > 0");
    std::vector<double> t(nsteps + 1);
    for (std::size_t k = 0; k <= nsteps; ++k) {
      t[k] = nsteps == 0 ? 0.0 : t_end * static_cast<double>(k) / static_cast<double>(nsteps);
    }
    return TimeGrid(std::move(t));
  }

  /// Uniform grid on [0, t_end] whose step does not exceed dt_max.
  static TimeGrid with_max_step(double t_end, double dt_max) {
    if (!(dt_max > 0.0)) throw InvalidArgument("dt_max must be positive");
    const auto n = static_cast<std::size_t>(std::ceil(t_end / dt_max - 1e-9));
    return uniform(t_end, n == 0 ? 1 : n);
  }

  std::size_t steps() const noexcept { return times_.size() - 1; }
  double operator[](std::size_t k) const noexcept { return times_[k]; }
  double dt(std::size_t step) const noexcept { return times_[step + 1] - times_[step]; }
  double start() const noexcept { return times_.front(); }
  double end() const noexcept { return times_.back(); }
  const std::vector<double>& times() const noexcept { return times_; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> times_;
};

/// CFL-adaptive stepping towards t_end, landing exactly on `snapshots`
/// uniformly spaced output instants.
struct AdaptiveSchedule {
  double t_end = 0.1;
  double dt_max = 1e-3;
  std::size_t snapshots = 100;

  double snapshot_time(std::size_t k) const noexcept {
    return t_end * static_cast<double>(k) / static_cast<double>(snapshots);
  }
};

/// Step indices of a TimeGrid at which `count` uniformly spaced snapshots
/// are recorded (always including the first and last instant).
inline std::vector<std::size_t> snapshot_steps(const TimeGrid& grid, std::size_t count) {
  const std::size_t n = grid.steps();
  std::vector<std::size_t> out;
  if (count == 0 || n == 0) {
    out.push_back(0);
    if (n > 0) out.push_back(n);
    return out;
  }
  for (std::size_t k = 0; k <= count; ++k) {
    const std::size_t idx = (k * n + count / 2) / count;
    if (out.empty() || idx != out.back()) out.push_back(idx);
  }
  if (out.back() != n) out.push_back(n);
  return out;
}

}  // namespace kspm

#endif  // KSPM_SCHEDULE_HPP
