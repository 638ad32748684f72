#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace oddvar {

/// Uniform discretization of [0, T + pad] with an epsilon ladder whose
/// entries are integer multiples of the step h = T/n.
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps, std::vector<double> ladder);

  /// Ladder given as exponents: eps_k = 2^-k (absolute, not relative to T).
  static TimeGrid dyadic(double horizon, std::size_t steps, std::span<const int> log2_ladder);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  double step() const noexcept { return step_; }
  const std::vector<double>& ladder() const noexcept { return ladder_; }
  double pad() const noexcept { return pad_; }
  std::size_t pad_steps() const noexcept { return pad_steps_; }

  /// Number of grid points covering [0, T + pad].
  std::size_t points() const noexcept { return steps_ + pad_steps_ + 1; }
  double time(std::size_t i) const noexcept { return static_cast<double>(i) * step_; }

  /// Number of grid steps in eps; throws GridError unless eps is an
  /// integer multiple of h not exceeding the pad.
  std::size_t steps_for(double eps) const;

  /// Grid index of time t in [0, T]; throws GridError if t is off-grid.
  std::size_t index_of(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  std::size_t steps_;
  double step_;
  std::vector<double> ladder_;
  std::vector<std::size_t> ladder_steps_;
  double pad_ = 0.0;
  std::size_t pad_steps_ = 0;
};

}  // namespace oddvar
