#include "oddvar/grid.hpp"

#include <cmath>
#include <string>

#include "oddvar/errors.hpp"

namespace oddvar {

namespace {

// Multiples of h are accepted up to this relative rounding slack.
constexpr double kAlignTol = 1e-9;

std::size_t aligned_steps(double eps, double h) {
  const double k = eps / h;
  const double rk = std::round(k);
  if (rk < 1.0 || std::abs(k - rk) > kAlignTol * std::max(1.0, rk)) {
    throw GridError("epsilon " + std::to_string(eps) + " is not an integer multiple of the grid step " +
                    std::to_string(h));
  }
  return static_cast<std::size_t>(rk);
}

}  // namespace

TimeGrid::TimeGrid(double horizon, std::size_t steps, std::vector<double> ladder)
    : horizon_(horizon), steps_(steps), step_(0.0), ladder_(std::move(ladder)) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw GridError("horizon T must be positive and finite");
  if (steps_ < 2) throw GridError("grid needs at least 2 steps");
  step_ = horizon_ / static_cast<double>(steps_);

  ladder_steps_.reserve(ladder_.size());
  for (std::size_t i = 0; i < ladder_.size(); ++i) {
    const double eps = ladder_[i];
    if (!(eps > 0.0)) throw GridError("epsilon ladder entries must be positive");
    if (eps > horizon_ / 4.0 * (1.0 + kAlignTol)) {
      throw GridError("epsilon " + std::to_string(eps) + " exceeds T/4");
    }
    if (i > 0 && !(eps < ladder_[i - 1])) throw GridError("epsilon ladder must be strictly decreasing");
    ladder_steps_.push_back(aligned_steps(eps, step_));
  }
  if (!ladder_steps_.empty()) {
    pad_steps_ = ladder_steps_.front();
    pad_ = static_cast<double>(pad_steps_) * step_;
  }
}

TimeGrid TimeGrid::dyadic(double horizon, std::size_t steps, std::span<const int> log2_ladder) {
  std::vector<double> ladder;
  ladder.reserve(log2_ladder.size());
  for (int k : log2_ladder) ladder.push_back(std::ldexp(1.0, -k));
  return TimeGrid(horizon, steps, std::move(ladder));
}

std::size_t TimeGrid::steps_for(double eps) const {
  const std::size_t k = aligned_steps(eps, step_);
  if (k > pad_steps_) {
    throw GridError("epsilon " + std::to_string(eps) + " exceeds the grid pad " + std::to_string(pad_));
  }
  return k;
}

std::size_t TimeGrid::index_of(double t) const {
  if (t == 0.0) return 0;
  if (t < 0.0 || t > horizon_ * (1.0 + kAlignTol)) throw GridError("time " + std::to_string(t) + " outside [0, T]");
  return aligned_steps(t, step_);
}

}  // namespace oddvar
