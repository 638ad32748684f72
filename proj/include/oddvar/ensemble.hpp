#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oddvar/grid.hpp"

namespace oddvar {

/// Seeded collection of sample paths on a TimeGrid. Values are stored path
/// by path: value(p, i) = X_p(t_i) for i < grid.points().
class PathEnsemble {
 public:
  PathEnsemble(TimeGrid grid, std::size_t n_paths, std::uint64_t seed, std::string model,
               std::vector<double> values);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  std::size_t points() const noexcept { return grid_.points(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& model() const noexcept { return model_; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> path(std::size_t p) const { return {values_.data() + p * points(), points()}; }
  double value(std::size_t p, std::size_t i) const { return values_[p * points() + i]; }

  /// c * X for every path, same metadata.
  PathEnsemble scaled(double c) const;

  /// Binary dump: a small header (magic, grid, seed, model) followed by the
  /// n_paths x points matrix in column-major order (all paths at t_0 first).
  void write_binary(const std::filesystem::path& file) const;
  static PathEnsemble read_binary(const std::filesystem::path& file);

  /// CSV with one row per grid time: t, x_0, ..., x_{n_paths-1}.
  void write_csv(const std::filesystem::path& file) const;

 private:
  TimeGrid grid_;
  std::size_t n_paths_;
  std::uint64_t seed_;
  std::string model_;
  std::vector<double> values_;
};

}  // namespace oddvar
