#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference and an OpenMP version. Both perform the same floating-point
// operations in the same order per output element, so results are bitwise
// identical for any worker count; tests hold them to that.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace oddvar {

/// Cap on OpenMP workers used by the parallel kernels; 0 restores the
/// OpenMP default. Results never depend on this value.
void set_workers(int workers);
int workers();

class ScopedWorkers {
 public:
  explicit ScopedWorkers(int n) : saved_(workers()) { set_workers(n); }
  ~ScopedWorkers() { set_workers(saved_); }
  ScopedWorkers(const ScopedWorkers&) = delete;
  ScopedWorkers& operator=(const ScopedWorkers&) = delete;

 private:
  int saved_;
};

namespace kernels {

/// Lower-triangular-like linear map stored row by row: row i has entries
/// for noise indices j < width(i).
class RowOperator {
 public:
  RowOperator() = default;
  explicit RowOperator(std::vector<std::size_t> widths);

  std::size_t rows() const noexcept { return widths_.size(); }
  std::size_t width(std::size_t i) const noexcept { return widths_[i]; }
  std::size_t max_width() const noexcept { return max_width_; }

  std::span<double> row(std::size_t i) { return {data_.data() + offsets_[i], widths_[i]}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + offsets_[i], widths_[i]}; }

 private:
  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
  std::size_t max_width_ = 0;
};

/// Fills the noise vector (length op.max_width()) of one path.
using NoiseFn = std::function<void(std::size_t path, std::span<double> noise)>;

/// Per-path integrand of an increment functional: (X(t_i), X(t_i + eps)).
using IncrementFn = std::function<double(double x0, double x1)>;

enum class Backend { serial, omp };

/// out[p * rows + i] = sum_{j < width(i)} op(i,j) * noise_p[j].
void synthesize(Backend backend, const RowOperator& op, std::size_t n_paths, const NoiseFn& noise,
                std::span<double> out);

/// out[p * rows + i] = sum_{j < i} scale * noise_p[j]; the dense synthesize
/// with every row entry equal to scale, in linear time.
void running_sums(Backend backend, double scale, std::size_t rows, std::size_t n_paths, const NoiseFn& noise,
                  std::span<double> out);

/// out[p] = sum_{i < count} f(path_p[i], path_p[i + lag]) with a compensated
/// sequential sum; path_p starts at paths[p * stride].
void increment_sums(Backend backend, std::span<const double> paths, std::size_t n_paths, std::size_t stride,
                    std::size_t lag, std::size_t count, const IncrementFn& f, std::span<double> out);

/// out[i] = f(i) for i < out.size().
void map_indexed(Backend backend, const std::function<double(std::size_t)>& f, std::span<double> out);

namespace serial {
void synthesize(const RowOperator& op, std::size_t n_paths, const NoiseFn& noise, std::span<double> out);
void running_sums(double scale, std::size_t rows, std::size_t n_paths, const NoiseFn& noise, std::span<double> out);
void increment_sums(std::span<const double> paths, std::size_t n_paths, std::size_t stride, std::size_t lag,
                    std::size_t count, const IncrementFn& f, std::span<double> out);
void map_indexed(const std::function<double(std::size_t)>& f, std::span<double> out);
}  // namespace serial

namespace omp {
void synthesize(const RowOperator& op, std::size_t n_paths, const NoiseFn& noise, std::span<double> out);
void running_sums(double scale, std::size_t rows, std::size_t n_paths, const NoiseFn& noise, std::span<double> out);
void increment_sums(std::span<const double> paths, std::size_t n_paths, std::size_t stride, std::size_t lag,
                    std::size_t count, const IncrementFn& f, std::span<double> out);
void map_indexed(const std::function<double(std::size_t)>& f, std::span<double> out);
}  // namespace omp

}  // namespace kernels
}  // namespace oddvar
