// Serial reference kernels: the simplest loops computing each output.

#include <cmath>
#include <numeric>
#include <vector>

#include "oddvar/errors.hpp"
#include "oddvar/kernels.hpp"

namespace oddvar::kernels {

RowOperator::RowOperator(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
  offsets_.resize(widths_.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < widths_.size(); ++i) {
    offsets_[i] = total;
    total += widths_[i];
    max_width_ = std::max(max_width_, widths_[i]);
  }
  data_.assign(total, 0.0);
}

void synthesize(Backend backend, const RowOperator& op, std::size_t n_paths, const NoiseFn& noise,
                std::span<double> out) {
  if (out.size() != n_paths * op.rows()) throw ValidationError("synthesize: output size mismatch");
  backend == Backend::omp ? omp::synthesize(op, n_paths, noise, out) : serial::synthesize(op, n_paths, noise, out);
}

void running_sums(Backend backend, double scale, std::size_t rows, std::size_t n_paths, const NoiseFn& noise,
                  std::span<double> out) {
  if (out.size() != n_paths * rows) throw ValidationError("running_sums: output size mismatch");
  backend == Backend::omp ? omp::running_sums(scale, rows, n_paths, noise, out)
                          : serial::running_sums(scale, rows, n_paths, noise, out);
}

void increment_sums(Backend backend, std::span<const double> paths, std::size_t n_paths, std::size_t stride,
                    std::size_t lag, std::size_t count, const IncrementFn& f, std::span<double> out) {
  if (out.size() != n_paths) throw ValidationError("increment_sums: output size mismatch");
  if (count + lag > stride || paths.size() < n_paths * stride) {
    throw ValidationError("increment_sums: path too short for lag");
  }
  backend == Backend::omp ? omp::increment_sums(paths, n_paths, stride, lag, count, f, out)
                          : serial::increment_sums(paths, n_paths, stride, lag, count, f, out);
}

void map_indexed(Backend backend, const std::function<double(std::size_t)>& f, std::span<double> out) {
  backend == Backend::omp ? omp::map_indexed(f, out) : serial::map_indexed(f, out);
}

namespace serial {

void synthesize(const RowOperator& op, std::size_t n_paths, const NoiseFn& noise, std::span<double> out) {
  std::vector<double> z(op.max_width());
  const std::size_t rows = op.rows();
  for (std::size_t p = 0; p < n_paths; ++p) {
    noise(p, z);
    for (std::size_t i = 0; i < rows; ++i) {
      const auto a = op.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * z[j];
      out[p * rows + i] = acc;
    }
  }
}

void running_sums(double scale, std::size_t rows, std::size_t n_paths, const NoiseFn& noise, std::span<double> out) {
  std::vector<double> z(rows == 0 ? 0 : rows - 1);
  for (std::size_t p = 0; p < n_paths; ++p) {
    noise(p, z);
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i > 0) acc += scale * z[i - 1];
      out[p * rows + i] = acc;
    }
  }
}

void increment_sums(std::span<const double> paths, std::size_t n_paths, std::size_t stride, std::size_t lag,
                    std::size_t count, const IncrementFn& f, std::span<double> out) {
  for (std::size_t p = 0; p < n_paths; ++p) {
    const double* x = paths.data() + p * stride;
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double v = f(x[i], x[i + lag]);
      const double t = sum + v;
      comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    }
    out[p] = sum + comp;
  }
}

void map_indexed(const std::function<double(std::size_t)>& f, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(i);
}

}  // namespace serial
}  // namespace oddvar::kernels
