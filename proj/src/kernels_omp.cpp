// OpenMP kernels. Paths are processed in blocks with the noise transposed
// to [j][path] so the inner loop runs across paths; the order of the
// j-accumulation per path matches the serial reference exactly.

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oddvar/kernels.hpp"

namespace oddvar {

namespace {
int g_workers = 0;
}

void set_workers(int n) { g_workers = n < 0 ? 0 : n; }
int workers() { return g_workers; }

namespace kernels::omp {

namespace {

constexpr std::size_t kBlock = 16;

int team() { return g_workers > 0 ? g_workers : omp_get_max_threads(); }

}  // namespace

void synthesize(const RowOperator& op, std::size_t n_paths, const NoiseFn& noise, std::span<double> out) {
  const std::size_t rows = op.rows();
  const std::size_t width = op.max_width();
  const auto blocks = static_cast<std::ptrdiff_t>((n_paths + kBlock - 1) / kBlock);
#pragma omp parallel num_threads(team())
  {
    std::vector<double> z(width);
    std::vector<double> zt(width * kBlock);
    double acc[kBlock];
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t b = 0; b < blocks; ++b) {
      const std::size_t p0 = static_cast<std::size_t>(b) * kBlock;
      const std::size_t np = std::min(kBlock, n_paths - p0);
      for (std::size_t q = 0; q < np; ++q) {
        noise(p0 + q, z);
        for (std::size_t j = 0; j < width; ++j) zt[j * kBlock + q] = z[j];
      }
      for (std::size_t i = 0; i < rows; ++i) {
        const auto a = op.row(i);
        std::fill(acc, acc + kBlock, 0.0);
        for (std::size_t j = 0; j < a.size(); ++j) {
          const double aij = a[j];
          const double* zj = zt.data() + j * kBlock;
#pragma omp simd
          for (std::size_t q = 0; q < kBlock; ++q) acc[q] += aij * zj[q];
        }
        for (std::size_t q = 0; q < np; ++q) out[(p0 + q) * rows + i] = acc[q];
      }
    }
  }
}

void running_sums(double scale, std::size_t rows, std::size_t n_paths, const NoiseFn& noise, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel num_threads(team())
  {
    std::vector<double> z(rows == 0 ? 0 : rows - 1);
#pragma omp for schedule(static)
    for (std::ptrdiff_t pp = 0; pp < n; ++pp) {
      const auto p = static_cast<std::size_t>(pp);
      noise(p, z);
      double acc = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        if (i > 0) acc += scale * z[i - 1];
        out[p * rows + i] = acc;
      }
    }
  }
}

void increment_sums(std::span<const double> paths, std::size_t n_paths, std::size_t stride, std::size_t lag,
                    std::size_t count, const IncrementFn& f, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(n_paths);
#pragma omp parallel for schedule(static) num_threads(team())
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const double* x = paths.data() + static_cast<std::size_t>(p) * stride;
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double v = f(x[i], x[i + lag]);
      const double t = sum + v;
      comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    }
    out[static_cast<std::size_t>(p)] = sum + comp;
  }
}

void map_indexed(const std::function<double(std::size_t)>& f, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(dynamic, 4) num_threads(team())
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
}

}  // namespace kernels::omp
}  // namespace oddvar
