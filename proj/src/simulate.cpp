#include "oddvar/simulate.hpp"

#include <fmt/format.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/binomial.hpp>
#include <cmath>

#include "oddvar/errors.hpp"
#include "oddvar/rng.hpp"

namespace oddvar {

VolatilityModel::VolatilityModel(std::string name, PathFn eval, GammaFn gamma, std::optional<double> bound)
    : name_(std::move(name)), eval_(std::move(eval)), gamma_(std::move(gamma)), bound_(bound) {
  if (!eval_) throw DomainError("volatility " + name_ + " has no evaluator");
}

VolatilityModel VolatilityModel::constant(double c) {
  return {fmt::format("const({})", c), [c](double, double) { return c; },
          [c](double, int) { return std::abs(c); }, std::abs(c)};
}

VolatilityModel VolatilityModel::cos_of_brownian() {
  // cos^{2m} x = 4^{-m} [C(2m,m) + 2 sum_k C(2m,m-k) cos(2kx)], E cos(cW_s) = exp(-c^2 s/2).
  auto gamma = [](double s, int m) {
    if (m < 1) throw DomainError("gamma: m must be >= 1");
    const auto two_m = static_cast<unsigned>(2 * m);
    double acc = boost::math::binomial_coefficient<double>(two_m, static_cast<unsigned>(m));
    for (int k = 1; k <= m; ++k) {
      const double c = 2.0 * k;
      acc += 2.0 * boost::math::binomial_coefficient<double>(two_m, static_cast<unsigned>(m - k)) *
             std::exp(-0.5 * c * c * s);
    }
    const double moment = acc / std::pow(4.0, m);
    return std::pow(moment, 1.0 / (2.0 * m));
  };
  return {"cos(W)", [](double, double w) { return std::cos(w); }, gamma, 1.0};
}

double VolatilityModel::gamma(double s, int m) const {
  if (!gamma_) throw PreconditionError("volatility " + name_ + " has no Gamma evaluator");
  return gamma_(s, m);
}

VolatilityModel VolatilityModel::with_gamma(GammaFn gamma) const {
  VolatilityModel out = *this;
  out.gamma_ = std::move(gamma);
  return out;
}

std::string describe(const ProcessModel& model) {
  struct Visitor {
    std::string operator()(const GaussianCovariance& g) const { return "gaussian_covariance:" + g.metric.name(); }
    std::string operator()(const GaussianVolterra& g) const { return "gaussian_volterra:" + g.kernel.name(); }
    std::string operator()(const MartingaleVolterra& g) const {
      return fmt::format("martingale_volterra:{}:{}:m={}", g.kernel.name(), g.volatility.name(), g.m);
    }
  };
  return std::visit(Visitor{}, model);
}

namespace {

void standard_noise(std::uint64_t seed, std::size_t path, std::span<double> z) { rng::fill_normals(seed, path, 0, z); }

}  // namespace

PathEnsemble simulate_gaussian_cholesky(const BivariateMetric& metric, const TimeGrid& grid, std::size_t n_paths,
                                        std::uint64_t seed, kernels::Backend backend) {
  const std::size_t n = grid.points();
  // t = 0 is dropped when it carries no variance (every Volterra-type
  // process); otherwise it takes part in the factorization.
  const std::size_t first = metric.variance(0.0) == 0.0 ? 1 : 0;
  const std::size_t dim = n - first;
  Eigen::MatrixXd cov(dim, dim);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const double q = metric.covariance(grid.time(a + first), grid.time(b + first));
      if (!std::isfinite(q)) {
        throw ModelError(fmt::format("covariance of {} is not finite at ({}, {})", metric.name(),
                                     grid.time(a + first), grid.time(b + first)));
      }
      cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = q;
      cov(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = q;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    const double trace = cov.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    throw ModelError(fmt::format("covariance of {} is not positive definite on the grid: smallest eigenvalue {:.3e} "
                                 "(tolerance {:.3e})",
                                 metric.name(), eig.eigenvalues().minCoeff(), 1e-10 * trace));
  }
  const Eigen::MatrixXd& l = llt.matrixLLT();

  std::vector<std::size_t> widths(n);
  for (std::size_t i = 0; i < n; ++i) widths[i] = i < first ? 0 : i - first + 1;
  kernels::RowOperator op(std::move(widths));
  for (std::size_t i = first; i < n; ++i) {
    auto row = op.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = l(static_cast<Eigen::Index>(i - first), static_cast<Eigen::Index>(j));
    }
  }
  std::vector<double> values(n_paths * n);
  kernels::synthesize(backend, op, n_paths, [seed](std::size_t p, std::span<double> z) { standard_noise(seed, p, z); },
                      values);
  return {grid, n_paths, seed, "gaussian_covariance:" + metric.name(), std::move(values)};
}

kernels::RowOperator volterra_operator(const VolterraKernel& kernel, const TimeGrid& grid) {
  const std::size_t n = grid.points();
  const std::size_t cells = n - 1;
  const double h = grid.step();
  const double root_h = std::sqrt(h);
  std::vector<std::size_t> widths(n);
  for (std::size_t i = 0; i < n; ++i) widths[i] = kernel.adapted() ? i : cells;
  kernels::RowOperator op(std::move(widths));
  for (std::size_t i = 0; i < n; ++i) {
    auto row = op.row(i);
    const double t = grid.time(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double s = (static_cast<double>(j) + 0.5) * h;
      const double g = kernel(t, s);
      if (!std::isfinite(g)) {
        throw KernelError(fmt::format("kernel {} is not finite at (t={}, s={})", kernel.name(), t, s));
      }
      row[j] = g * root_h;
    }
  }
  return op;
}

PathEnsemble simulate_gaussian_volterra(const VolterraKernel& kernel, const TimeGrid& grid, std::size_t n_paths,
                                        std::uint64_t seed, kernels::Backend backend) {
  std::vector<double> values(n_paths * grid.points());
  const kernels::NoiseFn noise = [seed](std::size_t p, std::span<double> z) { standard_noise(seed, p, z); };
  if (const auto c = kernel.constant_profile()) {
    kernels::running_sums(backend, *c * std::sqrt(grid.step()), grid.points(), n_paths, noise, values);
  } else {
    kernels::synthesize(backend, volterra_operator(kernel, grid), n_paths, noise, values);
  }
  return {grid, n_paths, seed, "gaussian_volterra:" + kernel.name(), std::move(values)};
}

namespace {

// Noise xi_j scaled by H(s_j, W(s_j)); W only sees increments before j.
kernels::NoiseFn martingale_noise(const VolatilityModel& vol, const TimeGrid& grid, std::uint64_t seed) {
  return [&vol, &grid, seed](std::size_t p, std::span<double> z) {
    rng::fill_normals(seed, p, 0, z);
    const double root_h = std::sqrt(grid.step());
    double w = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double s = grid.time(j);
      const double hv = vol(s, w);
      if (!std::isfinite(hv)) {
        throw ModelError(fmt::format("volatility {} is not finite at s={} (W={})", vol.name(), s, w));
      }
      w += root_h * z[j];
      z[j] *= hv;
    }
  };
}

}  // namespace

PathEnsemble simulate_martingale_volterra(const MartingaleVolterra& model, const TimeGrid& grid,
                                          std::size_t n_paths, std::uint64_t seed, kernels::Backend backend) {
  std::vector<double> values(n_paths * grid.points());
  const auto noise = martingale_noise(model.volatility, grid, seed);
  if (const auto c = model.kernel.constant_profile()) {
    kernels::running_sums(backend, *c * std::sqrt(grid.step()), grid.points(), n_paths, noise, values);
  } else {
    kernels::synthesize(backend, volterra_operator(model.kernel, grid), n_paths, noise, values);
  }
  return {grid, n_paths, seed, describe(model), std::move(values)};
}

PathEnsemble simulate_driving_martingale(const VolatilityModel& vol, const TimeGrid& grid, std::size_t n_paths,
                                         std::uint64_t seed) {
  return simulate_martingale_volterra({brownian_kernel(), vol, 1}, grid, n_paths, seed);
}

PathEnsemble simulate(const ProcessModel& model, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                      kernels::Backend backend) {
  struct Visitor {
    const TimeGrid& grid;
    std::size_t n_paths;
    std::uint64_t seed;
    kernels::Backend backend;
    PathEnsemble operator()(const GaussianCovariance& g) const {
      return simulate_gaussian_cholesky(g.metric, grid, n_paths, seed, backend);
    }
    PathEnsemble operator()(const GaussianVolterra& g) const {
      return simulate_gaussian_volterra(g.kernel, grid, n_paths, seed, backend);
    }
    PathEnsemble operator()(const MartingaleVolterra& g) const {
      return simulate_martingale_volterra(g, grid, n_paths, seed, backend);
    }
  };
  return std::visit(Visitor{grid, n_paths, seed, backend}, model);
}

ProcessModel derive_comparison_process(const MartingaleVolterra& model) {
  if (!model.volatility.has_gamma()) {
    throw PreconditionError("volatility " + model.volatility.name() + " has no Gamma; comparison process undefined");
  }
  const VolatilityModel vol = model.volatility;
  const int m = model.m;
  auto kernel = model.kernel.scaled(fmt::format("{}*Gamma[{}]", model.kernel.name(), vol.name()),
                                    [vol, m](double s) { return vol.gamma(s, m); });
  return GaussianVolterra{std::move(kernel)};
}

}  // namespace oddvar
