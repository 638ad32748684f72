#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "oddvar/ensemble.hpp"
#include "oddvar/grid.hpp"
#include "oddvar/kernels.hpp"
#include "oddvar/metrics.hpp"

namespace oddvar {

/// Volatility H of the driving martingale M = int H dW. H is evaluated
/// pathwise from (s, W(s)), where W(s) only includes driving increments
/// strictly before s.
class VolatilityModel {
 public:
  using PathFn = std::function<double(double s, double w)>;
  /// Gamma(s) = (E[H^{2m}(s)])^{1/(2m)} for the given m.
  using GammaFn = std::function<double(double s, int m)>;

  VolatilityModel(std::string name, PathFn eval, GammaFn gamma = {}, std::optional<double> bound = std::nullopt);

  static VolatilityModel constant(double c);
  /// H(s) = cos(W(s)), with Gamma from the Fourier expansion of cos^{2m}.
  static VolatilityModel cos_of_brownian();

  const std::string& name() const noexcept { return name_; }
  double operator()(double s, double w) const { return eval_(s, w); }
  bool has_gamma() const noexcept { return static_cast<bool>(gamma_); }
  double gamma(double s, int m) const;
  /// Pointwise bound |H| <= c, when known.
  std::optional<double> bound() const noexcept { return bound_; }

  /// Same volatility with a replaced Gamma (used to build deliberately
  /// wrong tensor bounds in audits).
  VolatilityModel with_gamma(GammaFn gamma) const;

 private:
  std::string name_;
  PathFn eval_;
  GammaFn gamma_;
  std::optional<double> bound_;
};

struct GaussianCovariance {
  BivariateMetric metric;
};

struct GaussianVolterra {
  VolterraKernel kernel;
};

struct MartingaleVolterra {
  VolterraKernel kernel;
  VolatilityModel volatility;
  int m = 3;
};

using ProcessModel = std::variant<GaussianCovariance, GaussianVolterra, MartingaleVolterra>;

std::string describe(const ProcessModel& model);

PathEnsemble simulate_gaussian_cholesky(const BivariateMetric& metric, const TimeGrid& grid, std::size_t n_paths,
                                        std::uint64_t seed, kernels::Backend backend = kernels::Backend::omp);

/// X(t_i) = sum_j G(t_i, s_j + h/2) sqrt(h) xi_j.
PathEnsemble simulate_gaussian_volterra(const VolterraKernel& kernel, const TimeGrid& grid, std::size_t n_paths,
                                        std::uint64_t seed, kernels::Backend backend = kernels::Backend::omp);

/// X(t_i) = sum_j G(t_i, s_j + h/2) dM_j with dM_j = H(s_j, W(s_j)) sqrt(h) xi_j.
PathEnsemble simulate_martingale_volterra(const MartingaleVolterra& model, const TimeGrid& grid,
                                          std::size_t n_paths, std::uint64_t seed,
                                          kernels::Backend backend = kernels::Backend::omp);

PathEnsemble simulate(const ProcessModel& model, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                      kernels::Backend backend = kernels::Backend::omp);

/// Driving martingale M itself on the grid (G = 1), for probes.
PathEnsemble simulate_driving_martingale(const VolatilityModel& vol, const TimeGrid& grid, std::size_t n_paths,
                                         std::uint64_t seed);

/// Gaussian comparison process Z with kernel Gamma(s) G(t,s).
ProcessModel derive_comparison_process(const MartingaleVolterra& model);

/// The Volterra operator used by the samplers: row i holds
/// G(t_i, s_j + h/2) sqrt(h). Exposed for the benchmark.
kernels::RowOperator volterra_operator(const VolterraKernel& kernel, const TimeGrid& grid);

}  // namespace oddvar
