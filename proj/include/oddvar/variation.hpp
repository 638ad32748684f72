#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "oddvar/ensemble.hpp"
#include "oddvar/kernels.hpp"
#include "oddvar/simulate.hpp"

namespace oddvar {

using RealFn = std::function<double(double)>;

// Per-path estimators. Each returns one value per path.

/// (h/eps) sum_{t_i < T} (X(t_i+eps) - X(t_i))^m with the signed power.
std::vector<double> odd_variation(const PathEnsemble& ens, double m, double eps,
                                  kernels::Backend backend = kernels::Backend::omp);

/// (h/eps) sum_{t_i < T} (X(t_i+eps) - X(t_i)) (Y(t_i+eps) - Y(t_i)), paths paired by index.
std::vector<double> covariation(const PathEnsemble& x, const PathEnsemble& y, double eps,
                                kernels::Backend backend = kernels::Backend::omp);

/// As odd_variation, each term weighted by g at the increment midpoint value.
std::vector<double> weighted_variation(const PathEnsemble& ens, double m, const RealFn& g, double eps,
                                       kernels::Backend backend = kernels::Backend::omp);

/// (h/eps) sum_{u_i < t} (X(u_i+eps) - X(u_i)) f'((X(u_i+eps) + X(u_i))/2).
std::vector<double> symmetric_integral(const PathEnsemble& ens, const RealFn& fprime, double t, double eps,
                                       kernels::Backend backend = kernels::Backend::omp);

/// f(X(t)) - f(X(0)) - symmetric_integral(fprime, t, eps).
std::vector<double> ito_residual(const PathEnsemble& ens, const RealFn& f, const RealFn& fprime, double t, double eps,
                                 kernels::Backend backend = kernels::Backend::omp);

/// What ladder_sweep evaluates at each eps.
struct Functional {
  enum class Kind { odd_variation, weighted_variation, quadratic_covariation, symmetric_integral, ito_residual };

  Kind kind = Kind::odd_variation;
  double m = 3.0;
  RealFn g;       // weighted_variation
  RealFn f;       // ito_residual
  RealFn fprime;  // symmetric_integral, ito_residual
  double t = 1.0;
  std::string label;  // names of g/f for reports

  static Functional odd(double m);
};

std::string to_string(Functional::Kind kind);
Functional::Kind functional_kind(const std::string& name);

std::vector<double> evaluate(const PathEnsemble& ens, const Functional& fn, double eps,
                             kernels::Backend backend = kernels::Backend::omp);

struct LadderRecord {
  double eps = 0.0;
  std::vector<double> estimates;
  double mean = 0.0;
  double mean_se = 0.0;
  double mean_square = 0.0;
  double mean_square_se = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% confidence half-width
  std::size_t points_used = 0;
  bool weighted = false;
};

struct Annotation {
  std::string name;
  std::string status;  // pass / fail / indeterminate / info
  std::string detail;
};

struct LadderReport {
  std::string model;
  std::string functional;
  std::uint64_t seed = 0;
  std::size_t n_paths = 0;
  std::vector<LadderRecord> records;
  std::optional<SlopeFit> fit;
  std::vector<Annotation> annotations;

  nlohmann::json to_json(bool include_estimates = true) const;
  /// eps, mean, mean_se, mean_square, mean_square_se, log_eps, log_msq, se.
  std::string to_csv() const;

  /// True when the mean-square strictly decreases along the ladder.
  bool mean_square_decreasing() const;
};

/// Weighted least squares of log(y) against log(x). Points with se > 0.3 y
/// are dropped; weights are (y/se)^2 when every se is positive. Throws
/// ReportError when the log x values have no spread.
std::optional<SlopeFit> fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                                  const std::vector<double>& se);

/// Aggregates fn at every ladder eps of an existing ensemble.
LadderReport summarize(const PathEnsemble& ens, const Functional& fn, kernels::Backend backend = kernels::Backend::omp);

/// Simulates once and evaluates fn along the whole ladder (>= 3 entries).
LadderReport ladder_sweep(const ProcessModel& model, const Functional& fn, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed, kernels::Backend backend = kernels::Backend::omp);

}  // namespace oddvar
