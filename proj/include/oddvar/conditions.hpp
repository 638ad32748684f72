#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "oddvar/metrics.hpp"
#include "oddvar/simulate.hpp"
#include "oddvar/verdict.hpp"

namespace oddvar {

enum class LittleOConvention { on_delta, on_delta_sq };

/// rho_k = delta(r_k) / r_k^{1/(2m)} (or delta^2 under on_delta_sq) for
/// r_k = 2^-k, k = 2..20. Passes when rho never increases along the ladder
/// and rho_20 / rho_2 <= 0.9.
ConditionVerdict check_little_o(const UnivariateMetric& metric, double m,
                                LittleOConvention convention = LittleOConvention::on_delta);

/// Monotonicity and midpoint concavity on sampling::dyadic_points(range).
ConditionVerdict check_concave_increasing(const UnivariateMetric& metric, std::optional<double> range = std::nullopt);

struct MeasureBoundOptions {
  double horizon = 1.0;
  std::size_t lags_per_shell = 8;
  std::size_t position_cells = 64;
};

/// |mu|(OD_eps) for the mixed-derivative measure of Q off the band
/// |t-s| <= eps. Mass is collected on dyadic shells eps_{k+1} < |t-s| <= eps_k
/// (squares of side proportional to the distance from the diagonal) and the
/// exponent of the shell masses against eps is fitted; the verdict passes
/// when it is >= -1 + 1/m - 0.05. The ladder must be geometric.
ConditionVerdict check_measure_bound(const BivariateMetric& metric, int m, const std::vector<double>& ladder,
                                     const MeasureBoundOptions& opts = {});

/// Monte Carlo audit of condition (M): E[prod_i H^2(s_i)] <= prod_i Gamma^2(s_i)
/// (+ 3 SE) at each probe tuple of m times.
ConditionVerdict check_condition_M(const VolatilityModel& vol, int m, const std::vector<std::vector<double>>& tuples,
                                   std::size_t n_samples, std::uint64_t seed);

struct AdditionalOptions {
  double horizon = 1.0;
  std::size_t resolution = 1024;
  /// When set, also require the fitted exponent of I(eps) to be >= this.
  std::optional<double> min_exponent;
};

/// I(eps) = int_{2eps}^T dt int_0^{t-2eps} ds int_0^T |dG_t(u)| |dG_s(u)| du
/// with dG_s(u) = G(s+eps,u) - G(s,u), on a grid of the given resolution.
/// Passes when I / (eps delta^2(2eps)) has max/min <= 10 and no upward
/// trend as eps decreases.
ConditionVerdict check_additional(const VolterraKernel& kernel_tilde, const UnivariateMetric& metric,
                                  const std::vector<double>& ladder, const AdditionalOptions& opts = {});

/// The I(eps) values themselves (exposed for tests).
std::vector<double> additional_integral(const VolterraKernel& kernel_tilde, const std::vector<double>& ladder,
                                        const AdditionalOptions& opts = {});

struct ForItoOptions {
  double horizon = 1.0;
  int ladder_depth = 20;  // u = 2^-k, k = 0..depth
  std::size_t n_pairs = 10000;
  double gap = 1e-3;  // pairs satisfy u < v - gap
  std::uint64_t seed = 1;
};

/// Conditions (i)-(iii) for the Ito formula; constants c, a, b are
/// searched on fixed grids.
ConditionVerdict check_forito_conditions(const BivariateMetric& metric, const UnivariateMetric& univ,
                                         const ForItoOptions& opts = {});

/// R(eps) = int_eps^1 (delta(u)/u)^k du / (eps (delta(eps)/eps)^k); passes when
/// max/min over the ladder is <= 10.
ConditionVerdict check_deltauuk(const UnivariateMetric& metric, int k, const std::vector<double>& ladder);

/// G~(t,s) = 1_{s<=t} g(t,s), g = |t-s|^alpha f(t,s), alpha = 1/(2m) - 1/2.
struct PropExDecomposition {
  std::function<double(double, double)> g;
  std::function<double(double, double)> dg_dt;
  std::function<double(double, double)> dg_ds;
  std::function<double(double, double)> dg_dsdt;
  std::function<double(double, double)> f;  // bivariate f, optional
  std::function<double(double)> f_bound;    // univariate f(r), optional
};

/// Samples dyadic lag bands 2^-k-1 < t-s <= 2^-k; the derivative ratios
/// against |t-s|^{alpha-1} and |t-s|^{alpha-2} must not grow by more than
/// 10x toward the diagonal. Also checks g decreasing in t, f increasing in
/// t and f(r) increasing, concave with f(0) = 0.
ConditionVerdict check_prop_ex_bounds(const PropExDecomposition& dec, int m, double horizon = 1.0);

}  // namespace oddvar
