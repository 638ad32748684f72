#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "oddvar/metrics.hpp"
#include "oddvar/simulate.hpp"
#include "oddvar/variation.hpp"

namespace oddvar {

/// A process resolved from a registry name and parameter map, with every
/// representation that is available for it.
struct ModelSpec {
  std::string name;
  nlohmann::json params;
  ProcessModel process;
  /// Canonical metric of the Gaussian law (absent for martingale models).
  std::optional<BivariateMetric> metric;
  /// Homogeneous delta^2, or a univariate upper bound delta^2(s,t) <= delta^2(|t-s|).
  std::optional<UnivariateMetric> univariate;
  std::optional<VolterraKernel> kernel;
  std::optional<VolatilityModel> volatility;
  int m = 3;
  double hurst = 0.0;  // 0 when the model has no Hurst index
};

/// model = {"name": ..., "params": {...}, "family": optional}. Names:
/// brownian, fbm(H), rl_fbm(H), log_corrected(m | exponent),
/// kernel_from_metric(power), martingale_cos(H, m), martingale_const(H, c, m).
/// family overrides the sampler: gaussian_covariance or gaussian_volterra.
ModelSpec build_model(const nlohmann::json& model);

std::vector<std::string> model_names();

/// g selectors for weighted variations: one, zero, sin, cos, tanh.
RealFn weight_function(const std::string& name);

/// (f, f') pairs for symmetric integrals: identity, linear (2x+1), square,
/// cube, sin.
std::pair<RealFn, RealFn> ito_function(const std::string& name);

}  // namespace oddvar
