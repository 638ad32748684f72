#include "oddvar/registry.hpp"

#include <fmt/format.h>

#include <cmath>

#include "oddvar/errors.hpp"

namespace oddvar {

namespace {

double number(const nlohmann::json& params, const char* key) {
  if (!params.contains(key)) throw ValidationError(fmt::format("model.params.{}: required", key));
  if (!params[key].is_number()) throw ValidationError(fmt::format("model.params.{}: must be a number", key));
  return params[key].get<double>();
}

double number_or(const nlohmann::json& params, const char* key, double fallback) {
  return params.contains(key) ? number(params, key) : fallback;
}

double hurst(const nlohmann::json& params) {
  const double h = number(params, "H");
  if (!(h > 0.0 && h < 1.0)) throw ValidationError(fmt::format("model.params.H: {} is outside (0, 1)", h));
  return h;
}

int odd_m(const nlohmann::json& params) {
  const double m = number_or(params, "m", 3.0);
  if (m < 1.0 || m != std::floor(m) || static_cast<long>(m) % 2 == 0) {
    throw ValidationError(fmt::format("model.params.m: {} is not an odd integer", m));
  }
  return static_cast<int>(m);
}

UnivariateMetric power_bound(double hurst, double scale) {
  const double p = 2.0 * hurst;
  return UnivariateMetric(fmt::format("{}*r^{}", scale, p), [p, scale](double r) { return scale * std::pow(r, p); },
                          [p, scale](double r) { return scale * p * std::pow(r, p - 1.0); },
                          {true, p <= 1.0});
}

}  // namespace

std::vector<std::string> model_names() {
  return {"brownian", "fbm", "rl_fbm", "log_corrected", "kernel_from_metric", "martingale_cos", "martingale_const"};
}

ModelSpec build_model(const nlohmann::json& model) {
  if (!model.is_object()) throw ValidationError("model: must be an object");
  if (!model.contains("name") || !model["name"].is_string()) throw ValidationError("model.name: required string");
  const std::string name = model["name"].get<std::string>();
  const nlohmann::json params = model.value("params", nlohmann::json::object());
  if (!params.is_object()) throw ValidationError("model.params: must be an object");
  const std::string family = model.value("family", "");

  std::optional<ModelSpec> spec;
  auto gaussian = [&](ProcessModel process) {
    ModelSpec s{name, params, std::move(process), std::nullopt, std::nullopt, std::nullopt, std::nullopt, 3, 0.0};
    return s;
  };

  if (name == "brownian") {
    spec = gaussian(GaussianVolterra{brownian_kernel()});
    spec->metric = brownian_bivariate();
    spec->univariate = brownian_metric();
    spec->kernel = brownian_kernel();
    spec->hurst = 0.5;
  } else if (name == "fbm") {
    const double h = hurst(params);
    spec = gaussian(GaussianCovariance{fbm_metric(h)});
    spec->metric = fbm_metric(h);
    spec->univariate = power_metric(2.0 * h);
    spec->hurst = h;
  } else if (name == "rl_fbm") {
    const double h = hurst(params);
    spec = gaussian(GaussianVolterra{rl_fbm_kernel(h)});
    spec->kernel = rl_fbm_kernel(h);
    spec->metric = metric_from_kernel(*spec->kernel);
    spec->univariate = power_bound(h, 4.0);
    spec->hurst = h;
  } else if (name == "log_corrected" || name == "kernel_from_metric") {
    UnivariateMetric univ = [&] {
      if (name == "kernel_from_metric") return power_metric(number(params, "power"));
      const double a = params.contains("exponent") ? number(params, "exponent") : 1.0 / odd_m(params);
      return log_corrected_metric(a);
    }();
    auto kernel = kernel_from_metric(univ);
    spec = gaussian(GaussianVolterra{kernel});
    spec->kernel = kernel;
    spec->metric = metric_from_kernel(kernel);
    // The kernel's metric is bounded above by 2 delta^2(|t-s|).
    const auto base = univ;
    spec->univariate = UnivariateMetric(
        "2*" + univ.name(), [base](double r) { return 2.0 * base.delta_sq(r); },
        [base](double r) { return 2.0 * base.density(r); }, univ.flags(), univ.probe_range());
  } else if (name == "martingale_cos" || name == "martingale_const") {
    const double h = hurst(params);
    const int m = odd_m(params);
    auto vol = name == "martingale_cos" ? VolatilityModel::cos_of_brownian()
                                        : VolatilityModel::constant(number_or(params, "c", 1.0));
    auto kernel = rl_fbm_kernel(h);
    ModelSpec s{name, params, MartingaleVolterra{kernel, vol, m}, std::nullopt, std::nullopt, kernel, vol, m, h};
    s.univariate = power_metric(2.0 * h);
    spec = std::move(s);
  } else {
    std::string names;
    for (const auto& n : model_names()) names += (names.empty() ? "" : ", ") + n;
    throw ValidationError(fmt::format("model.name: unknown model '{}' (known: {})", name, names));
  }

  if (!family.empty()) {
    if (family == "gaussian_covariance") {
      if (!spec->metric) throw ValidationError("model.family: " + name + " has no Gaussian covariance");
      spec->process = GaussianCovariance{*spec->metric};
    } else if (family == "gaussian_volterra") {
      if (!spec->kernel || std::holds_alternative<MartingaleVolterra>(spec->process)) {
        throw ValidationError("model.family: " + name + " has no Gaussian Volterra kernel");
      }
      spec->process = GaussianVolterra{*spec->kernel};
    } else if (family == "martingale_volterra") {
      if (!std::holds_alternative<MartingaleVolterra>(spec->process)) {
        throw ValidationError("model.family: " + name + " is not a martingale model");
      }
    } else {
      throw ValidationError("model.family: unknown family '" + family + "'");
    }
  }
  return std::move(*spec);
}

RealFn weight_function(const std::string& name) {
  if (name == "one") return [](double) { return 1.0; };
  if (name == "zero") return [](double) { return 0.0; };
  if (name == "sin") return [](double x) { return std::sin(x); };
  if (name == "cos") return [](double x) { return std::cos(x); };
  if (name == "tanh") return [](double x) { return std::tanh(x); };
  throw ValidationError("functional.g: unknown weight '" + name + "' (one, zero, sin, cos, tanh)");
}

std::pair<RealFn, RealFn> ito_function(const std::string& name) {
  if (name == "identity") return {[](double x) { return x; }, [](double) { return 1.0; }};
  if (name == "linear") return {[](double x) { return 2.0 * x + 1.0; }, [](double) { return 2.0; }};
  if (name == "square") return {[](double x) { return x * x; }, [](double x) { return 2.0 * x; }};
  if (name == "cube") return {[](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; }};
  if (name == "sin") return {[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }};
  throw ValidationError("functional.f: unknown function '" + name + "' (identity, linear, square, cube, sin)");
}

}  // namespace oddvar
