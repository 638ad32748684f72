#include "oddvar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "oddvar/errors.hpp"

namespace oddvar {

namespace {

constexpr double kFlagTol = 1e-12;

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    std::ostringstream os;
    os << "Hurst parameter " << hurst << " outside (0,1)";
    throw DomainError(os.str());
  }
}

std::string fmt_param(const char* base, double v) {
  std::ostringstream os;
  os << base << "(" << v << ")";
  return os.str();
}

// tanh-sinh integrators keep lazily refined tables; one per thread.
double integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, 1e-13);
}

}  // namespace

double signed_power(double x, double m) {
  if (x == 0.0) return 0.0;
  const double mag = std::pow(std::abs(x), m);
  return x < 0.0 ? -mag : mag;
}

double fbm_covariance(double hurst, double s, double t) {
  check_hurst(hurst);
  if (s < 0.0 || t < 0.0) throw DomainError("fbm_covariance requires s, t >= 0");
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

namespace sampling {

std::vector<double> dyadic_points(double range) {
  std::vector<double> pts;
  pts.reserve(1024 + 30);
  for (int k = 40; k >= 11; --k) pts.push_back(std::ldexp(range, -k));
  for (int i = 1; i <= 1024; ++i) pts.push_back(range * static_cast<double>(i) / 1024.0);
  return pts;
}

std::optional<Violation> monotonicity_violation(const std::function<double(double)>& f,
                                                const std::vector<double>& points) {
  double prev_r = 0.0;
  double prev = f(0.0);
  for (double r : points) {
    const double v = f(r);
    if (v < prev - kFlagTol * std::max(std::abs(v), std::abs(prev))) return Violation{prev_r, r, prev, v};
    prev_r = r;
    prev = v;
  }
  return std::nullopt;
}

std::optional<Violation> concavity_violation(const std::function<double(double)>& f,
                                             const std::vector<double>& points) {
  // Midpoint concavity on pairs (0, r) and on consecutive uniform triples.
  const double f0 = f(0.0);
  for (double r : points) {
    const double mid = f(0.5 * r);
    const double chord = 0.5 * (f0 + f(r));
    if (mid < chord - kFlagTol * std::max(std::abs(mid), std::abs(chord))) return Violation{0.0, r, mid, chord};
  }
  for (std::size_t i = 0; i + 2 < points.size(); ++i) {
    const double r1 = points[i];
    const double r2 = points[i + 2];
    const double mid = f(0.5 * (r1 + r2));
    const double chord = 0.5 * (f(r1) + f(r2));
    if (mid < chord - kFlagTol * std::max(std::abs(mid), std::abs(chord))) return Violation{r1, r2, mid, chord};
  }
  return std::nullopt;
}

}  // namespace sampling

UnivariateMetric::UnivariateMetric(std::string name, Fn delta_sq, Fn density, MetricFlags flags,
                                   double probe_range)
    : name_(std::move(name)),
      delta_sq_(std::move(delta_sq)),
      density_(std::move(density)),
      flags_(flags),
      probe_range_(probe_range) {
  if (!delta_sq_) throw DomainError("metric " + name_ + " has no delta^2 evaluator");
  if (!(probe_range_ > 0.0)) throw DomainError("metric probe range must be positive");
  const auto pts = sampling::dyadic_points(probe_range_);
  const std::function<double(double)> eval = [this](double r) { return this->delta_sq(r); };
  for (double r : pts) {
    const double v = eval(r);
    if (!std::isfinite(v) || v < 0.0) {
      std::ostringstream os;
      os << "metric " << name_ << " has invalid delta^2(" << r << ") = " << v;
      throw DomainError(os.str());
    }
  }
  if (flags_.increasing) {
    if (auto v = sampling::monotonicity_violation(eval, pts)) {
      std::ostringstream os;
      os << "metric " << name_ << " flagged increasing but delta^2(" << v->r1 << ") > delta^2(" << v->r2 << ")";
      throw DomainError(os.str());
    }
  }
  if (flags_.concave) {
    if (auto v = sampling::concavity_violation(eval, pts)) {
      std::ostringstream os;
      os << "metric " << name_ << " flagged concave but midpoint concavity fails on (" << v->r1 << ", " << v->r2
         << ")";
      throw DomainError(os.str());
    }
  }
}

double UnivariateMetric::delta(double r) const { return std::sqrt(delta_sq(r)); }

double UnivariateMetric::density(double r) const {
  if (!density_) throw UnsupportedMetricError("metric " + name_ + " has no density");
  return density_(r);
}

BivariateMetric BivariateMetric::from_variance(std::string name, Fn1 variance, Fn2 delta_sq) {
  BivariateMetric m;
  m.name_ = std::move(name);
  m.variance_ = std::move(variance);
  m.delta_sq_ = std::move(delta_sq);
  return m;
}

BivariateMetric BivariateMetric::from_covariance(std::string name, Fn2 covariance) {
  BivariateMetric m;
  m.name_ = std::move(name);
  m.covariance_ = covariance;
  m.variance_ = [covariance](double u) { return covariance(u, u); };
  return m;
}

BivariateMetric BivariateMetric::homogeneous(std::string name, UnivariateMetric univariate, Fn1 variance) {
  auto univ = std::make_shared<const UnivariateMetric>(std::move(univariate));
  BivariateMetric m;
  m.name_ = std::move(name);
  m.variance_ = std::move(variance);
  m.delta_sq_ = [univ](double s, double t) { return univ->delta_sq(std::abs(t - s)); };
  m.homogeneous_ = std::move(univ);
  return m;
}

double BivariateMetric::delta_sq(double s, double t) const {
  if (delta_sq_) return delta_sq_(s, t);
  if (s == t) return 0.0;
  return variance_(s) + variance_(t) - 2.0 * covariance_(s, t);
}

double BivariateMetric::covariance(double s, double t) const {
  if (covariance_) return covariance_(s, t);
  return 0.5 * (variance_(s) + variance_(t) - delta_sq_(s, t));
}

double planar_increment_theta(const BivariateMetric& metric, double s, double t, double eps) {
  if (!(eps > 0.0)) throw DomainError("planar_increment_theta requires eps > 0");
  return 0.5 * (-metric.delta_sq(t + eps, s + eps) + metric.delta_sq(t, s + eps) + metric.delta_sq(s, t + eps) -
                metric.delta_sq(s, t));
}

double homogeneous_theta(const UnivariateMetric& metric, double lag, double eps) {
  if (lag < 0.0) throw DomainError("homogeneous_theta requires lag >= 0");
  return 0.5 * (metric.delta_sq(lag + eps) - 2.0 * metric.delta_sq(lag) + metric.delta_sq(std::abs(lag - eps)));
}

VolterraKernel VolterraKernel::general(std::string name, Fn2 g, bool adapted, Partials partials) {
  VolterraKernel k;
  k.name_ = std::move(name);
  k.eval_ = std::move(g);
  k.adapted_ = adapted;
  k.partials_ = std::move(partials);
  return k;
}

VolterraKernel VolterraKernel::convolution(std::string name, Fn1 profile, Fn1 sq_primitive, Partials partials) {
  VolterraKernel k;
  k.name_ = std::move(name);
  k.profile_ = profile;
  k.eval_ = [profile](double t, double s) { return profile(t - s); };
  k.sq_primitive_ = std::move(sq_primitive);
  k.adapted_ = true;
  k.partials_ = std::move(partials);
  return k;
}

VolterraKernel VolterraKernel::step(std::string name, double c) {
  auto k = convolution(
      std::move(name), [c](double) { return c; }, [c](double r) { return c * c * r; },
      Partials{[](double, double) { return 0.0; }, [](double, double) { return 0.0; },
               [](double, double) { return 0.0; }});
  k.constant_ = c;
  return k;
}

double VolterraKernel::operator()(double t, double s) const {
  if (adapted_ && s > t) return 0.0;
  return eval_(t, s);
}

VolterraKernel VolterraKernel::scaled(std::string name, Fn1 gamma) const {
  auto base = *this;
  return general(
      std::move(name), [base, gamma](double t, double s) { return gamma(s) * base(t, s); }, adapted_);
}

UnivariateMetric power_metric(double exponent) {
  if (!(exponent > 0.0)) throw DomainError("power metric exponent must be positive");
  return UnivariateMetric(
      fmt_param("power", exponent), [exponent](double r) { return std::pow(r, exponent); },
      [exponent](double r) { return exponent * std::pow(r, exponent - 1.0); },
      MetricFlags{true, exponent <= 1.0});
}

UnivariateMetric brownian_metric() {
  return UnivariateMetric(
      "brownian", [](double r) { return r; }, [](double) { return 1.0; }, MetricFlags{true, true});
}

UnivariateMetric log_corrected_metric(double a) {
  if (!(a > 0.0 && a < 1.0)) throw DomainError("log-corrected metric exponent must lie in (0,1)");
  const double r0 = std::exp(-1.0);
  auto core = [a](double r) { return std::pow(r, a) / std::log(1.0 / r); };
  auto core_density = [a](double r) {
    const double ell = std::log(1.0 / r);
    return std::pow(r, a - 1.0) * (a / ell + 1.0 / (ell * ell));
  };
  const double f0 = core(r0);
  const double slope0 = core_density(r0);
  auto value = [=](double r) { return r <= r0 ? core(r) : f0 + slope0 * (r - r0); };
  auto density = [=](double r) { return r <= r0 ? core_density(r) : slope0; };
  // Concave where a(a-1)L^2 + (2a-1)L + 2 <= 0, L = log(1/r).
  const double qa = a * (1.0 - a);
  const double qb = 2.0 * a - 1.0;
  const double ell_star = (qb + std::sqrt(qb * qb + 8.0 * qa)) / (2.0 * qa);
  const double r_concave = std::min(r0, std::exp(-ell_star));
  return UnivariateMetric(fmt_param("log_corrected", a), value, density, MetricFlags{true, true}, r_concave);
}

BivariateMetric fbm_metric(double hurst) {
  check_hurst(hurst);
  const double two_h = 2.0 * hurst;
  auto univ = hurst == 0.5 ? brownian_metric() : power_metric(two_h);
  return BivariateMetric::homogeneous(hurst == 0.5 ? "brownian" : fmt_param("fbm", hurst), std::move(univ),
                                      [two_h](double u) { return u <= 0.0 ? 0.0 : std::pow(u, two_h); });
}

BivariateMetric brownian_bivariate() { return fbm_metric(0.5); }

VolterraKernel brownian_kernel() {
  return VolterraKernel::step("brownian", 1.0);
}

VolterraKernel rl_fbm_kernel(double hurst) {
  check_hurst(hurst);
  const double alpha = hurst - 0.5;
  const double two_h = 2.0 * hurst;
  VolterraKernel::Partials partials{
      [alpha](double t, double s) { return alpha * std::pow(t - s, alpha - 1.0); },
      [alpha](double t, double s) { return -alpha * std::pow(t - s, alpha - 1.0); },
      [alpha](double t, double s) { return -alpha * (alpha - 1.0) * std::pow(t - s, alpha - 2.0); }};
  return VolterraKernel::convolution(
      fmt_param("rl_fbm", hurst),
      [alpha](double r) { return alpha == 0.0 ? 1.0 : std::pow(r, alpha); },
      [two_h](double r) { return r <= 0.0 ? 0.0 : std::pow(r, two_h) / two_h; }, std::move(partials));
}

VolterraKernel kernel_from_metric(const UnivariateMetric& metric) {
  if (!metric.has_density()) {
    throw UnsupportedMetricError("kernel_from_metric: metric " + metric.name() + " has no density");
  }
  auto m = std::make_shared<const UnivariateMetric>(metric);
  return VolterraKernel::convolution(
      "sqrt_density(" + metric.name() + ")", [m](double r) { return std::sqrt(std::max(0.0, m->density(r))); },
      [m](double r) { return m->delta_sq(r); });
}

BivariateMetric metric_from_kernel(const VolterraKernel& kernel, double support) {
  auto k = std::make_shared<const VolterraKernel>(kernel);
  const std::string name = "metric(" + kernel.name() + ")";

  if (kernel.is_convolution()) {
    auto sq = [k](double r) -> double {
      if (r <= 0.0) return 0.0;
      if (k->has_sq_primitive()) return k->sq_primitive(r);
      return integrate([&](double v) { double g = k->profile(v); return g * g; }, 0.0, r);
    };
    auto delta_sq = [k, sq](double s, double t) -> double {
      if (s > t) std::swap(s, t);
      const double d = t - s;
      if (d == 0.0) return 0.0;
      // int_0^s (k(d+v) - k(v))^2 dv + int_0^d k^2
      const double head = integrate(
          [&](double v) {
            const double diff = k->profile(d + v) - k->profile(v);
            return diff * diff;
          },
          0.0, std::max(0.0, s));
      return head + sq(d);
    };
    return BivariateMetric::from_variance(name, sq, delta_sq);
  }

  if (!kernel.adapted() && !(support > 0.0)) {
    throw DomainError("metric_from_kernel: non-adapted kernel needs a positive support");
  }
  auto variance = [k, support](double u) -> double {
    const double hi = k->adapted() ? u : support;
    return integrate([&](double v) { double g = (*k)(u, v); return g * g; }, 0.0, hi);
  };
  auto delta_sq = [k, support](double s, double t) -> double {
    if (s > t) std::swap(s, t);
    if (s == t) return 0.0;
    if (!k->adapted()) {
      return integrate([&](double u) { double d = (*k)(t, u) - (*k)(s, u); return d * d; }, 0.0, support);
    }
    const double head =
        integrate([&](double u) { double d = (*k)(t, u) - (*k)(s, u); return d * d; }, 0.0, s);
    const double tail = integrate([&](double u) { double g = (*k)(t, u); return g * g; }, s, t);
    return head + tail;
  };
  return BivariateMetric::from_variance(name, variance, delta_sq);
}

}  // namespace oddvar
