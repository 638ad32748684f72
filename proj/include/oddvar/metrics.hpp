#pragma once

// Canonical metrics, covariances and Volterra kernels.
//
// Every metric is stored squared (delta^2); delta itself is the square root.
// All types are immutable after construction and their evaluators are pure,
// so they can be shared freely between worker threads.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace oddvar {

/// |x|^m sgn(x).
double signed_power(double x, double m);

/// Fractional Brownian motion covariance (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double hurst, double s, double t);

struct MetricFlags {
  bool increasing = false;
  bool concave = false;
};

namespace sampling {

/// The 1024 dyadic points R*i/1024 plus the geometric tail R*2^-k,
/// k = 11..40, used to assert structural flags.
std::vector<double> dyadic_points(double range);

struct Violation {
  double r1 = 0.0;
  double r2 = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

std::optional<Violation> monotonicity_violation(const std::function<double(double)>& f,
                                                const std::vector<double>& points);
std::optional<Violation> concavity_violation(const std::function<double(double)>& f,
                                             const std::vector<double>& points);

}  // namespace sampling

/// Univariate squared metric delta^2(r) of a process with homogeneous
/// increments (or a univariate bound on a non-homogeneous one).
class UnivariateMetric {
 public:
  using Fn = std::function<double(double)>;

  /// Flags are asserted on sampling::dyadic_points(probe_range); a
  /// flagged property that fails raises DomainError.
  UnivariateMetric(std::string name, Fn delta_sq, Fn density, MetricFlags flags, double probe_range = 1.0);

  const std::string& name() const noexcept { return name_; }
  MetricFlags flags() const noexcept { return flags_; }
  double probe_range() const noexcept { return probe_range_; }

  double delta_sq(double r) const { return r <= 0.0 ? 0.0 : delta_sq_(r); }
  double delta(double r) const;

  bool has_density() const noexcept { return static_cast<bool>(density_); }
  /// (delta^2)'(r); UnsupportedMetricError when no density was supplied.
  double density(double r) const;

 private:
  std::string name_;
  Fn delta_sq_;
  Fn density_;
  MetricFlags flags_;
  double probe_range_;
};

/// Bivariate canonical metric delta^2(s,t) together with the covariance Q.
/// The identity Q(s,t) = (Q(s,s) + Q(t,t) - delta^2(s,t)) / 2 holds by
/// construction whichever representation the metric was built from.
class BivariateMetric {
 public:
  using Fn1 = std::function<double(double)>;
  using Fn2 = std::function<double(double, double)>;

  static BivariateMetric from_variance(std::string name, Fn1 variance, Fn2 delta_sq);
  static BivariateMetric from_covariance(std::string name, Fn2 covariance);
  static BivariateMetric homogeneous(std::string name, UnivariateMetric univariate, Fn1 variance);

  const std::string& name() const noexcept { return name_; }

  double delta_sq(double s, double t) const;
  double covariance(double s, double t) const;
  double variance(double u) const { return variance_(u); }

  /// The univariate metric when delta^2(s,t) = delta^2(|t-s|), else null.
  const UnivariateMetric* homogeneous_part() const noexcept { return homogeneous_.get(); }

 private:
  BivariateMetric() = default;

  std::string name_;
  Fn1 variance_;
  Fn2 delta_sq_;
  Fn2 covariance_;
  std::shared_ptr<const UnivariateMetric> homogeneous_;
};

/// Theta^eps(s,t): covariance of the eps-increments at s and t, i.e. minus
/// one half of the planar increment of delta^2 over [s,s+eps]x[t,t+eps].
double planar_increment_theta(const BivariateMetric& metric, double s, double t, double eps);

/// Theta^eps for a homogeneous metric as a function of the lag t - s >= 0.
double homogeneous_theta(const UnivariateMetric& metric, double lag, double eps);

/// Deterministic Volterra kernel G(t,s). Adapted kernels vanish for s > t.
class VolterraKernel {
 public:
  using Fn1 = std::function<double(double)>;
  using Fn2 = std::function<double(double, double)>;

  struct Partials {
    Fn2 dt;   // dG/dt
    Fn2 ds;   // dG/ds
    Fn2 dst;  // d^2G/dsdt
  };

  static VolterraKernel general(std::string name, Fn2 g, bool adapted, Partials partials = {});

  /// G(t,s) = 1_{s<=t} k(t-s). sq_primitive(r) = int_0^r k^2, if known.
  static VolterraKernel convolution(std::string name, Fn1 profile, Fn1 sq_primitive = {},
                                    Partials partials = {});

  /// G(t,s) = c 1_{s<=t}.
  static VolterraKernel step(std::string name, double c);

  const std::string& name() const noexcept { return name_; }
  bool adapted() const noexcept { return adapted_; }
  std::optional<double> constant_profile() const noexcept { return constant_; }
  bool is_convolution() const noexcept { return static_cast<bool>(profile_); }
  bool has_sq_primitive() const noexcept { return static_cast<bool>(sq_primitive_); }
  const Partials& partials() const noexcept { return partials_; }

  double operator()(double t, double s) const;
  double profile(double r) const { return profile_(r); }
  double sq_primitive(double r) const { return sq_primitive_(r); }

  /// Gamma(s) G(t,s); the result is a general (non-convolution) kernel.
  VolterraKernel scaled(std::string name, Fn1 gamma) const;

 private:
  VolterraKernel() = default;

  std::string name_;
  Fn2 eval_;
  Fn1 profile_;
  Fn1 sq_primitive_;
  bool adapted_ = true;
  Partials partials_;
  std::optional<double> constant_;
};

// Builtin metrics.
UnivariateMetric power_metric(double exponent);
UnivariateMetric brownian_metric();
/// r^a / log(1/r) on (0, 1/e], continued by its tangent line beyond 1/e.
UnivariateMetric log_corrected_metric(double exponent);
BivariateMetric fbm_metric(double hurst);
BivariateMetric brownian_bivariate();

// Builtin kernels.
VolterraKernel brownian_kernel();
/// G(t,s) = 1_{s<=t} (t-s)^{H-1/2}.
VolterraKernel rl_fbm_kernel(double hurst);
/// G(t,s) = 1_{s<=t} ((delta^2)'(t-s))^{1/2}.
VolterraKernel kernel_from_metric(const UnivariateMetric& metric);

/// Canonical metric of X(t) = int G(t,s) dW(s), by tanh-sinh quadrature.
/// Non-adapted kernels are integrated over [0, support].
BivariateMetric metric_from_kernel(const VolterraKernel& kernel, double support = 0.0);

}  // namespace oddvar
