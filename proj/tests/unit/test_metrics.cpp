#include <cmath>

#include "doctest.h"
#include "oddvar/errors.hpp"
#include "oddvar/metrics.hpp"

using namespace oddvar;

namespace {

// Composite Simpson after the substitution u = s - w^(1/q), which removes
// an integrable (s-u)^{-p} singularity at u = s for q = 1 - p.
double rl_cross_oracle(double hurst, double s, double t) {
  const double a = hurst - 0.5;
  const double q = 1.0 + 2.0 * a;  // exponent of the singular part
  auto f = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double d = std::pow(w, 1.0 / q);  // s - u
    const double du_dw = std::pow(w, 1.0 / q - 1.0) / q;
    const double diff = std::pow(t - s + d, a) - std::pow(d, a);
    return diff * diff * du_dw;
  };
  const double top = std::pow(s, q);
  const int n = 200000;
  const double h = top / n;
  double acc = f(0.0) + f(top);
  for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0 + std::pow(t - s, 2.0 * hurst) / (2.0 * hurst);
}

}  // namespace

TEST_CASE("signed power keeps the sign") {
  CHECK(signed_power(-2.0, 3.0) == doctest::Approx(-8.0));
  CHECK(signed_power(-4.0, 2.5) == doctest::Approx(-32.0));
  CHECK(signed_power(0.0, 2.5) == 0.0);
}

TEST_CASE("fbm covariance satisfies the polarization identity") {
  auto m = fbm_metric(0.3);
  for (double s : {0.1, 0.4, 0.9}) {
    for (double t : {0.2, 0.5, 1.0}) {
      const double q = m.covariance(s, t);
      CHECK(q == doctest::Approx(fbm_covariance(0.3, s, t)).epsilon(1e-14));
      CHECK(q == doctest::Approx(0.5 * (m.covariance(s, s) + m.covariance(t, t) - m.delta_sq(s, t))).epsilon(1e-12));
      CHECK(m.delta_sq(s, t) == doctest::Approx(std::pow(std::abs(t - s), 0.6)).epsilon(1e-12));
    }
  }
  REQUIRE(m.homogeneous_part() != nullptr);
}

TEST_CASE("planar and homogeneous theta agree") {
  for (double h : {0.1, 1.0 / 6, 0.3, 0.5}) {
    auto m = fbm_metric(h);
    const double eps = 1.0 / 64;
    for (double lag : {0.0, 0.3 * eps, eps, 1.7 * eps, 2.0 * eps, 0.2, 0.7}) {
      const double s = 0.05;
      const double a = planar_increment_theta(m, s, s + lag, eps);
      const double b = homogeneous_theta(*m.homogeneous_part(), lag, eps);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(b), eps));
    }
  }
}

TEST_CASE("theta at lag eps") {
  const double h = 0.3, eps = 0.01;
  auto u = power_metric(2 * h);
  CHECK(homogeneous_theta(u, eps, eps) ==
        doctest::Approx(0.5 * (std::pow(2 * eps, 2 * h) - 2 * std::pow(eps, 2 * h))).epsilon(1e-13));
  // variance of an increment
  CHECK(homogeneous_theta(u, 0.0, eps) == doctest::Approx(std::pow(eps, 2 * h)).epsilon(1e-13));
  CHECK_THROWS_AS(homogeneous_theta(u, -1.0, eps), DomainError);
}

TEST_CASE("structural flags are asserted at construction") {
  CHECK_NOTHROW(power_metric(0.6));
  CHECK_NOTHROW(power_metric(3.0));
  CHECK_THROWS_AS(UnivariateMetric("cube", [](double r) { return r * r * r; }, {}, MetricFlags{true, true}),
                  DomainError);
  CHECK_THROWS_AS(UnivariateMetric("decreasing", [](double r) { return 1.0 - r; }, {}, MetricFlags{true, false}),
                  DomainError);
  CHECK_THROWS_AS(power_metric(0.0), DomainError);
  CHECK_THROWS_AS(fbm_metric(1.2), DomainError);
}

TEST_CASE("density of univariate metrics") {
  auto u = power_metric(0.6);
  const double r = 0.3, d = 1e-6;
  CHECK(u.density(r) == doctest::Approx((u.delta_sq(r + d) - u.delta_sq(r - d)) / (2 * d)).epsilon(1e-7));
  UnivariateMetric bare("bare", [](double r) { return r; }, {}, MetricFlags{true, true});
  CHECK_THROWS_AS(bare.density(0.5), UnsupportedMetricError);
  CHECK(u.delta(0.25) == doctest::Approx(std::pow(0.25, 0.3)));
  CHECK(u.delta_sq(0.0) == 0.0);
}

TEST_CASE("dyadic probe points") {
  auto pts = sampling::dyadic_points(2.0);
  CHECK(pts.size() == 1024 + 30);
  CHECK(*std::max_element(pts.begin(), pts.end()) == doctest::Approx(2.0));
}

TEST_CASE("log-corrected metric: concave only near zero") {
  auto m = log_corrected_metric(1.0 / 3);
  const double ell_star = [] {
    const double a = 1.0 / 3, qa = a * (1 - a), qb = 2 * a - 1;
    return (qb + std::sqrt(qb * qb + 8 * qa)) / (2 * qa);
  }();
  CHECK(m.probe_range() == doctest::Approx(std::exp(-ell_star)));
  CHECK(m.probe_range() == doctest::Approx(0.0957).epsilon(0.01));
  // Second difference sign by finite differences on both sides of r_c.
  auto second = [&](double r) {
    const double d = 1e-4 * r;
    return m.delta_sq(r + d) - 2 * m.delta_sq(r) + m.delta_sq(r - d);
  };
  CHECK(second(0.5 * m.probe_range()) < 0.0);
  CHECK(second(0.2) > 0.0);
  const double r = 0.01;
  CHECK(m.delta_sq(r) == doctest::Approx(std::pow(r, 1.0 / 3) / std::log(1 / r)));
}

TEST_CASE("riemann-liouville kernel and its metric") {
  const double h = 0.3;
  auto k = rl_fbm_kernel(h);
  CHECK(k(0.5, 0.25) == doctest::Approx(std::pow(0.25, h - 0.5)));
  CHECK(k(0.25, 0.5) == 0.0);
  CHECK(k.adapted());
  auto m = metric_from_kernel(k);
  CHECK(m.variance(0.7) == doctest::Approx(std::pow(0.7, 2 * h) / (2 * h)).epsilon(1e-10));
  for (auto [s, t] : {std::pair{0.2, 0.3}, std::pair{0.5, 0.9}, std::pair{0.05, 0.06}}) {
    CHECK(m.delta_sq(s, t) == doctest::Approx(rl_cross_oracle(h, s, t)).epsilon(1e-6));
  }
  // delta <= 2|t-s|^H
  CHECK(m.delta_sq(0.5, 0.6) <= 4.0 * std::pow(0.1, 2 * h));
  CHECK(m.homogeneous_part() == nullptr);
}

TEST_CASE("brownian kernel and step kernels") {
  auto k = brownian_kernel();
  REQUIRE(k.constant_profile().has_value());
  CHECK(*k.constant_profile() == 1.0);
  CHECK(k(0.5, 0.2) == 1.0);
  CHECK(k(0.2, 0.5) == 0.0);
  auto m = metric_from_kernel(k);
  CHECK(m.delta_sq(0.2, 0.7) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(rl_fbm_kernel(0.3).constant_profile().has_value());
}

TEST_CASE("kernel from metric reproduces the metric increment") {
  auto u = power_metric(0.6);
  auto k = kernel_from_metric(u);
  CHECK(k.profile(0.25) == doctest::Approx(std::sqrt(0.6 * std::pow(0.25, -0.4))));
  auto m = metric_from_kernel(k);
  // Variance of X(t) = int_0^t k^2 = delta^2(t).
  CHECK(m.variance(0.4) == doctest::Approx(u.delta_sq(0.4)).epsilon(1e-10));
  UnivariateMetric bare("bare", [](double r) { return r; }, {}, MetricFlags{true, true});
  CHECK_THROWS_AS(kernel_from_metric(bare), UnsupportedMetricError);
}

TEST_CASE("scaled kernel multiplies by gamma(s)") {
  auto k = rl_fbm_kernel(0.3).scaled("half", [](double s) { return 0.5 + s; });
  CHECK(k(0.8, 0.3) == doctest::Approx(0.8 * std::pow(0.5, -0.2)));
  CHECK(k(0.3, 0.8) == 0.0);
}

TEST_CASE("non-homogeneous metric from covariance") {
  auto m = BivariateMetric::from_covariance("bb", [](double s, double t) { return std::min(s, t) - s * t; });
  CHECK(m.delta_sq(0.2, 0.5) == doctest::Approx(0.3 - 0.09).epsilon(1e-12));
  CHECK(m.variance(0.5) == doctest::Approx(0.25));
}
