#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "oddvar/errors.hpp"
#include "oddvar/variation.hpp"

using namespace oddvar;

namespace {

PathEnsemble small_ensemble(std::size_t paths = 6) {
  TimeGrid g(1.0, 64, {1.0 / 8, 1.0 / 16, 1.0 / 32});
  return simulate(GaussianCovariance{fbm_metric(0.3)}, g, paths, 21);
}

// Straight transcription of (h/eps) sum_{i<n} f(X_i, X_{i+k}).
template <class F>
double brute(const PathEnsemble& e, std::size_t p, double eps, std::size_t upto, F f) {
  const std::size_t k = e.grid().steps_for(eps);
  double acc = 0.0;
  for (std::size_t i = 0; i < upto; ++i) acc += f(e.value(p, i), e.value(p, i + k));
  return acc * e.grid().step() / eps;
}

}  // namespace

TEST_CASE("odd variation against a direct sum") {
  auto e = small_ensemble();
  for (double m : {1.0, 2.5, 3.0}) {
    for (double eps : e.grid().ladder()) {
      const auto v = odd_variation(e, m, eps);
      for (std::size_t p = 0; p < e.n_paths(); ++p) {
        const double ref = brute(e, p, eps, 64, [m](double a, double b) { return signed_power(b - a, m); });
        CHECK(v[p] == doctest::Approx(ref).epsilon(1e-13).scale(1e-13));
      }
    }
  }
  CHECK_THROWS_AS(odd_variation(e, 0.5, 1.0 / 8), DomainError);
  CHECK_THROWS_AS(odd_variation(e, 3.0, 1.0 / 4), GridError);
}

TEST_CASE("weighted variation with g = 1 is the odd variation") {
  auto e = small_ensemble();
  const auto a = odd_variation(e, 3.0, 1.0 / 16);
  const auto b = weighted_variation(e, 3.0, [](double) { return 1.0; }, 1.0 / 16);
  for (std::size_t p = 0; p < a.size(); ++p) CHECK(a[p] == b[p]);
  const auto c = weighted_variation(e, 3.0, [](double x) { return std::cos(x); }, 1.0 / 16);
  const double ref = brute(e, 2, 1.0 / 16, 64, [](double x0, double x1) {
    return signed_power(x1 - x0, 3.0) * std::cos(0.5 * (x0 + x1));
  });
  CHECK(c[2] == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("covariation of brownian motion with itself is near T") {
  TimeGrid g(1.0, 1024, {1.0 / 16, 1.0 / 32, 1.0 / 64});
  auto e = simulate(GaussianVolterra{brownian_kernel()}, g, 400, 5);
  auto r = summarize(e, [] {
    Functional f;
    f.kind = Functional::Kind::quadratic_covariation;
    return f;
  }());
  for (const auto& rec : r.records) CHECK(std::abs(rec.mean - 1.0) < 4 * rec.mean_se);
  auto other = simulate(GaussianVolterra{brownian_kernel()}, TimeGrid(1.0, 512, {1.0 / 16}), 400, 5);
  CHECK_THROWS_AS(covariation(e, other, 1.0 / 16), GridError);
}

TEST_CASE("symmetric integral telescopes for linear and quadratic f") {
  auto e = small_ensemble();
  const double t = 0.75;
  const std::size_t n = e.grid().index_of(t);
  for (double eps : e.grid().ladder()) {
    const std::size_t k = e.grid().steps_for(eps);
    const auto lin = ito_residual(e, [](double x) { return 2 * x + 1; }, [](double) { return 2.0; }, t, eps);
    const auto sq = ito_residual(e, [](double x) { return x * x; }, [](double x) { return 2 * x; }, t, eps);
    for (std::size_t p = 0; p < e.n_paths(); ++p) {
      double head = 0, tail = 0, head2 = 0, tail2 = 0;
      for (std::size_t i = 0; i < k; ++i) {
        head += e.value(p, i), tail += e.value(p, n + i);
        head2 += e.value(p, i) * e.value(p, i), tail2 += e.value(p, n + i) * e.value(p, n + i);
      }
      const double x0 = e.value(p, 0), xt = e.value(p, n);
      CHECK(std::abs(lin[p] - (2 * (xt - x0) - 2 * (tail - head) / k)) < 1e-12);
      CHECK(std::abs(sq[p] - (xt * xt - x0 * x0 - (tail2 - head2) / k)) < 1e-12);
    }
  }
  CHECK_THROWS_AS(symmetric_integral(e, {}, t, 1.0 / 8), ValidationError);
  CHECK_THROWS_AS(symmetric_integral(e, [](double) { return 1.0; }, 0.3, 1.0 / 8), GridError);
}

TEST_CASE("slope fit recovers power laws") {
  std::vector<double> x = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  std::vector<double> y, se;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.7)), se.push_back(0.0);
  auto f = fit_slope(x, y, se);
  REQUIRE(f.has_value());
  CHECK(f->slope == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(f->intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK_FALSE(f->weighted);
  CHECK(f->half_width == doctest::Approx(0.0).scale(1.0));

  // noisy points dropped; fewer than three left -> no fit
  std::vector<double> noisy = {0.01, 0.01, 0.5, 0.5};
  for (auto& s : noisy) s *= 1.0;
  std::vector<double> se2 = {0.01 * y[0], 0.01 * y[1], 0.5 * y[2], 0.5 * y[3]};
  CHECK_FALSE(fit_slope(x, y, se2).has_value());
  std::vector<double> se3 = {0.01 * y[0], 0.01 * y[1], 0.02 * y[2], 0.5 * y[3]};
  auto g = fit_slope(x, y, se3);
  REQUIRE(g.has_value());
  CHECK(g->points_used == 3);
  CHECK(g->weighted);
  CHECK(g->slope == doctest::Approx(0.7).epsilon(1e-12));
  CHECK_THROWS_AS(fit_slope({0.1, 0.1, 0.1}, {1, 2, 3}, {0, 0, 0}), ReportError);
}

TEST_CASE("ladder report content") {
  TimeGrid g(1.0, 256, {1.0 / 4, 1.0 / 16, 1.0 / 64});
  auto r = ladder_sweep(GaussianCovariance{fbm_metric(0.3)}, Functional::odd(3), g, 200, 4);
  REQUIRE(r.records.size() == 3);
  CHECK(r.n_paths == 200);
  CHECK(r.seed == 4);
  CHECK(r.fit.has_value());
  CHECK(r.mean_square_decreasing());
  for (const auto& rec : r.records) CHECK(rec.estimates.size() == 200);
  const auto csv = r.to_csv();
  CHECK(csv.rfind("eps,mean,mean_se,mean_square,mean_square_se,log_eps,log_msq,se\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  auto j = r.to_json(false);
  CHECK(j["records"].size() == 3);
  CHECK_FALSE(j["records"][0].contains("estimates"));
  CHECK(r.to_json(true)["records"][0]["estimates"].size() == 200);
  CHECK_THROWS_AS(ladder_sweep(GaussianCovariance{fbm_metric(0.3)}, Functional::odd(3), TimeGrid(1.0, 256, {0.25, 0.125}),
                               10, 1),
                  GridError);
}

TEST_CASE("functional names round-trip") {
  for (auto k : {Functional::Kind::odd_variation, Functional::Kind::weighted_variation,
                 Functional::Kind::quadratic_covariation, Functional::Kind::symmetric_integral,
                 Functional::Kind::ito_residual}) {
    CHECK(functional_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(functional_kind("strong_variation"), ValidationError);
}
