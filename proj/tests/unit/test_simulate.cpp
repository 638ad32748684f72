#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gauss_hermite.hpp"
#include "oddvar/errors.hpp"
#include "oddvar/reduce.hpp"
#include "oddvar/simulate.hpp"

using namespace oddvar;
using kernels::Backend;

namespace {

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Empirical covariance of X(t_a), X(t_b) against an exact value, within k SE.
void check_covariance(const PathEnsemble& e, std::size_t a, std::size_t b, double exact, double k = 5.0) {
  std::vector<double> prod(e.n_paths());
  for (std::size_t p = 0; p < e.n_paths(); ++p) prod[p] = e.value(p, a) * e.value(p, b);
  const auto est = estimate_mean(prod);
  CHECK(std::abs(est.mean - exact) <= k * est.se);
}

}  // namespace

TEST_CASE("cholesky fBm reproduces the covariance") {
  TimeGrid g(1.0, 64, {1.0 / 16});
  auto e = simulate_gaussian_cholesky(fbm_metric(0.3), g, 20000, 3);
  REQUIRE(e.points() == 69);
  for (auto [a, b] : {std::pair<std::size_t, std::size_t>{16, 16}, {16, 48}, {64, 68}, {1, 2}}) {
    check_covariance(e, a, b, fbm_covariance(0.3, g.time(a), g.time(b)));
  }
  for (std::size_t p = 0; p < 10; ++p) CHECK(e.value(p, 0) == 0.0);
}

TEST_CASE("serial and parallel samplers agree bitwise") {
  TimeGrid g(1.0, 128, {1.0 / 8, 1.0 / 16, 1.0 / 32});
  auto model = fbm_metric(0.25);
  auto s = simulate_gaussian_cholesky(model, g, 33, 9, Backend::serial);
  ScopedWorkers w(4);
  auto o = simulate_gaussian_cholesky(model, g, 33, 9, Backend::omp);
  CHECK(same_bits(s.values(), o.values()));
  auto vs = simulate_gaussian_volterra(rl_fbm_kernel(0.3), g, 33, 9, Backend::serial);
  auto vo = simulate_gaussian_volterra(rl_fbm_kernel(0.3), g, 33, 9, Backend::omp);
  CHECK(same_bits(vs.values(), vo.values()));
}

TEST_CASE("seeds: same seed same paths, different seed different paths") {
  TimeGrid g(1.0, 64, {1.0 / 16});
  auto a = simulate(GaussianVolterra{brownian_kernel()}, g, 5, 1);
  auto b = simulate(GaussianVolterra{brownian_kernel()}, g, 5, 1);
  auto c = simulate(GaussianVolterra{brownian_kernel()}, g, 5, 2);
  CHECK(same_bits(a.values(), b.values()));
  CHECK_FALSE(same_bits(a.values(), c.values()));
}

TEST_CASE("brownian sampler: variance t and independent increments") {
  TimeGrid g(1.0, 256, {1.0 / 16});
  auto e = simulate(GaussianVolterra{brownian_kernel()}, g, 20000, 4);
  check_covariance(e, 128, 128, 0.5);
  check_covariance(e, 64, 256, 0.25);
  check_covariance(e, 272, 272, 272.0 / 256);
}

TEST_CASE("brownian fast path matches the dense Volterra operator") {
  TimeGrid g(1.0, 128, {1.0 / 16});
  auto fast = simulate_gaussian_volterra(brownian_kernel(), g, 7, 5);
  auto dense_kernel = VolterraKernel::convolution("one", [](double) { return 1.0; });
  auto dense = simulate_gaussian_volterra(dense_kernel, g, 7, 5);
  CHECK(same_bits(fast.values(), dense.values()));
}

TEST_CASE("RL-fBm operator: row energy converges to the exact variance") {
  const double h = 0.3;
  for (std::size_t n : {256, 1024}) {
    TimeGrid g(1.0, n, {1.0 / 16});
    auto op = volterra_operator(rl_fbm_kernel(h), g);
    double energy = 0.0;
    for (double a : op.row(n)) energy += a * a;
    const double exact = 1.0 / (2 * h);
    // midpoint rule on (t-s)^{2H-1}: relative error shrinks like n^{-2H}
    CHECK(std::abs(energy - exact) / exact < 2.0 * std::pow(static_cast<double>(n), -2 * h));
  }
}

TEST_CASE("indefinite covariance is a model error") {
  auto bad = BivariateMetric::from_covariance("bad", [](double s, double t) { return s == t ? 1.0 : 1.5; });
  TimeGrid g(1.0, 32, {1.0 / 8});
  CHECK_THROWS_AS(simulate_gaussian_cholesky(bad, g, 2, 1), ModelError);
  try {
    simulate_gaussian_cholesky(bad, g, 2, 1);
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("smallest eigenvalue") != std::string::npos);
  }
}

TEST_CASE("non-finite kernel values are kernel errors") {
  auto k = VolterraKernel::general("nan", [](double, double s) { return s > 0.5 ? NAN : 1.0; }, true);
  TimeGrid g(1.0, 32, {1.0 / 8});
  CHECK_THROWS_AS(simulate_gaussian_volterra(k, g, 2, 1), KernelError);
}

TEST_CASE("martingale with unit volatility is the Gaussian Volterra process") {
  TimeGrid g(1.0, 128, {1.0 / 16});
  auto k = rl_fbm_kernel(0.3);
  auto a = simulate(MartingaleVolterra{k, VolatilityModel::constant(1.0), 3}, g, 9, 6);
  auto b = simulate(GaussianVolterra{k}, g, 9, 6);
  CHECK(same_bits(a.values(), b.values()));
}

TEST_CASE("martingale volatility only sees the past") {
  // H(s) = W(s): M(1) = int W dW has mean 0; a look-ahead would bias it by 1/2.
  TimeGrid g(1.0, 256, {1.0 / 16});
  VolatilityModel vol("W", [](double, double w) { return w; });
  auto m = simulate_driving_martingale(vol, g, 20000, 8);
  std::vector<double> x(m.n_paths());
  for (std::size_t p = 0; p < x.size(); ++p) x[p] = m.value(p, 256);
  const auto est = estimate_mean(x);
  CHECK(std::abs(est.mean) < 5 * est.se);
  CHECK(est.se < 0.02);
}

TEST_CASE("cos volatility gamma against Gauss-Hermite") {
  auto vol = VolatilityModel::cos_of_brownian();
  const auto rule = testing::gauss_hermite(64);
  for (int m : {1, 3, 5}) {
    for (double s : {0.0, 0.1, 0.5, 1.0}) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rule.x.size(); ++i) acc += rule.w[i] * std::pow(std::cos(std::sqrt(s) * rule.x[i]), 2 * m);
      CHECK(std::pow(vol.gamma(s, m), 2 * m) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
  CHECK(vol.bound().value() == 1.0);
  CHECK_THROWS_AS(VolatilityModel("raw", [](double, double) { return 1.0; }).gamma(0.5, 3), PreconditionError);
}

TEST_CASE("comparison process scales the kernel by gamma") {
  MartingaleVolterra mv{rl_fbm_kernel(0.3), VolatilityModel::cos_of_brownian(), 3};
  auto z = derive_comparison_process(mv);
  REQUIRE(std::holds_alternative<GaussianVolterra>(z));
  const auto& k = std::get<GaussianVolterra>(z).kernel;
  CHECK(k(0.9, 0.4) == doctest::Approx(mv.volatility.gamma(0.4, 3) * std::pow(0.5, -0.2)));
  CHECK(describe(z).find("gaussian_volterra") == 0);
}

TEST_CASE("ensemble dumps round-trip") {
  TimeGrid g(1.0, 64, {1.0 / 16});
  auto e = simulate(GaussianCovariance{fbm_metric(0.3)}, g, 3, 11);
  const auto dir = std::filesystem::temp_directory_path() / "oddvar_ens_test";
  std::filesystem::create_directories(dir);
  e.write_binary(dir / "e.bin");
  auto r = PathEnsemble::read_binary(dir / "e.bin");
  CHECK(same_bits(e.values(), r.values()));
  CHECK(r.grid() == e.grid());
  CHECK(r.seed() == 11);
  CHECK(r.model() == e.model());
  e.write_csv(dir / "e.csv");
  std::ifstream in(dir / "e.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,x0,x1,x2");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == g.points());
  auto scaled = e.scaled(2.0);
  CHECK(scaled.value(1, 10) == 2.0 * e.value(1, 10));
}
