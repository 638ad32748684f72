#include <cmath>
#include <vector>

#include "doctest.h"
#include "oddvar/conditions.hpp"
#include "oddvar/errors.hpp"
#include "oddvar/registry.hpp"

using namespace oddvar;

namespace {

std::vector<double> dyadic_ladder(int from, int to) {
  std::vector<double> out;
  for (int k = from; k <= to; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

bool has_counterexample(const ConditionVerdict& v) { return v.witness.contains("counterexample"); }

}  // namespace

TEST_CASE("little-o examples") {
  // delta = r^{1/4}: delta^2 = r^{1/2}
  auto a = check_little_o(power_metric(0.5), 3);
  CHECK(a.status == Status::pass);
  auto b = check_little_o(power_metric(1.0 / 3), 3);
  CHECK(b.status == Status::fail);
  CHECK(has_counterexample(b));
  auto c = check_little_o(log_corrected_metric(1.0 / 3), 3, LittleOConvention::on_delta);
  CHECK(c.status == Status::pass);
  // rho = 1/sqrt(log(1/r))
  const auto rho = c.witness["rho"].get<std::vector<double>>();
  const auto r = c.witness["r"].get<std::vector<double>>();
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(rho[i] == doctest::Approx(1.0 / std::sqrt(std::log(1.0 / r[i]))));
}

TEST_CASE("little-o truth table") {
  for (int m : {3, 5}) {
    for (double h : {0.1, 1.0 / 6, 0.2, 0.25, 0.3, 0.4}) {
      CAPTURE(m);
      CAPTURE(h);
      const bool expect = h > 1.0 / (2 * m) + 1e-12;
      CHECK(check_little_o(power_metric(2 * h), m).passed() == expect);
    }
  }
}

TEST_CASE("little-o conventions differ") {
  // delta^2 = r^{1/4}, m = 3: delta = r^{1/8} is o(r^{1/6})? no. delta^2 is o(r^{1/6}): yes.
  CHECK_FALSE(check_little_o(power_metric(0.25), 3, LittleOConvention::on_delta).passed());
  CHECK(check_little_o(power_metric(0.25), 3, LittleOConvention::on_delta_sq).passed());
}

TEST_CASE("concave increasing") {
  CHECK(check_concave_increasing(power_metric(0.6)).passed());
  CHECK(check_concave_increasing(brownian_metric()).passed());
  auto bad = check_concave_increasing(power_metric(3.0));
  CHECK(bad.status == Status::fail);
  REQUIRE(has_counterexample(bad));
  CHECK(bad.witness["counterexample"]["kind"] == "concavity");
  // concave only below r_c ~ 0.0957
  CHECK(check_concave_increasing(log_corrected_metric(1.0 / 3), 0.09).passed());
  auto wide = check_concave_increasing(log_corrected_metric(1.0 / 3), std::exp(-1.0));
  CHECK(wide.status == Status::fail);
  CHECK(has_counterexample(wide));
}

TEST_CASE("measure bound: exponent 2H - 1 and the threshold") {
  const auto ladder = dyadic_ladder(4, 10);
  for (double h : {0.1, 1.0 / 6, 0.25, 0.3, 0.4}) {
    CAPTURE(h);
    auto v = check_measure_bound(fbm_metric(h), 3, ladder);
    REQUIRE(v.witness["exponent"].is_number());
    CHECK(std::abs(v.witness["exponent"].get<double>() - (2 * h - 1)) < 0.05);
    const bool expect = 2 * h - 1 >= -1 + 1.0 / 3 - 0.05;
    CHECK(v.passed() == expect);
  }
  auto fail = check_measure_bound(fbm_metric(0.1), 3, ladder);
  CHECK(fail.status == Status::fail);
  CHECK(has_counterexample(fail));
  auto bm = check_measure_bound(brownian_bivariate(), 3, ladder);
  CHECK(bm.passed());
  for (double x : bm.witness["mu_OD"].get<std::vector<double>>()) CHECK(std::abs(x) < 1e-12);
}

TEST_CASE("measure bound rejects a non-geometric ladder") {
  CHECK_THROWS_AS(check_measure_bound(fbm_metric(0.3), 3, {0.1, 0.05, 0.02, 0.01}), GridError);
}

TEST_CASE("condition M") {
  const std::vector<std::vector<double>> tuples{{0.25, 0.5, 1.0}, {0.1, 0.1, 0.9}};
  CHECK(check_condition_M(VolatilityModel::constant(0.7), 3, tuples, 2000, 1).passed());
  auto cw = VolatilityModel::cos_of_brownian();
  CHECK(check_condition_M(cw, 3, {{0.25, 0.5, 1.0}}, 100000, 5).passed());
  auto halved = cw.with_gamma([cw](double s, int m) { return 0.5 * cw.gamma(s, m); });
  auto bad = check_condition_M(halved, 3, {{0.25, 0.5, 1.0}}, 100000, 5);
  CHECK(bad.status == Status::fail);
  REQUIRE(has_counterexample(bad));
  CHECK(bad.witness["counterexample"]["times"].size() == 3);
  CHECK_THROWS_AS(check_condition_M(cw, 3, {{0.1, 0.2}}, 1000, 1), DomainError);
}

TEST_CASE("condition M is reproducible") {
  auto cw = VolatilityModel::cos_of_brownian();
  auto a = check_condition_M(cw, 3, {{0.25, 0.5, 1.0}}, 5000, 9);
  auto b = check_condition_M(cw, 3, {{0.25, 0.5, 1.0}}, 5000, 9);
  CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("additional: brownian kernel has no overlap") {
  const auto ladder = dyadic_ladder(4, 8);
  auto vals = additional_integral(brownian_kernel(), ladder, {.horizon = 1.0, .resolution = 1024});
  for (double x : vals) CHECK(x == 0.0);
  CHECK(check_additional(brownian_kernel(), brownian_metric(), ladder).passed());
}

TEST_CASE("additional: non-adapted kernel grows") {
  auto k = VolterraKernel::general(
      "|t-u|^-1/4", [](double t, double u) { return std::pow(std::abs(t - u), -0.25); }, false);
  auto v = check_additional(k, brownian_metric(), dyadic_ladder(4, 8));
  CHECK(v.status == Status::fail);
  CHECK(has_counterexample(v));
}

TEST_CASE("additional: RL-fBm strengthened exponent") {
  AdditionalOptions o;
  o.resolution = 4096;
  o.min_exponent = 1.0 + 1.0 / 3 - 0.1;
  auto v = check_additional(rl_fbm_kernel(0.3), power_metric(0.6), dyadic_ladder(6, 10), o);
  CHECK(v.witness["I_exponent"].get<double>() >= 1.0 + 1.0 / 3 - 0.1);
  CHECK(v.passed());
}

TEST_CASE("for-Ito conditions") {
  for (double h : {0.1, 0.3, 0.45}) {
    auto v = check_forito_conditions(fbm_metric(h), power_metric(2 * h), {.n_pairs = 2000});
    CAPTURE(h);
    CHECK(v.passed());
    CHECK(v.witness["i"]["inf_ratio"].get<double>() == doctest::Approx(1.0));
  }
  // 2^H - 1 < b at a = 2
  auto v = check_forito_conditions(fbm_metric(0.3), power_metric(0.6), {.n_pairs = 2000});
  CHECK(std::pow(2.0, 0.3) - 1 < 0.45);
  CHECK(v.witness["iii"]["holds"] == true);
  auto spec = build_model({{"name", "rl_fbm"}, {"params", {{"H", 0.3}}}});
  auto rl = check_forito_conditions(*spec.metric, *spec.univariate, {.n_pairs = 500});
  CHECK(rl.passed());
}

TEST_CASE("deltauuk against the closed form") {
  const auto ladder = dyadic_ladder(4, 12);
  for (double h : {0.1, 0.3}) {
    auto v = check_deltauuk(power_metric(2 * h), 2, ladder);
    CHECK(v.passed());
    const auto r = v.witness["R"].get<std::vector<double>>();
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      const double eps = ladder[i];
      CHECK(r[i] == doctest::Approx((1 - std::pow(eps, 1 - 2 * h)) / (1 - 2 * h)).epsilon(1e-8));
    }
  }
  auto lip = check_deltauuk(power_metric(2.0), 2, ladder);
  CHECK(lip.status == Status::fail);
  CHECK(has_counterexample(lip));
  const auto r = lip.witness["R"].get<std::vector<double>>();
  CHECK(r.back() == doctest::Approx((1 - ladder.back()) / ladder.back()).epsilon(1e-8));
  CHECK(check_deltauuk(power_metric(1.0 / 3), 3, ladder).passed());
  CHECK(check_deltauuk(power_metric(1.0 / 3), 2, ladder).passed());
}

TEST_CASE("prop ex bounds") {
  const int m = 3;
  const double alpha = 1.0 / (2.0 * m) - 0.5;
  PropExDecomposition pure;
  pure.g = [=](double t, double s) { return std::pow(t - s, alpha); };
  pure.dg_dt = [=](double t, double s) { return alpha * std::pow(t - s, alpha - 1); };
  pure.dg_ds = [=](double t, double s) { return -alpha * std::pow(t - s, alpha - 1); };
  pure.dg_dsdt = [=](double t, double s) { return -alpha * (alpha - 1) * std::pow(t - s, alpha - 2); };
  pure.f = [](double, double) { return 1.0; };
  auto ok = check_prop_ex_bounds(pure, m);
  CHECK(ok.passed());
  CHECK(ok.witness["c_first"].get<double>() == doctest::Approx(2 * std::abs(alpha)).epsilon(1e-9));

  // g = d^alpha (1 + a sin(1/d)), d = t - s
  const double a = 0.5;
  auto phi = [=](double d) { return 1 + a * std::sin(1 / d); };
  auto dphi = [=](double d) { return -a * std::cos(1 / d) / (d * d); };
  auto ddphi = [=](double d) { return a * (-std::sin(1 / d) / std::pow(d, 4) + 2 * std::cos(1 / d) / std::pow(d, 3)); };
  auto g1 = [=](double d) { return alpha * std::pow(d, alpha - 1) * phi(d) + std::pow(d, alpha) * dphi(d); };
  auto g2 = [=](double d) {
    return alpha * (alpha - 1) * std::pow(d, alpha - 2) * phi(d) + 2 * alpha * std::pow(d, alpha - 1) * dphi(d) +
           std::pow(d, alpha) * ddphi(d);
  };
  PropExDecomposition osc;
  osc.g = [=](double t, double s) { return std::pow(t - s, alpha) * phi(t - s); };
  osc.dg_dt = [=](double t, double s) { return g1(t - s); };
  osc.dg_ds = [=](double t, double s) { return -g1(t - s); };
  osc.dg_dsdt = [=](double t, double s) { return -g2(t - s); };
  auto bad = check_prop_ex_bounds(osc, m);
  CHECK(bad.status == Status::fail);
  CHECK(bad.detail.find("mixed-derivative bound") != std::string::npos);
  CHECK(has_counterexample(bad));

  PropExDecomposition fr = pure;
  fr.f_bound = [](double r) { return std::pow(r, 0.1); };
  CHECK(check_prop_ex_bounds(fr, m).passed());
  fr.f_bound = [](double r) { return r * r; };
  CHECK_FALSE(check_prop_ex_bounds(fr, m).passed());

  CHECK_THROWS_AS(check_prop_ex_bounds(PropExDecomposition{}, m), PreconditionError);
}

TEST_CASE("concave metrics have non-positive off-diagonal theta") {
  for (const auto& metric : {power_metric(0.2), power_metric(0.6), power_metric(1.0), log_corrected_metric(1.0 / 3)}) {
    const double range = metric.name().find("log") != std::string::npos ? 0.09 : 1.0;
    if (!check_concave_increasing(metric, range).passed()) continue;
    for (double eps : {1.0 / 64, 1.0 / 256}) {
      for (int k = 1; k < 200; ++k) {
        const double lag = eps * (1.0 + 0.37 * k);
        if (lag + eps > range) break;
        CHECK(homogeneous_theta(metric, lag, eps) <= 1e-15);
      }
    }
  }
}

TEST_CASE("verdict json") {
  auto v = check_little_o(power_metric(1.0 / 3), 3);
  auto j = v.to_json();
  CHECK(j["status"] == "fail");
  CHECK(j["id"] == "little_o_delta");
  CHECK(j.contains("witness"));
}
