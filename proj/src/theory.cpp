#include "oddvar/theory.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>

#include "oddvar/errors.hpp"
#include "oddvar/kernels.hpp"
#include "oddvar/reduce.hpp"
#include "oddvar/rng.hpp"

namespace oddvar {

namespace {

void enumerate_pairings(std::uint32_t mask, std::uint32_t full, int m, int cross, std::vector<std::uint64_t>& counts) {
  if (mask == full) {
    ++counts[static_cast<std::size_t>(cross)];
    return;
  }
  int i = 0;
  while (mask & (1u << i)) ++i;
  for (int j = i + 1; j < 2 * m; ++j) {
    if (mask & (1u << j)) continue;
    const bool is_cross = (i < m) != (j < m);
    enumerate_pairings(mask | (1u << i) | (1u << j), full, m, cross + (is_cross ? 1 : 0), counts);
  }
}

}  // namespace

IsserlisCoefficients isserlis_coefficients(int m) {
  if (m < 1 || m > 9) throw DomainError(fmt::format("isserlis_coefficients: m = {} outside 1..9", m));
  if (m % 2 == 0) throw DomainError(fmt::format("isserlis_coefficients: m = {} is even", m));
  std::vector<std::uint64_t> by_cross(static_cast<std::size_t>(m) + 1, 0);
  enumerate_pairings(0, (1u << (2 * m)) - 1, m, 0, by_cross);
  IsserlisCoefficients out;
  out.m = m;
  for (int j = 0; j <= (m - 1) / 2; ++j) out.c.push_back(by_cross[static_cast<std::size_t>(m - 2 * j)]);
  return out;
}

double second_moment_integrand(const IsserlisCoefficients& c, double theta, double var_y, double var_z) {
  double acc = 0.0;
  const double vv = var_y * var_z;
  for (std::size_t j = 0; j < c.c.size(); ++j) {
    acc += static_cast<double>(c.c[j]) * std::pow(theta, c.m - 2 * static_cast<int>(j)) *
           std::pow(vv, static_cast<double>(j));
  }
  return acc;
}

namespace {

struct LagCell {
  double r;
  double w;
  bool band;
};

// Lag cells on [0, T]. The band [0, 2 eps] is split at eps; each half uses
// midpoint cells in u with r = a + eps phi(u), phi' = 140 u^3 (1-u)^3, so the
// r^{2H} kinks of Theta at 0 and eps are flattened. Beyond 2 eps cells grow
// geometrically up to h.
std::vector<LagCell> lag_cells(double horizon, double eps, std::size_t resolution) {
  if (resolution < 2) throw ResolutionError("quadrature resolution must be at least 2");
  if (!(eps > 0.0) || eps > horizon / 4.0) {
    throw DomainError(fmt::format("quadrature needs 0 < eps <= T/4, got eps = {}", eps));
  }
  const double h = horizon / static_cast<double>(resolution);
  if (16.0 * eps / h < 8.0) {
    throw ResolutionError(
        fmt::format("resolution {} too coarse for eps = {}: the band |t-s| <= 2 eps holds fewer than 8 cells",
                    resolution, eps));
  }
  const auto per_panel = std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(8.0 * eps / h)));
  std::vector<LagCell> cells;
  for (double a : {0.0, eps}) {
    const double du = 1.0 / static_cast<double>(per_panel);
    for (std::size_t k = 0; k < per_panel; ++k) {
      const double u = (static_cast<double>(k) + 0.5) * du;
      const double u2 = u * u, v = 1.0 - u;
      const double phi = u2 * u2 * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)));
      cells.push_back({a + eps * phi, eps * 140.0 * u2 * u * v * v * v * du, true});
    }
  }
  double r = 2.0 * eps;
  double w = eps / static_cast<double>(per_panel);
  while (r < horizon) {
    w = std::min(h, 1.2 * w);
    double width = std::min(w, horizon - r);
    if (horizon - (r + width) < 0.25 * width) width = horizon - r;
    cells.push_back({r + 0.5 * width, width, false});
    r += width;
  }
  return cells;
}

// Integrand values per lag cell for several functions, each already
// integrated over position; returns [diag, off] per function.
using LagIntegrand = std::function<void(double r, std::span<double> out)>;

std::vector<std::pair<double, double>> integrate_over_lags(const std::vector<LagCell>& cells, std::size_t n_fn,
                                                           const LagIntegrand& f) {
  std::vector<double> values(cells.size() * n_fn);
  std::vector<double> unused(cells.size());
  kernels::map_indexed(
      kernels::Backend::omp,
      [&](std::size_t k) {
        f(cells[k].r, std::span<double>(values.data() + k * n_fn, n_fn));
        for (std::size_t q = 0; q < n_fn; ++q) values[k * n_fn + q] *= cells[k].w;
        return 0.0;
      },
      unused);
  std::vector<std::pair<double, double>> out(n_fn);
  std::vector<double> diag, off;
  for (std::size_t q = 0; q < n_fn; ++q) {
    diag.clear();
    off.clear();
    for (std::size_t k = 0; k < cells.size(); ++k) (cells[k].band ? diag : off).push_back(values[k * n_fn + q]);
    out[q] = {pairwise_sum(diag), pairwise_sum(off)};
  }
  return out;
}

MomentQuadrature make_report(const IsserlisCoefficients& coeffs, double eps, double horizon,
                             const QuadratureOptions& opts, const std::vector<LagCell>& cells,
                             const std::vector<std::pair<double, double>>& parts, std::size_t position_cells) {
  MomentQuadrature q;
  q.m = coeffs.m;
  q.eps = eps;
  q.horizon = horizon;
  q.resolution = opts.resolution;
  q.band_half_width = 2.0 * eps;
  for (const auto& c : cells) (c.band ? q.band_cells : q.off_band_cells)++;
  q.position_cells = position_cells;
  const double pre = 2.0 / (eps * eps);
  std::vector<double> terms;
  for (std::size_t j = 0; j < coeffs.c.size(); ++j) {
    MomentQuadrature::Component comp;
    comp.j = static_cast<int>(j);
    comp.c = coeffs.c[j];
    comp.diagonal = pre * parts[j].first;
    comp.off_diagonal = pre * parts[j].second;
    terms.push_back(comp.diagonal);
    terms.push_back(comp.off_diagonal);
    q.components.push_back(comp);
  }
  q.total = pairwise_sum(terms);
  return q;
}

MomentQuadrature homogeneous_moment(const UnivariateMetric& metric, int m, double eps, double horizon,
                                    const QuadratureOptions& opts) {
  const auto coeffs = isserlis_coefficients(m);
  const auto cells = lag_cells(horizon, eps, opts.resolution);
  const double v = metric.delta_sq(eps);
  const std::size_t nj = coeffs.c.size();
  const auto parts = integrate_over_lags(cells, nj, [&](double r, std::span<double> out) {
    const double theta = homogeneous_theta(metric, r, eps);
    for (std::size_t j = 0; j < nj; ++j) {
      out[j] = (horizon - r) * static_cast<double>(coeffs.c[j]) * std::pow(theta, m - 2 * static_cast<int>(j)) *
               std::pow(v, 2.0 * static_cast<double>(j));
    }
  });
  return make_report(coeffs, eps, horizon, opts, cells, parts, 0);
}

MomentQuadrature bivariate_moment(const BivariateMetric& metric, int m, double eps, double horizon,
                                  const QuadratureOptions& opts) {
  const auto coeffs = isserlis_coefficients(m);
  const auto cells = lag_cells(horizon, eps, opts.resolution);
  const double h = horizon / static_cast<double>(opts.resolution);
  const std::size_t nj = coeffs.c.size();
  const auto parts = integrate_over_lags(cells, nj, [&](double r, std::span<double> out) {
    const auto n_pos = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((horizon - r) / h - 1e-9)));
    const double ws = (horizon - r) / static_cast<double>(n_pos);
    std::vector<std::vector<double>> terms(nj, std::vector<double>(n_pos));
    for (std::size_t k = 0; k < n_pos; ++k) {
      const double s = (static_cast<double>(k) + 0.5) * ws;
      const double t = s + r;
      const double theta = planar_increment_theta(metric, s, t, eps);
      const double vv = metric.delta_sq(s, s + eps) * metric.delta_sq(t, t + eps);
      for (std::size_t j = 0; j < nj; ++j) {
        terms[j][k] = static_cast<double>(coeffs.c[j]) * std::pow(theta, m - 2 * static_cast<int>(j)) *
                      std::pow(vv, static_cast<double>(j));
      }
    }
    for (std::size_t j = 0; j < nj; ++j) out[j] = ws * pairwise_sum(terms[j]);
  });
  return make_report(coeffs, eps, horizon, opts, cells, parts, static_cast<std::size_t>(horizon / h));
}

}  // namespace

double MomentQuadrature::diagonal() const {
  double acc = 0.0;
  for (const auto& c : components) acc += c.diagonal;
  return acc;
}

double MomentQuadrature::off_diagonal() const {
  double acc = 0.0;
  for (const auto& c : components) acc += c.off_diagonal;
  return acc;
}

nlohmann::json MomentQuadrature::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components) {
    comps.push_back({{"j", c.j}, {"c_j", c.c}, {"diagonal", c.diagonal}, {"off_diagonal", c.off_diagonal}});
  }
  return {{"m", m},
          {"eps", eps},
          {"T", horizon},
          {"resolution", resolution},
          {"band_half_width", band_half_width},
          {"band_cells", band_cells},
          {"off_band_cells", off_band_cells},
          {"position_cells", position_cells},
          {"components", comps},
          {"diagonal", diagonal()},
          {"off_diagonal", off_diagonal()},
          {"total", total}};
}

MomentQuadrature variation_second_moment(const BivariateMetric& metric, int m, double eps, double horizon,
                                         const QuadratureOptions& opts) {
  if (const auto* hom = metric.homogeneous_part(); hom && !opts.force_bivariate) {
    return homogeneous_moment(*hom, m, eps, horizon, opts);
  }
  return bivariate_moment(metric, m, eps, horizon, opts);
}

MomentQuadrature variation_second_moment(const UnivariateMetric& metric, int m, double eps, double horizon,
                                         const QuadratureOptions& opts) {
  return homogeneous_moment(metric, m, eps, horizon, opts);
}

ChaosMoments fbm_chaos_moments(double hurst, double horizon, double eps, const QuadratureOptions& opts) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError(fmt::format("Hurst index {} outside (0,1)", hurst));
  const auto metric = power_metric(2.0 * hurst);
  const auto cells = lag_cells(horizon, eps, opts.resolution);
  const double v = metric.delta_sq(eps);
  const auto parts = integrate_over_lags(cells, 2, [&](double r, std::span<double> out) {
    const double theta = homogeneous_theta(metric, r, eps);
    out[0] = (horizon - r) * theta * v * v;
    out[1] = (horizon - r) * theta * theta * theta;
  });
  const double e2 = eps * eps;
  ChaosMoments cm;
  cm.i1_diagonal = 18.0 / e2 * parts[0].first;
  cm.i1_sq = cm.i1_diagonal + 18.0 / e2 * parts[0].second;
  cm.i3_diagonal = 12.0 / e2 * parts[1].first;
  cm.i3_sq = cm.i3_diagonal + 12.0 / e2 * parts[1].second;
  return cm;
}

ConditionVerdict chaos_identity_check(double sigma_sq, std::size_t n_samples, std::uint64_t seed) {
  if (!(sigma_sq > 0.0)) throw DomainError("chaos_identity_check: sigma^2 must be positive");
  if (n_samples < 2) throw DomainError("chaos_identity_check: need at least 2 samples");
  const double sigma = std::sqrt(sigma_sq);
  const auto stream = rng::derive_seed(seed, 0xC4A05);
  std::vector<double> z(n_samples), z3(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    z[i] = sigma * rng::normal(stream, 0, i);
    z3[i] = z[i] * z[i] * z[i];
  }
  const double n = static_cast<double>(n_samples);
  const double m1 = pairwise_sum(z) / n;
  const double m3 = pairwise_sum(z3) / n;
  std::vector<double> dv(n_samples), dc(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    dv[i] = (z3[i] - m3) * (z3[i] - m3);
    dc[i] = (z3[i] - m3) * (z[i] - m1);
  }
  const auto var = estimate_mean(dv);
  const auto cov = estimate_mean(dc);
  const double s6 = sigma_sq * sigma_sq * sigma_sq;
  const double var_expected = 15.0 * s6;
  const double cov_expected = 3.0 * sigma_sq * sigma_sq;
  const bool var_ok = std::abs(var.mean - var_expected) <= 4.0 * var.se;
  const bool cov_ok = std::abs(cov.mean - cov_expected) <= 4.0 * cov.se;
  ConditionVerdict v;
  v.id = "chaos_identity";
  v.status = var_ok && cov_ok ? Status::pass : Status::fail;
  v.detail = fmt::format("Var(Z^3) = {:.6g} +- {:.3g} (expected {:.6g}); Cov(Z^3,Z) = {:.6g} +- {:.3g} (expected {:.6g})",
                         var.mean, var.se, var_expected, cov.mean, cov.se, cov_expected);
  v.witness = {{"sigma_sq", sigma_sq},   {"n_samples", n_samples},    {"var_z3", var.mean},
               {"var_z3_se", var.se},    {"var_expected", var_expected}, {"cov_z3_z", cov.mean},
               {"cov_z3_z_se", cov.se},  {"cov_expected", cov_expected}};
  return v;
}

ConditionVerdict isserlis_mc_check(int m, double theta, std::size_t n_samples, std::uint64_t seed) {
  if (!(std::abs(theta) <= 1.0)) throw DomainError("isserlis_mc_check: |theta| must be <= 1");
  const auto coeffs = isserlis_coefficients(m);
  const auto stream = rng::derive_seed(seed, 0x15E7);
  const double rho = std::sqrt(1.0 - theta * theta);
  std::vector<double> prod(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto g = rng::normal_pair(stream, 0, i);
    const double y = g[0];
    const double z = theta * g[0] + rho * g[1];
    prod[i] = std::pow(y, m) * std::pow(z, m);
  }
  const auto est = estimate_mean(prod);
  const double expected = second_moment_integrand(coeffs, theta, 1.0, 1.0);
  ConditionVerdict v;
  v.id = "isserlis_mc";
  v.status = std::abs(est.mean - expected) <= 3.0 * est.se ? Status::pass : Status::fail;
  v.detail = fmt::format("E[Y^{0}Z^{0}] = {1:.6g} +- {2:.3g}, Isserlis sum {3:.6g}", m, est.mean, est.se, expected);
  v.witness = {{"m", m}, {"theta", theta}, {"n_samples", n_samples}, {"mc", est.mean}, {"se", est.se},
               {"expected", expected}};
  return v;
}

}  // namespace oddvar
