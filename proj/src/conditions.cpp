#include "oddvar/conditions.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "oddvar/errors.hpp"
#include "oddvar/kernels.hpp"
#include "oddvar/reduce.hpp"
#include "oddvar/rng.hpp"

namespace oddvar {

namespace {

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ReportError("slope fit: no spread in log eps");
  return sxy / sxx;
}

std::pair<double, double> range_of(const std::vector<double>& ladder) {
  if (ladder.empty()) return {0.0, 0.0};
  const auto [lo, hi] = std::minmax_element(ladder.begin(), ladder.end());
  return {*lo, *hi};
}

void require_ladder(const std::vector<double>& ladder, std::size_t min_size, const char* who) {
  if (ladder.size() < min_size) throw GridError(fmt::format("{} needs at least {} ladder entries", who, min_size));
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) throw GridError(fmt::format("{}: ladder entries must be positive", who));
    if (i > 0 && !(ladder[i] < ladder[i - 1])) throw GridError(fmt::format("{}: ladder must be strictly decreasing", who));
  }
}

}  // namespace

ConditionVerdict check_little_o(const UnivariateMetric& metric, double m, LittleOConvention convention) {
  if (!(m >= 1.0)) throw DomainError("check_little_o: m must be >= 1");
  ConditionVerdict v;
  v.id = convention == LittleOConvention::on_delta ? "little_o_delta" : "little_o_delta_sq";
  const double p = 1.0 / (2.0 * m);
  std::vector<double> rs, rho;
  for (int k = 2; k <= 20; ++k) {
    const double r = std::ldexp(1.0, -k);
    const double d2 = metric.delta_sq(r);
    if (!std::isfinite(d2)) throw ModelError(fmt::format("metric {} is not finite at r = {}", metric.name(), r));
    const double num = convention == LittleOConvention::on_delta ? std::sqrt(d2) : d2;
    rs.push_back(r);
    rho.push_back(num / std::pow(r, p));
  }
  v.eps_range = {rs.back(), rs.front()};
  v.witness["r"] = rs;
  v.witness["rho"] = rho;
  std::optional<std::size_t> rise;
  for (std::size_t i = 1; i < rho.size(); ++i) {
    if (rho[i] > rho[i - 1] * (1.0 + 1e-9)) {
      rise = i;
      break;
    }
  }
  const double total = rho.front() > 0.0 ? rho.back() / rho.front() : 0.0;
  v.witness["total_ratio"] = total;
  if (rise) {
    v.status = Status::fail;
    v.witness["counterexample"] = {{"r_prev", rs[*rise - 1]}, {"r", rs[*rise]}, {"rho_prev", rho[*rise - 1]},
                                   {"rho", rho[*rise]}};
    v.detail = fmt::format("rho increases from {:.6g} at r={} to {:.6g} at r={}", rho[*rise - 1], rs[*rise - 1],
                           rho[*rise], rs[*rise]);
  } else if (total > 0.9) {
    v.status = Status::fail;
    v.witness["counterexample"] = {{"r_first", rs.front()}, {"r_last", rs.back()}, {"ratio", total}};
    v.detail = fmt::format("rho only falls by a factor {:.4g} over r in [2^-20, 2^-2]", total);
  } else {
    v.status = Status::pass;
    v.detail = fmt::format("rho decreases monotonically, rho_20/rho_2 = {:.4g}", total);
  }
  return v;
}

ConditionVerdict check_concave_increasing(const UnivariateMetric& metric, std::optional<double> range) {
  const double r = range.value_or(metric.probe_range());
  const auto pts = sampling::dyadic_points(r);
  const std::function<double(double)> f = [&metric](double x) { return metric.delta_sq(x); };
  ConditionVerdict v;
  v.id = "concave_increasing";
  v.eps_range = {pts.front(), pts.back()};
  v.witness["range"] = r;
  v.witness["points"] = pts.size();
  if (auto bad = sampling::monotonicity_violation(f, pts)) {
    v.status = Status::fail;
    v.witness["counterexample"] = {{"kind", "monotonicity"}, {"r1", bad->r1}, {"r2", bad->r2}, {"lhs", bad->lhs},
                                   {"rhs", bad->rhs}};
    v.detail = fmt::format("delta^2({}) = {:.6g} > delta^2({}) = {:.6g}", bad->r1, bad->lhs, bad->r2, bad->rhs);
    return v;
  }
  if (auto bad = sampling::concavity_violation(f, pts)) {
    v.status = Status::fail;
    v.witness["counterexample"] = {{"kind", "concavity"}, {"r1", bad->r1}, {"r2", bad->r2}, {"lhs", bad->lhs},
                                   {"rhs", bad->rhs}};
    v.detail = fmt::format("midpoint concavity fails on ({}, {}): {:.6g} < {:.6g}", bad->r1, bad->r2, bad->lhs, bad->rhs);
    return v;
  }
  v.status = Status::pass;
  v.detail = fmt::format("increasing and midpoint concave on {} dyadic points of (0, {}]", pts.size(), r);
  return v;
}

namespace {

// |mu| of the lag strip [lo, hi) (both triangles), squares of side w = (hi-lo)/lags.
double strip_mass(const BivariateMetric& metric, double lo, double hi, const MeasureBoundOptions& opts) {
  const double w = (hi - lo) / static_cast<double>(opts.lags_per_shell);
  std::vector<double> per_lag(opts.lags_per_shell);
  kernels::map_indexed(
      kernels::Backend::omp,
      [&](std::size_t l) {
        const double r = lo + (static_cast<double>(l) + 0.5) * w;
        const double span = opts.horizon - r - w;
        if (span <= 0.0) return 0.0;
        const double cell = span / static_cast<double>(opts.position_cells);
        std::vector<double> terms(opts.position_cells);
        for (std::size_t k = 0; k < opts.position_cells; ++k) {
          const double s = (static_cast<double>(k) + 0.5) * cell;
          terms[k] = std::abs(planar_increment_theta(metric, s, s + r, w)) * (cell / w);
        }
        return 2.0 * pairwise_sum(terms);
      },
      per_lag);
  return pairwise_sum(per_lag);
}

}  // namespace

ConditionVerdict check_measure_bound(const BivariateMetric& metric, int m, const std::vector<double>& ladder,
                                     const MeasureBoundOptions& opts) {
  require_ladder(ladder, 4, "check_measure_bound");
  if (m < 1) throw DomainError("check_measure_bound: m must be >= 1");
  const double ratio = ladder[0] / ladder[1];
  for (std::size_t i = 1; i + 1 < ladder.size(); ++i) {
    if (std::abs(ladder[i] / ladder[i + 1] - ratio) > 1e-9 * ratio) {
      throw GridError("check_measure_bound: ladder must be geometric");
    }
  }
  if (ladder[0] >= opts.horizon) throw GridError("check_measure_bound: ladder must lie below the horizon");

  ConditionVerdict v;
  v.id = "measure_bound";
  v.eps_range = range_of(ladder);
  const double target = -1.0 + 1.0 / m;

  // Outer mass: |t-s| > eps_0, split in geometric strips of the same ratio.
  std::vector<double> outer_parts;
  for (double lo = ladder[0]; lo < opts.horizon; lo *= ratio) {
    outer_parts.push_back(strip_mass(metric, lo, std::min(lo * ratio, opts.horizon), opts));
  }
  const double outer = pairwise_sum(outer_parts);
  std::vector<double> shells, shell_eps, totals{outer};
  for (std::size_t k = 0; k + 1 < ladder.size(); ++k) {
    shells.push_back(strip_mass(metric, ladder[k + 1], ladder[k], opts));
    shell_eps.push_back(ladder[k + 1]);
    totals.push_back(totals.back() + shells.back());
  }
  v.witness["eps"] = ladder;
  v.witness["mu_OD"] = totals;
  v.witness["shell_mass"] = shells;
  v.witness["target_exponent"] = target;

  const double scale = std::max(metric.variance(opts.horizon), 1e-300);
  const double max_shell = *std::max_element(shells.begin(), shells.end());
  if (max_shell <= 1e-12 * scale) {
    v.status = Status::pass;
    v.detail = "no off-diagonal mass: |mu|(OD) vanishes on the whole ladder";
    v.witness["exponent"] = nullptr;
    return v;
  }
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < shells.size(); ++k) {
    if (!(shells[k] > 0.0)) {
      v.status = Status::indeterminate;
      v.detail = fmt::format("shell mass vanishes at eps = {} while others do not", shell_eps[k]);
      return v;
    }
    lx.push_back(std::log(shell_eps[k]));
    ly.push_back(std::log(shells[k]));
  }
  const double exponent = ls_slope(lx, ly);
  v.witness["exponent"] = exponent;
  if (lx.size() >= 4) {
    const std::size_t half = lx.size() / 2;
    const double e1 = ls_slope({lx.begin(), lx.begin() + static_cast<std::ptrdiff_t>(half)},
                               {ly.begin(), ly.begin() + static_cast<std::ptrdiff_t>(half)});
    const double e2 = ls_slope({lx.begin() + static_cast<std::ptrdiff_t>(half), lx.end()},
                               {ly.begin() + static_cast<std::ptrdiff_t>(half), ly.end()});
    v.witness["exponent_halves"] = {e1, e2};
    if ((e1 < 0.0) != (e2 < 0.0) && std::abs(e1 - e2) > 0.1) {
      v.status = Status::indeterminate;
      v.detail = fmt::format("fitted exponent changes sign across the ladder ({:.3f} vs {:.3f})", e1, e2);
      return v;
    }
  }
  if (exponent >= target - 0.05) {
    v.status = Status::pass;
    v.detail = fmt::format("|mu|(OD) grows like eps^{:.4f}, within eps^({:.4f})", exponent, target);
  } else {
    v.status = Status::fail;
    v.witness["counterexample"] = {{"eps", ladder.back()}, {"mu_OD", totals.back()}, {"exponent", exponent}};
    v.detail = fmt::format("|mu|(OD) grows like eps^{:.4f}, faster than eps^({:.4f})", exponent, target);
  }
  return v;
}

ConditionVerdict check_condition_M(const VolatilityModel& vol, int m, const std::vector<std::vector<double>>& tuples,
                                   std::size_t n_samples, std::uint64_t seed) {
  if (m < 1) throw DomainError("check_condition_M: m must be >= 1");
  if (n_samples < 2) throw DomainError("check_condition_M: need at least 2 samples");
  ConditionVerdict v;
  v.id = "condition_M";
  v.status = Status::pass;
  v.witness["tuples"] = nlohmann::json::array();
  bool indeterminate = false;
  for (std::size_t q = 0; q < tuples.size(); ++q) {
    auto times = tuples[q];
    if (times.size() != static_cast<std::size_t>(m)) {
      throw DomainError(fmt::format("check_condition_M: tuple {} has {} times, expected m = {}", q, times.size(), m));
    }
    std::sort(times.begin(), times.end());
    if (times.front() < 0.0) throw DomainError("check_condition_M: probe times must be >= 0");
    const auto stream = rng::derive_seed(seed, 0xC0DE0000ull + q);
    std::vector<double> prod(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
      double w = 0.0, prev = 0.0, acc = 1.0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        w += std::sqrt(times[k] - prev) * rng::normal(stream, i, k);
        prev = times[k];
        const double hv = vol(times[k], w);
        acc *= hv * hv;
      }
      prod[i] = acc;
    }
    const auto est = estimate_mean(prod);
    double rhs = 1.0;
    for (double s : times) {
      const double g = vol.gamma(s, m);
      rhs *= g * g;
    }
    const bool ok = est.mean <= rhs + 3.0 * est.se;
    const bool noisy = est.se > 0.25 * rhs;
    v.witness["tuples"].push_back(
        {{"times", times}, {"lhs", est.mean}, {"lhs_se", est.se}, {"rhs", rhs}, {"holds", ok}});
    if (!ok) {
      v.status = Status::fail;
      if (!v.witness.contains("counterexample")) {
        v.witness["counterexample"] = {{"times", times}, {"lhs", est.mean}, {"lhs_se", est.se}, {"rhs", rhs}};
      }
    }
    indeterminate = indeterminate || noisy;
  }
  if (v.status == Status::fail) {
    v.detail = "E[prod H^2] exceeds prod Gamma^2 by more than 3 SE";
  } else if (indeterminate) {
    v.status = Status::indeterminate;
    v.detail = "Monte Carlo standard error exceeds a quarter of the bound";
  } else {
    v.detail = fmt::format("E[prod H^2] <= prod Gamma^2 + 3 SE at {} tuples", tuples.size());
  }
  v.witness["n_samples"] = n_samples;
  return v;
}

std::vector<double> additional_integral(const VolterraKernel& kernel, const std::vector<double>& ladder,
                                        const AdditionalOptions& opts) {
  const std::size_t n = opts.resolution;
  const double h = opts.horizon / static_cast<double>(n);
  constexpr std::size_t kBlock = 32;
  std::vector<double> out;
  for (double eps : ladder) {
    const double kd = eps / h;
    const auto k = static_cast<std::size_t>(std::llround(kd));
    if (k < 1 || std::abs(kd - static_cast<double>(k)) > 1e-9 * kd) {
      throw GridError(fmt::format("check_additional: eps = {} is not a multiple of h = {}", eps, h));
    }
    if (2 * k > n) throw GridError(fmt::format("check_additional: eps = {} exceeds T/2", eps));
    // Row i holds D[i][l] = |G(t_i + eps, u_l) - G(t_i, u_l)|; rows are kept
    // in a ring long enough to add row i - 2k into the running s-sum.
    const std::size_t ring = 2 * k + kBlock;
    std::vector<double> d(ring * n);
    std::vector<double> acc(n, 0.0);
    std::vector<double> per_t(n + 1, 0.0);
    std::vector<double> unused(kBlock);
    for (std::size_t i0 = 0; i0 <= n; i0 += kBlock) {
      const std::size_t count = std::min(kBlock, n + 1 - i0);
      kernels::map_indexed(
          kernels::Backend::omp,
          [&](std::size_t b) {
            if (b >= count) return 0.0;
            const std::size_t i = i0 + b;
            const double t = static_cast<double>(i) * h;
            double* row = d.data() + (i % ring) * n;
            for (std::size_t l = 0; l < n; ++l) {
              const double u = (static_cast<double>(l) + 0.5) * h;
              const double diff = kernel(t + eps, u) - kernel(t, u);
              if (!std::isfinite(diff)) {
                throw KernelError(fmt::format("kernel {} is not finite near (t={}, u={})", kernel.name(), t, u));
              }
              row[l] = std::abs(diff);
            }
            return 0.0;
          },
          unused);
      for (std::size_t i = i0; i < i0 + count; ++i) {
        if (i < 2 * k) continue;
        const double* old = d.data() + ((i - 2 * k) % ring) * n;
        const double* row = d.data() + (i % ring) * n;
        double sum = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
          acc[l] += old[l];
          sum += row[l] * acc[l];
        }
        per_t[i] = sum;
      }
    }
    out.push_back(h * h * h * pairwise_sum(per_t));
  }
  return out;
}

ConditionVerdict check_additional(const VolterraKernel& kernel_tilde, const UnivariateMetric& metric,
                                  const std::vector<double>& ladder, const AdditionalOptions& opts) {
  require_ladder(ladder, 3, "check_additional");
  const auto values = additional_integral(kernel_tilde, ladder, opts);
  ConditionVerdict v;
  v.id = "additional";
  v.eps_range = range_of(ladder);
  std::vector<double> ratio;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    ratio.push_back(values[i] / (ladder[i] * metric.delta_sq(2.0 * ladder[i])));
  }
  v.witness["eps"] = ladder;
  v.witness["I"] = values;
  v.witness["ratio"] = ratio;
  const double max_i = *std::max_element(values.begin(), values.end());
  if (max_i <= 0.0) {
    v.status = Status::pass;
    v.detail = "I(eps) = 0 on the whole ladder";
    return v;
  }
  if (*std::min_element(values.begin(), values.end()) <= 0.0) {
    v.status = Status::indeterminate;
    v.detail = "I(eps) vanishes on part of the ladder only";
    return v;
  }
  std::vector<double> lx, lr, li;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    lx.push_back(std::log(ladder[i]));
    lr.push_back(std::log(ratio[i]));
    li.push_back(std::log(values[i]));
  }
  const auto [rmin, rmax] = std::minmax_element(ratio.begin(), ratio.end());
  const double spread = *rmax / *rmin;
  const double exponent = ls_slope(lx, li);
  // Upward trend: the ratio keeps rising with increments that do not shrink
  // as eps decreases (a bounded ratio converges, so its increments decay).
  std::vector<double> dx, dy;
  for (std::size_t i = 0; i + 1 < ratio.size(); ++i) {
    const double inc = ratio[i + 1] - ratio[i];
    if (inc > 1e-12 * *rmax) {
      dx.push_back(lx[i + 1]);
      dy.push_back(std::log(inc));
    }
  }
  const double trend = dx.size() >= 2 ? ls_slope(dx, dy) : INFINITY;
  v.witness["max_over_min"] = spread;
  v.witness["ratio_log_slope"] = ls_slope(lx, lr);
  v.witness["increment_exponent"] = std::isfinite(trend) ? nlohmann::json(trend) : nlohmann::json(nullptr);
  v.witness["I_exponent"] = exponent;
  const bool bounded = spread <= 10.0 && trend >= -0.1;
  const bool strong = !opts.min_exponent || exponent >= *opts.min_exponent;
  if (opts.min_exponent) v.witness["min_exponent"] = *opts.min_exponent;
  if (bounded && strong) {
    v.status = Status::pass;
    v.detail = fmt::format("I/(eps delta^2(2eps)) bounded: max/min {:.3g}; I ~ eps^{:.3f}", spread, exponent);
  } else {
    v.status = Status::fail;
    const auto worst = static_cast<std::size_t>(std::distance(ratio.begin(), rmax));
    v.witness["counterexample"] = {{"eps", ladder[worst]}, {"ratio", ratio[worst]}, {"I", values[worst]}};
    v.detail = bounded ? fmt::format("I ~ eps^{:.3f}, below the required exponent {:.3f}", exponent, *opts.min_exponent)
                       : fmt::format("I/(eps delta^2(2eps)) unbounded: max/min {:.3g}, increment exponent {:.3f}", spread, trend);
  }
  return v;
}

ConditionVerdict check_forito_conditions(const BivariateMetric& metric, const UnivariateMetric& univ,
                                         const ForItoOptions& opts) {
  ConditionVerdict v;
  v.id = "forito";
  std::vector<double> us;
  for (int k = 0; k <= opts.ladder_depth; ++k) us.push_back(opts.horizon * std::ldexp(1.0, -k));
  v.eps_range = {us.back(), us.front()};

  // (i) inf Q_u / delta^2(u).
  double inf_ratio = INFINITY;
  double arg_u = 0.0;
  for (double u : us) {
    const double r = metric.variance(u) / univ.delta_sq(u);
    if (r < inf_ratio) {
      inf_ratio = r;
      arg_u = u;
    }
  }
  const bool ok1 = inf_ratio > 1e-3;
  v.witness["i"] = {{"inf_ratio", inf_ratio}, {"at_u", arg_u}, {"holds", ok1}};

  // (ii) search c on {0.1, ..., 3.9} over seeded pairs u < v - gap.
  const auto stream = rng::derive_seed(opts.seed, 0xF0217);
  struct Pair {
    double qu, qv, quv, u, v;
  };
  std::vector<Pair> pairs;
  pairs.reserve(opts.n_pairs);
  for (std::size_t i = 0; pairs.size() < opts.n_pairs && i < 100 * opts.n_pairs + 100; ++i) {
    const auto g = rng::philox4x32({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32), 0, 0},
                                   {static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)});
    double a = opts.horizon * rng::to_open_unit(g[0], g[1]);
    double b = opts.horizon * rng::to_open_unit(g[2], g[3]);
    if (a > b) std::swap(a, b);
    if (!(a < b - opts.gap)) continue;
    pairs.push_back({metric.variance(a), metric.variance(b), metric.covariance(a, b), a, b});
  }
  std::optional<double> found_c;
  nlohmann::json worst_ii;
  for (int ci = 1; ci <= 39 && !found_c; ++ci) {
    const double c = 0.1 * ci;
    bool all = true;
    for (const auto& p : pairs) {
      const double lhs = (2.0 + c) * p.qu * p.quv + (1.0 - c) * p.qu * p.qv + (2.0 - c) * p.qu * p.qu;
      const double rhs = p.quv * p.quv;
      if (lhs < rhs) {
        all = false;
        if (ci == 1) worst_ii = {{"u", p.u}, {"v", p.v}, {"lhs", lhs}, {"rhs", rhs}, {"c", c}};
        break;
      }
    }
    if (all) found_c = c;
  }
  const bool ok2 = found_c.has_value();
  v.witness["ii"] = {{"c", found_c ? nlohmann::json(*found_c) : nlohmann::json(nullptr)},
                     {"pairs", pairs.size()},
                     {"holds", ok2}};
  if (!ok2) v.witness["ii"]["counterexample"] = worst_ii;

  // (iii) search (a, b) for (delta(au) - delta(u)) / ((a-1)u) < b delta(u)/u.
  std::optional<std::pair<double, double>> found_ab;
  nlohmann::json worst_iii;
  for (double a : {1.25, 1.5, 2.0, 4.0}) {
    for (double b : {0.30, 0.40, 0.45, 0.49}) {
      bool all = true;
      for (double u : us) {
        const double lhs = (univ.delta(a * u) - univ.delta(u)) / ((a - 1.0) * u);
        const double rhs = b * univ.delta(u) / u;
        if (!(lhs < rhs)) {
          all = false;
          if (worst_iii.is_null()) worst_iii = {{"a", a}, {"b", b}, {"u", u}, {"lhs", lhs}, {"rhs", rhs}};
          break;
        }
      }
      if (all && !found_ab) found_ab = {a, b};
    }
  }
  const bool ok3 = found_ab.has_value();
  v.witness["iii"] = {{"holds", ok3}};
  if (ok3) {
    v.witness["iii"]["a"] = found_ab->first;
    v.witness["iii"]["b"] = found_ab->second;
  } else {
    v.witness["iii"]["counterexample"] = worst_iii;
  }

  v.status = ok1 && ok2 && ok3 ? Status::pass : Status::fail;
  if (!ok1) v.witness["counterexample"] = v.witness["i"];
  else if (!ok2) v.witness["counterexample"] = v.witness["ii"]["counterexample"];
  else if (!ok3) v.witness["counterexample"] = v.witness["iii"]["counterexample"];
  v.detail = fmt::format("(i) {} inf Q_u/delta^2 = {:.4g}; (ii) {}; (iii) {}", ok1 ? "holds," : "fails,", inf_ratio,
                         ok2 ? fmt::format("holds with c = {:.1f}", *found_c) : "no c in the grid works",
                         ok3 ? fmt::format("holds with a = {}, b = {}", found_ab->first, found_ab->second)
                             : "no (a, b) in the grid works");
  return v;
}

ConditionVerdict check_deltauuk(const UnivariateMetric& metric, int k, const std::vector<double>& ladder) {
  if (k < 2) throw DomainError("check_deltauuk: k must be >= 2");
  require_ladder(ladder, 3, "check_deltauuk");
  if (ladder.front() >= 1.0) throw GridError("check_deltauuk: ladder must lie in (0, 1)");
  ConditionVerdict v;
  v.id = fmt::format("deltauuk_k{}", k);
  v.eps_range = range_of(ladder);
  std::vector<double> rs;
  for (double eps : ladder) {
    // u = e^x: int_{log eps}^0 (delta(e^x)/e^x)^k e^x dx.
    auto f = [&](double x) {
      const double u = std::exp(x);
      return std::pow(metric.delta(u) / u, k) * u;
    };
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::log(eps), 0.0, 15, 1e-12);
    rs.push_back(integral / (eps * std::pow(metric.delta(eps) / eps, k)));
  }
  v.witness["eps"] = ladder;
  v.witness["R"] = rs;
  const auto [lo, hi] = std::minmax_element(rs.begin(), rs.end());
  const double spread = *hi / *lo;
  v.witness["max_over_min"] = spread;
  if (spread <= 10.0) {
    v.status = Status::pass;
    v.detail = fmt::format("R(eps) in [{:.4g}, {:.4g}]", *lo, *hi);
  } else {
    v.status = Status::fail;
    const auto i = static_cast<std::size_t>(std::distance(rs.begin(), hi));
    v.witness["counterexample"] = {{"eps", ladder[i]}, {"R", rs[i]}};
    v.detail = fmt::format("R(eps) unbounded: max/min = {:.4g}", spread);
  }
  return v;
}

ConditionVerdict check_prop_ex_bounds(const PropExDecomposition& dec, int m, double horizon) {
  if (!dec.g || !dec.dg_dt || !dec.dg_ds || !dec.dg_dsdt) {
    throw PreconditionError("check_prop_ex_bounds needs g and its first and mixed derivatives");
  }
  const double alpha = 1.0 / (2.0 * m) - 0.5;
  ConditionVerdict v;
  v.id = "prop_ex";
  constexpr int kBands = 20;
  constexpr int kPerBand = 16;
  constexpr int kPositions = 4;
  std::vector<double> first(kBands, 0.0), mixed(kBands, 0.0);
  nlohmann::json argmax_first, argmax_mixed;
  double best_first = -1.0, best_mixed = -1.0;
  std::optional<nlohmann::json> g_violation, f_violation;
  for (int k = 0; k < kBands; ++k) {
    const double hi = horizon * std::ldexp(1.0, -(k + 1));
    for (int i = 0; i < kPerBand; ++i) {
      const double d = hi * (0.5 + 0.5 * (i + 0.5) / kPerBand);
      for (int p = 0; p < kPositions; ++p) {
        const double s = (horizon - d) * (p + 0.5) / kPositions;
        const double t = s + d;
        const double r1 = (std::abs(dec.dg_dt(t, s)) + std::abs(dec.dg_ds(t, s))) / std::pow(d, alpha - 1.0);
        const double r2 = std::abs(dec.dg_dsdt(t, s)) / std::pow(d, alpha - 2.0);
        first[k] = std::max(first[k], r1);
        mixed[k] = std::max(mixed[k], r2);
        if (r1 > best_first) {
          best_first = r1;
          argmax_first = {{"t", t}, {"s", s}, {"ratio", r1}};
        }
        if (r2 > best_mixed) {
          best_mixed = r2;
          argmax_mixed = {{"t", t}, {"s", s}, {"ratio", r2}};
        }
        // g decreasing and f increasing in t, compared with t + d/2.
        const double t2 = std::min(horizon, t + 0.5 * d);
        if (t2 > t) {
          if (!g_violation && dec.g(t2, s) > dec.g(t, s) * (1.0 + 1e-12) + 1e-300) {
            g_violation = {{"s", s}, {"t1", t}, {"t2", t2}, {"g1", dec.g(t, s)}, {"g2", dec.g(t2, s)}};
          }
          if (dec.f && !f_violation && dec.f(t2, s) < dec.f(t, s) * (1.0 - 1e-12)) {
            f_violation = {{"s", s}, {"t1", t}, {"t2", t2}, {"f1", dec.f(t, s)}, {"f2", dec.f(t2, s)}};
          }
        }
      }
    }
  }
  auto growth = [](const std::vector<double>& x) {
    const double far = *std::max_element(x.begin(), x.begin() + 5);
    const double near = *std::max_element(x.end() - 5, x.end());
    return far > 0.0 ? near / far : (near > 0.0 ? INFINITY : 1.0);
  };
  const double g1 = growth(first);
  const double g2 = growth(mixed);
  v.witness["c_first"] = best_first;
  v.witness["c_mixed"] = best_mixed;
  v.witness["growth_first"] = g1;
  v.witness["growth_mixed"] = g2;
  v.witness["band_sup_first"] = first;
  v.witness["band_sup_mixed"] = mixed;
  v.eps_range = {horizon * std::ldexp(1.0, -(kBands + 1)), horizon * 0.5};

  std::vector<std::string> failures;
  if (g1 > 10.0) {
    failures.push_back("first-derivative bound");
    v.witness["counterexample"] = argmax_first;
  }
  if (g2 > 10.0) {
    failures.push_back("mixed-derivative bound");
    if (!v.witness.contains("counterexample")) v.witness["counterexample"] = argmax_mixed;
  }
  if (g_violation) {
    failures.push_back("g decreasing in t");
    if (!v.witness.contains("counterexample")) v.witness["counterexample"] = *g_violation;
  }
  if (f_violation) {
    failures.push_back("f increasing in t");
    if (!v.witness.contains("counterexample")) v.witness["counterexample"] = *f_violation;
  }
  if (dec.f_bound) {
    const auto pts = sampling::dyadic_points(horizon);
    const std::function<double(double)> fr = dec.f_bound;
    auto record = [&](const char* what, const sampling::Violation& bad) {
      failures.push_back(what);
      if (!v.witness.contains("counterexample")) {
        v.witness["counterexample"] = {{"r1", bad.r1}, {"r2", bad.r2}, {"lhs", bad.lhs}, {"rhs", bad.rhs}};
      }
    };
    if (auto bad = sampling::monotonicity_violation(fr, pts)) record("f(r) increasing", *bad);
    if (auto bad = sampling::concavity_violation(fr, pts)) record("f(r) concave", *bad);
    const double f0 = fr(0.0);
    if (!(std::abs(f0) <= 1e-12)) {
      failures.push_back("f(0) = 0");
      if (!v.witness.contains("counterexample")) v.witness["counterexample"] = {{"r", 0.0}, {"f", f0}};
    }
  }
  if (failures.empty()) {
    v.status = Status::pass;
    v.detail = fmt::format("bounds hold with c = {:.4g} (first), {:.4g} (mixed)", best_first, best_mixed);
  } else {
    v.status = Status::fail;
    std::string joined;
    for (const auto& f : failures) joined += (joined.empty() ? "" : ", ") + f;
    v.detail = "violated: " + joined;
  }
  return v;
}

}  // namespace oddvar
