#include "oddvar/variation.hpp"

#include <fmt/format.h>

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "oddvar/errors.hpp"
#include "oddvar/metrics.hpp"
#include "oddvar/reduce.hpp"

namespace oddvar {

namespace {

struct Layout {
  std::size_t lag;
  std::size_t count;
  double scale;  // h / eps
};

Layout layout(const PathEnsemble& ens, double eps, std::size_t count) {
  const auto& grid = ens.grid();
  const std::size_t lag = grid.steps_for(eps);
  return {lag, count, grid.step() / eps};
}

std::vector<double> scaled_sums(const PathEnsemble& ens, const Layout& l, const kernels::IncrementFn& f,
                                kernels::Backend backend) {
  std::vector<double> out(ens.n_paths());
  kernels::increment_sums(backend, ens.values(), ens.n_paths(), ens.points(), l.lag, l.count, f, out);
  for (double& v : out) v *= l.scale;
  return out;
}

void require_fn(const RealFn& fn, const char* what) {
  if (!fn) throw ValidationError(fmt::format("functional needs {}", what));
}

}  // namespace

std::vector<double> odd_variation(const PathEnsemble& ens, double m, double eps, kernels::Backend backend) {
  if (!(m >= 1.0)) throw DomainError(fmt::format("odd variation needs m >= 1, got {}", m));
  return scaled_sums(ens, layout(ens, eps, ens.grid().steps()),
                     [m](double x0, double x1) { return signed_power(x1 - x0, m); }, backend);
}

std::vector<double> weighted_variation(const PathEnsemble& ens, double m, const RealFn& g, double eps,
                                       kernels::Backend backend) {
  if (!(m >= 1.0)) throw DomainError(fmt::format("weighted variation needs m >= 1, got {}", m));
  require_fn(g, "a weight g");
  return scaled_sums(ens, layout(ens, eps, ens.grid().steps()),
                     [m, &g](double x0, double x1) { return signed_power(x1 - x0, m) * g(0.5 * (x0 + x1)); },
                     backend);
}

std::vector<double> covariation(const PathEnsemble& x, const PathEnsemble& y, double eps, kernels::Backend backend) {
  if (!(x.grid() == y.grid())) throw GridError("covariation: ensembles live on different grids");
  if (x.n_paths() != y.n_paths()) throw GridError("covariation: ensembles have different path counts");
  const Layout l = layout(x, eps, x.grid().steps());
  std::vector<double> out(x.n_paths());
  kernels::map_indexed(
      backend,
      [&](std::size_t p) {
        const auto a = x.path(p);
        const auto b = y.path(p);
        double sum = 0.0;
        double comp = 0.0;
        for (std::size_t i = 0; i < l.count; ++i) {
          const double v = (a[i + l.lag] - a[i]) * (b[i + l.lag] - b[i]);
          const double t = sum + v;
          comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
          sum = t;
        }
        return (sum + comp) * l.scale;
      },
      out);
  return out;
}

std::vector<double> symmetric_integral(const PathEnsemble& ens, const RealFn& fprime, double t, double eps,
                                       kernels::Backend backend) {
  require_fn(fprime, "f'");
  const std::size_t upto = ens.grid().index_of(t);
  return scaled_sums(ens, layout(ens, eps, upto),
                     [&fprime](double x0, double x1) { return (x1 - x0) * fprime(0.5 * (x0 + x1)); }, backend);
}

std::vector<double> ito_residual(const PathEnsemble& ens, const RealFn& f, const RealFn& fprime, double t, double eps,
                                 kernels::Backend backend) {
  require_fn(f, "f");
  auto out = symmetric_integral(ens, fprime, t, eps, backend);
  const std::size_t it = ens.grid().index_of(t);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = (f(ens.value(p, it)) - f(ens.value(p, 0))) - out[p];
  return out;
}

Functional Functional::odd(double m) {
  Functional fn;
  fn.kind = Kind::odd_variation;
  fn.m = m;
  return fn;
}

std::string to_string(Functional::Kind kind) {
  switch (kind) {
    case Functional::Kind::odd_variation: return "odd_variation";
    case Functional::Kind::weighted_variation: return "weighted_variation";
    case Functional::Kind::quadratic_covariation: return "covariation";
    case Functional::Kind::symmetric_integral: return "symmetric_integral";
    case Functional::Kind::ito_residual: return "ito_residual";
  }
  return "unknown";
}

Functional::Kind functional_kind(const std::string& name) {
  for (auto k : {Functional::Kind::odd_variation, Functional::Kind::weighted_variation,
                 Functional::Kind::quadratic_covariation, Functional::Kind::symmetric_integral,
                 Functional::Kind::ito_residual}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("functional.kind: unknown functional '" + name + "'");
}

std::vector<double> evaluate(const PathEnsemble& ens, const Functional& fn, double eps, kernels::Backend backend) {
  switch (fn.kind) {
    case Functional::Kind::odd_variation: return odd_variation(ens, fn.m, eps, backend);
    case Functional::Kind::weighted_variation: return weighted_variation(ens, fn.m, fn.g, eps, backend);
    case Functional::Kind::quadratic_covariation: return covariation(ens, ens, eps, backend);
    case Functional::Kind::symmetric_integral: return symmetric_integral(ens, fn.fprime, fn.t, eps, backend);
    case Functional::Kind::ito_residual: return ito_residual(ens, fn.f, fn.fprime, fn.t, eps, backend);
  }
  throw ValidationError("unknown functional");
}

std::optional<SlopeFit> fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                                  const std::vector<double>& se) {
  if (x.size() != y.size() || x.size() != se.size()) throw ReportError("fit_slope: size mismatch");
  std::vector<double> lx, ly, w;
  bool all_positive_se = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    if (se[i] > 0.3 * y[i]) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
    w.push_back(se[i] > 0.0 ? (y[i] / se[i]) * (y[i] / se[i]) : 0.0);
    all_positive_se = all_positive_se && se[i] > 0.0;
  }
  if (lx.size() < 3) return std::nullopt;
  if (!all_positive_se) std::fill(w.begin(), w.end(), 1.0);
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sw += w[i];
    sx += w[i] * lx[i];
    sy += w[i] * ly[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += w[i] * (lx[i] - mx) * (lx[i] - mx);
    sxy += w[i] * (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 1e-300 * sw)) throw ReportError("fit_slope: no spread in log eps");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points_used = lx.size();
  fit.weighted = all_positive_se;
  if (all_positive_se) {
    fit.half_width = 1.96 / std::sqrt(sxx);
  } else {
    double rss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - fit.intercept - fit.slope * lx[i];
      rss += r * r;
    }
    fit.half_width = 1.96 * std::sqrt(rss / static_cast<double>(lx.size() - 2) / sxx);
  }
  return fit;
}

LadderReport summarize(const PathEnsemble& ens, const Functional& fn, kernels::Backend backend) {
  LadderReport report;
  report.model = ens.model();
  report.functional = to_string(fn.kind) + fmt::format("(m={})", fn.m) + (fn.label.empty() ? "" : ":" + fn.label);
  report.seed = ens.seed();
  report.n_paths = ens.n_paths();
  std::vector<double> xs, ys, ses;
  for (double eps : ens.grid().ladder()) {
    LadderRecord rec;
    rec.eps = eps;
    rec.estimates = evaluate(ens, fn, eps, backend);
    const auto mean = estimate_mean(rec.estimates);
    std::vector<double> sq(rec.estimates.size());
    for (std::size_t p = 0; p < sq.size(); ++p) sq[p] = rec.estimates[p] * rec.estimates[p];
    const auto msq = estimate_mean(sq);
    rec.mean = mean.mean;
    rec.mean_se = mean.se;
    rec.mean_square = msq.mean;
    rec.mean_square_se = msq.se;
    xs.push_back(eps);
    ys.push_back(msq.mean);
    ses.push_back(msq.se);
    report.records.push_back(std::move(rec));
  }
  if (xs.size() >= 3 && ens.n_paths() > 1) report.fit = fit_slope(xs, ys, ses);
  return report;
}

LadderReport ladder_sweep(const ProcessModel& model, const Functional& fn, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed, kernels::Backend backend) {
  if (grid.ladder().size() < 3) throw GridError("ladder_sweep needs at least 3 ladder entries");
  const auto ens = simulate(model, grid, n_paths, seed, backend);
  return summarize(ens, fn, backend);
}

bool LadderReport::mean_square_decreasing() const {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!(records[i].mean_square < records[i - 1].mean_square)) return false;
  }
  return !records.empty();
}

nlohmann::json LadderReport::to_json(bool include_estimates) const {
  nlohmann::json j;
  j["model"] = model;
  j["functional"] = functional;
  j["seed"] = seed;
  j["n_paths"] = n_paths;
  if (fit) {
    j["slope"] = {{"value", fit->slope},
                  {"intercept", fit->intercept},
                  {"half_width_95", fit->half_width},
                  {"points_used", fit->points_used},
                  {"weighted", fit->weighted}};
  } else {
    j["slope"] = nullptr;
  }
  j["verdicts"] = nlohmann::json::array();
  for (const auto& a : annotations) j["verdicts"].push_back({{"name", a.name}, {"status", a.status}, {"detail", a.detail}});
  j["records"] = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json rj = {{"eps", r.eps},
                         {"mean", r.mean},
                         {"mean_se", r.mean_se},
                         {"mean_square", r.mean_square},
                         {"mean_square_se", r.mean_square_se}};
    if (include_estimates) rj["estimates"] = r.estimates;
    j["records"].push_back(std::move(rj));
  }
  return j;
}

std::string LadderReport::to_csv() const {
  std::ostringstream os;
  os << "eps,mean,mean_se,mean_square,mean_square_se,log_eps,log_msq,se\n";
  for (const auto& r : records) {
    const double log_msq = r.mean_square > 0.0 ? std::log(r.mean_square) : -INFINITY;
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.eps, r.mean, r.mean_se,
                      r.mean_square, r.mean_square_se, std::log(r.eps), log_msq, r.mean_square_se);
  }
  return os.str();
}

}  // namespace oddvar
