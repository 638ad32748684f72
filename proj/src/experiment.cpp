#include "oddvar/experiment.hpp"

#include <fmt/format.h>
#include <omp.h>

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "oddvar/conditions.hpp"
#include "oddvar/errors.hpp"
#include "oddvar/kernels.hpp"
#include "oddvar/simulate.hpp"

#ifndef ODDVAR_VERSION
#define ODDVAR_VERSION "0.0.0"
#endif

namespace oddvar {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- field access with field-named errors

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double num(const json& obj, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ValidationError(fmt::format("{}.{}: required", where, key));
  }
  if (!v->is_number()) throw ValidationError(fmt::format("{}.{}: must be a number", where, key));
  const double x = v->get<double>();
  if (!std::isfinite(x)) throw ValidationError(fmt::format("{}.{}: must be finite", where, key));
  return x;
}

std::uint64_t count(const json& obj, const char* key, const std::string& where,
                    std::optional<std::uint64_t> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ValidationError(fmt::format("{}.{}: required", where, key));
  }
  if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
    throw ValidationError(fmt::format("{}.{}: must be a non-negative integer", where, key));
  }
  return v->get<std::uint64_t>();
}

std::string str(const json& obj, const char* key, const std::string& where, std::optional<std::string> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ValidationError(fmt::format("{}.{}: required", where, key));
  }
  if (!v->is_string()) throw ValidationError(fmt::format("{}.{}: must be a string", where, key));
  return v->get<std::string>();
}

bool flag(const json& obj, const char* key, const std::string& where, bool fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ValidationError(fmt::format("{}.{}: must be true or false", where, key));
  return v->get<bool>();
}

const json& object(const json& obj, const char* key, const std::string& where) {
  static const json empty = json::object();
  const json* v = find(obj, key);
  if (!v) return empty;
  if (!v->is_object()) throw ValidationError(fmt::format("{}.{}: must be an object", where, key));
  return *v;
}

void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
      throw ValidationError(fmt::format("{}: unknown key '{}'", where, it.key()));
    }
  }
}

std::vector<double> eps_ladder(const json& obj, const std::string& where, std::vector<int> fallback) {
  if (const json* l = find(obj, "ladder")) {
    if (!l->is_array() || l->empty()) throw ValidationError(where + ".ladder: must be a non-empty array");
    std::vector<double> out;
    for (const auto& e : *l) {
      if (!e.is_number() || !(e.get<double>() > 0.0)) throw ValidationError(where + ".ladder: entries must be positive");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<int> ks = fallback;
  if (const json* l = find(obj, "ladder_log2")) {
    if (!l->is_array() || l->empty()) throw ValidationError(where + ".ladder_log2: must be a non-empty array");
    ks.clear();
    for (const auto& e : *l) {
      if (!e.is_number_integer()) throw ValidationError(where + ".ladder_log2: entries must be integers");
      ks.push_back(e.get<int>());
    }
  }
  if (ks.empty()) throw ValidationError(where + ": ladder or ladder_log2 required");
  std::vector<double> out;
  for (int k : ks) out.push_back(std::ldexp(1.0, -k));
  return out;
}

bool odd_integer(double m) { return m >= 1.0 && m == std::floor(m) && static_cast<long>(m) % 2 == 1; }

int require_odd(double m, const std::string& where) {
  if (!odd_integer(m)) throw ValidationError(fmt::format("{}: m = {} must be an odd integer", where, m));
  return static_cast<int>(m);
}

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

void write_text(const fs::path& file, const std::string& text, std::vector<fs::path>& files) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ReportError("cannot write " + file.string());
  out << text;
  if (!out) throw ReportError("write failed for " + file.string());
  files.push_back(file);
}

void write_json(const fs::path& file, const json& j, std::vector<fs::path>& files) {
  write_text(file, j.dump(2) + "\n", files);
}

Annotation annotate(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok ? "pass" : "fail", std::move(detail)};
}

bool quadrature_possible(const ModelSpec& spec, const json& functional, std::string* why) {
  if (!spec.metric) {
    if (why) *why = "model " + spec.name + " has no Gaussian metric";
    return false;
  }
  if (functional.value("kind", "odd_variation") != "odd_variation") {
    if (why) *why = "quadrature covers the odd variation only";
    return false;
  }
  if (!odd_integer(functional.value("m", 3.0))) {
    if (why) *why = "quadrature needs an odd integer m";
    return false;
  }
  return true;
}

// ---- conditions

PropExDecomposition rl_decomposition(double hurst, int m, std::function<double(double)> gamma) {
  const double beta = hurst - 0.5;
  const double alpha = 1.0 / (2.0 * m) - 0.5;
  const double gamma_sup = gamma(0.0);
  auto dgamma = [gamma](double s) {
    const double h = 1e-6;
    const double lo = std::max(0.0, s - h);
    return (gamma(s + h) - gamma(lo)) / (s + h - lo);
  };
  PropExDecomposition d;
  d.g = [=](double t, double s) { return gamma(s) * std::pow(t - s, beta); };
  d.dg_dt = [=](double t, double s) { return gamma(s) * beta * std::pow(t - s, beta - 1.0); };
  d.dg_ds = [=](double t, double s) {
    return dgamma(s) * std::pow(t - s, beta) - gamma(s) * beta * std::pow(t - s, beta - 1.0);
  };
  d.dg_dsdt = [=](double t, double s) {
    return dgamma(s) * beta * std::pow(t - s, beta - 1.0) - gamma(s) * beta * (beta - 1.0) * std::pow(t - s, beta - 2.0);
  };
  d.f = [=](double t, double s) { return gamma(s) * std::pow(t - s, beta - alpha); };
  d.f_bound = [=](double r) { return gamma_sup * std::pow(r, beta - alpha); };
  return d;
}

bool rl_family(const ModelSpec& spec) {
  return spec.name == "rl_fbm" || spec.name == "martingale_cos" || spec.name == "martingale_const";
}

std::function<double(double)> gamma_of(const ModelSpec& spec, int m) {
  if (!spec.volatility) return [](double) { return 1.0; };
  auto vol = *spec.volatility;
  return [vol, m](double s) { return vol.gamma(s, m); };
}

// ---- audit

json run_audit(const json& audit, std::uint64_t seed, std::vector<Annotation>& notes, std::vector<ConditionVerdict>& out) {
  json result = json::object();
  const std::string where = "audit";
  only_keys(audit, {"isserlis", "chaos_identity"}, where);
  if (const json* iss = find(audit, "isserlis")) {
    const std::string w = where + ".isserlis";
    only_keys(*iss, {"m", "theta", "n_samples", "mc_m"}, w);
    std::vector<int> ms = {1, 3, 5, 7};
    if (const json* l = find(*iss, "m")) {
      if (!l->is_array()) throw ValidationError(w + ".m: must be an array of odd integers");
      ms.clear();
      for (const auto& e : *l) ms.push_back(require_odd(e.is_number() ? e.get<double>() : 0.0, w + ".m"));
    }
    json rows = json::array();
    for (int m : ms) {
      const auto c = isserlis_coefficients(m);
      std::uint64_t sum = 0;
      for (auto x : c.c) sum += x;
      std::uint64_t dfact = 1;
      for (int k = 2 * m - 1; k > 1; k -= 2) dfact *= static_cast<std::uint64_t>(k);
      rows.push_back({{"m", m}, {"c", c.c}, {"sum", sum}, {"double_factorial", dfact}, {"sum_matches", sum == dfact}});
      notes.push_back(annotate(fmt::format("isserlis_sum_m{}", m), sum == dfact,
                               fmt::format("sum c_j = {}, (2m-1)!! = {}", sum, dfact)));
      if (m == 3) {
        const bool ok = c.c.size() == 2 && c.c[0] == 6 && c.c[1] == 9;
        notes.push_back(annotate("isserlis_m3", ok, fmt::format("c = {}", json(c.c).dump())));
      }
    }
    result["coefficients"] = rows;
    const int mc_m = require_odd(num(*iss, "mc_m", w, 3.0), w + ".mc_m");
    const double theta = num(*iss, "theta", w, 0.5);
    const auto n = count(*iss, "n_samples", w, 200000);
    auto v = isserlis_mc_check(mc_m, theta, n, seed);
    notes.push_back({"isserlis_mc", to_string(v.status), v.detail});
    result["mc"] = v.to_json();
    out.push_back(std::move(v));
  }
  if (const json* ci = find(audit, "chaos_identity")) {
    const std::string w = where + ".chaos_identity";
    only_keys(*ci, {"sigma_sq", "n_samples"}, w);
    auto v = chaos_identity_check(num(*ci, "sigma_sq", w, 1.0), count(*ci, "n_samples", w, 200000), seed + 1);
    notes.push_back({"chaos_identity", to_string(v.status), v.detail});
    result["chaos_identity"] = v.to_json();
    out.push_back(std::move(v));
  }
  return result;
}

// ---- quadrature

struct TheoryOut {
  std::vector<MomentQuadrature> points;
  std::vector<ChaosMoments> chaos;
  std::optional<SlopeFit> fit;
  double max_over_min = 0.0;
};

TheoryOut run_theory(const ModelSpec& spec, const ExperimentConfig& c) {
  TheoryOut out;
  const int m = static_cast<int>(c.functional.value("m", 3.0));
  const double horizon = c.quadrature_horizon.value_or(c.horizon);
  QuadratureOptions q;
  q.resolution = c.quadrature_resolution;
  std::vector<double> ys, zeros;
  for (double eps : c.ladder) {
    const auto* homog = spec.metric->homogeneous_part();
    out.points.push_back(homog ? variation_second_moment(*homog, m, eps, horizon, q)
                               : variation_second_moment(*spec.metric, m, eps, horizon, q));
    ys.push_back(out.points.back().total);
    zeros.push_back(0.0);
    if (c.chaos) out.chaos.push_back(fbm_chaos_moments(spec.hurst, horizon, eps, q));
  }
  const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
  out.max_over_min = *hi / *lo;
  if (c.ladder.size() >= 3) out.fit = fit_slope(c.ladder, ys, zeros);
  return out;
}

json fit_json(const std::optional<SlopeFit>& fit) {
  if (!fit) return nullptr;
  return {{"value", fit->slope},
          {"intercept", fit->intercept},
          {"half_width_95", fit->half_width},
          {"points_used", fit->points_used},
          {"weighted", fit->weighted}};
}

std::string theory_csv(const TheoryOut& t) {
  std::ostringstream os;
  os << "eps,total,diagonal,off_diagonal,log_eps,log_msq,se\n";
  for (const auto& p : t.points) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.eps, p.total, p.diagonal(),
                      p.off_diagonal(), std::log(p.eps), std::log(p.total), 0.0);
  }
  return os.str();
}

// ---- expectations

void check_expectations(const ExperimentConfig& c, const std::optional<LadderReport>& ladder, const TheoryOut* theory,
                        const std::vector<ConditionVerdict>& verdicts, const std::optional<PathEnsemble>& ens,
                        std::vector<Annotation>& notes) {
  const json& e = c.expect;
  auto source_of = [&](const json& obj) {
    return obj.value("source", ladder ? std::string("monte_carlo") : std::string("quadrature"));
  };
  auto values_for = [&](const std::string& source) -> std::optional<std::vector<double>> {
    std::vector<double> ys;
    if (source == "monte_carlo") {
      if (!ladder) return std::nullopt;
      for (const auto& r : ladder->records) ys.push_back(r.mean_square);
    } else {
      if (!theory) return std::nullopt;
      for (const auto& p : theory->points) ys.push_back(p.total);
    }
    return ys;
  };

  if (const json* s = find(e, "slope")) {
    const std::string src = source_of(*s);
    const double target = num(*s, "value", "expect.slope");
    const double tol = num(*s, "tol", "expect.slope", 0.05);
    std::optional<SlopeFit> fit;
    bool have = false;
    if (src == "monte_carlo" && ladder) fit = ladder->fit, have = true;
    if (src == "quadrature" && theory) fit = theory->fit, have = true;
    if (have) {
      if (!fit) {
        notes.push_back({"slope_" + src, "indeterminate", "no slope could be fitted"});
      } else {
        notes.push_back(annotate("slope_" + src, std::abs(fit->slope - target) <= tol,
                                 fmt::format("slope {:.4f} vs {:.4f} +- {}", fit->slope, target, tol)));
      }
    }
  }
  if (const json* b = find(e, "bounded_ratio")) {
    const std::string src = source_of(*b);
    const double max = num(*b, "max", "expect.bounded_ratio");
    if (auto ys = values_for(src)) {
      const auto [lo, hi] = std::minmax_element(ys->begin(), ys->end());
      const double ratio = *hi / *lo;
      notes.push_back(annotate("bounded_ratio_" + src, *lo > 0.0 && ratio <= max,
                               fmt::format("max/min {:.4f} (limit {})", ratio, max)));
    }
  }
  if (ladder && flag(e, "mean_square_decreasing", "expect", false)) {
    std::string seq;
    for (const auto& r : ladder->records) seq += (seq.empty() ? "" : " > ") + fmt::format("{:.4g}", r.mean_square);
    notes.push_back(annotate("mean_square_decreasing", ladder->mean_square_decreasing(), seq));
  }
  if (const json* f = find(e, "final_over_initial_max"); f && ladder && !ladder->records.empty()) {
    const double limit = num(e, "final_over_initial_max", "expect");
    const double ratio = ladder->records.back().mean_square / ladder->records.front().mean_square;
    notes.push_back(annotate("final_over_initial", ratio <= limit, fmt::format("{:.4f} (limit {})", ratio, limit)));
  }
  if (const json* mn = find(e, "mean"); mn && ladder) {
    const double target = num(*mn, "value", "expect.mean");
    const double rel = num(*mn, "rel_tol", "expect.mean", 0.02);
    for (const auto& r : ladder->records) {
      notes.push_back(annotate(fmt::format("mean_eps_{:.6g}", r.eps), std::abs(r.mean - target) <= rel * std::abs(target),
                               fmt::format("mean {:.5f} +- {:.2g} vs {} +- {}%", r.mean, r.mean_se, target, 100 * rel)));
    }
  }
  if (const json* qa = find(e, "quadrature_agreement"); qa && ladder && theory) {
    const double k = num(*qa, "se_multiple", "expect.quadrature_agreement", 3.0);
    const double allow = num(*qa, "rel_allowance", "expect.quadrature_agreement", 0.02);
    std::set<double> only;
    if (const json* l = find(*qa, "eps_log2")) {
      for (const auto& x : *l) only.insert(std::ldexp(1.0, -x.get<int>()));
    }
    for (std::size_t i = 0; i < ladder->records.size(); ++i) {
      const auto& r = ladder->records[i];
      if (!only.empty() && !only.count(r.eps)) continue;
      const double q = theory->points[i].total;
      const double diff = std::abs(r.mean_square - q);
      notes.push_back(annotate(fmt::format("quadrature_agreement_eps_{:.6g}", r.eps),
                               diff <= k * r.mean_square_se + allow * q,
                               fmt::format("MC {:.6g} +- {:.3g} vs quadrature {:.6g} (|diff| {:.3g}, allowed {:.3g})",
                                           r.mean_square, r.mean_square_se, q, diff, k * r.mean_square_se + allow * q)));
    }
  }
  if (const json* tel = find(e, "telescoping"); tel && ens) {
    const double tol = num(*tel, "tol", "expect.telescoping", 1e-12);
    const std::string fname = c.functional.value("f", "cube");
    const double a = fname == "identity" ? 1.0 : 2.0;
    const auto fn = make_functional(c.functional);
    const auto& grid = ens->grid();
    const std::size_t n_t = grid.index_of(fn.t);
    double worst = 0.0;
    for (double eps : c.ladder) {
      const std::size_t k = grid.steps_for(eps);
      const auto res = evaluate(*ens, fn, eps, kernels::Backend::serial);
      for (std::size_t p = 0; p < ens->n_paths(); ++p) {
        double head = 0.0, tail = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          head += ens->value(p, i);
          tail += ens->value(p, n_t + i);
        }
        const double closed = a * (ens->value(p, n_t) - ens->value(p, 0)) - a * (tail - head) / static_cast<double>(k);
        worst = std::max(worst, std::abs(res[p] - closed));
      }
    }
    notes.push_back(annotate("telescoping", worst <= tol, fmt::format("max |residual - closed form| = {:.3g}", worst)));
  }
  if (const json* ch = find(e, "chaos"); ch && theory && !theory->chaos.empty()) {
    std::vector<double> i1, i3d, zeros(theory->chaos.size(), 0.0);
    for (const auto& x : theory->chaos) {
      i1.push_back(x.i1_sq);
      i3d.push_back(x.i3_diagonal);
    }
    if (const json* s = find(*ch, "i1_slope")) {
      const double target = num(*s, "value", "expect.chaos.i1_slope");
      const double tol = num(*s, "tol", "expect.chaos.i1_slope", 0.05);
      const auto fit = fit_slope(c.ladder, i1, zeros);
      notes.push_back(annotate("chaos_i1_slope", fit && std::abs(fit->slope - target) <= tol,
                               fmt::format("slope {:.4f} vs {:.4f} +- {}", fit ? fit->slope : NAN, target, tol)));
    }
    if (const json* s = find(*ch, "i3_diagonal_spread_max")) {
      const double limit = s->get<double>();
      const auto [lo, hi] = std::minmax_element(i3d.begin(), i3d.end());
      const double spread = *hi / *lo - 1.0;
      notes.push_back(annotate("chaos_i3_diagonal_constant", spread <= limit,
                               fmt::format("diagonal in [{:.5f}, {:.5f}], spread {:.3f}%", *lo, *hi, 100.0 * spread)));
    }
  }
  if (const json* cs = find(e, "conditions")) {
    for (auto it = cs->begin(); it != cs->end(); ++it) {
      auto v = std::find_if(verdicts.begin(), verdicts.end(), [&](const auto& x) { return x.id == it.key(); });
      if (v == verdicts.end()) continue;
      const std::string want = it->get<std::string>();
      notes.push_back(annotate("condition_" + it.key(), to_string(v->status) == want,
                               fmt::format("{} (expected {})", to_string(v->status), want)));
    }
  }
}

}  // namespace

// ---- config

Functional make_functional(const json& f) {
  const std::string w = "functional";
  Functional fn;
  fn.kind = functional_kind(str(f, "kind", w, "odd_variation"));
  fn.m = num(f, "m", w, 3.0);
  if (!(fn.m > 0.0)) throw ValidationError("functional.m: must be positive");
  fn.t = num(f, "t", w, 1.0);
  switch (fn.kind) {
    case Functional::Kind::weighted_variation: {
      const auto g = str(f, "g", w, "one");
      fn.g = weight_function(g);
      fn.label = "g=" + g;
      break;
    }
    case Functional::Kind::symmetric_integral:
    case Functional::Kind::ito_residual: {
      const auto name = str(f, "f", w, "cube");
      auto [fx, fp] = ito_function(name);
      fn.f = fx;
      fn.fprime = fp;
      fn.label = fmt::format("f={},t={}", name, fn.t);
      break;
    }
    default: break;
  }
  return fn;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config: must be a JSON object");
  only_keys(doc,
            {"name", "preset", "model", "grid", "functional", "n_paths", "seed", "output_dir", "quadrature",
             "conditions", "expect", "audit", "report"},
            "config");
  ExperimentConfig c;
  c.name = str(doc, "name", "config", "experiment");
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos) {
    throw ValidationError("config.name: must be a non-empty plain name");
  }
  c.seed = count(doc, "seed", "config");
  c.output_dir = str(doc, "output_dir", "config", "out/" + c.name);
  json resolved = {{"name", c.name}, {"seed", c.seed}, {"output_dir", c.output_dir.string()}};
  if (const json* p = find(doc, "preset")) resolved["preset"] = *p;

  if (const json* a = find(doc, "audit")) {
    if (!a->is_object()) throw ValidationError("audit: must be an object");
    c.audit = *a;
    resolved["audit"] = *a;
  }
  const json* model = find(doc, "model");
  if (!model) {
    if (c.audit.is_null()) throw ValidationError("model: required");
    for (const char* k : {"grid", "functional", "n_paths", "quadrature", "conditions"}) {
      if (find(doc, k)) throw ValidationError(fmt::format("{}: needs a model", k));
    }
    c.resolved = resolved;
    return c;
  }
  only_keys(*model, {"name", "params", "family"}, "model");
  const auto spec = build_model(*model);
  c.model = *model;
  resolved["model"] = *model;

  const json& grid = object(doc, "grid", "config");
  if (!find(doc, "grid")) throw ValidationError("grid: required");
  only_keys(grid, {"T", "n", "ladder", "ladder_log2"}, "grid");
  c.horizon = num(grid, "T", "grid", 1.0);
  c.steps = count(grid, "n", "grid");
  c.ladder = eps_ladder(grid, "grid", {});
  std::optional<TimeGrid> tg;
  try {
    tg.emplace(c.horizon, c.steps, c.ladder);
  } catch (const GridError& e) {
    throw ValidationError(std::string("grid.ladder: ") + e.what());
  }
  resolved["grid"] = {{"T", c.horizon}, {"n", c.steps}, {"ladder", c.ladder}};

  json functional = object(doc, "functional", "config");
  only_keys(functional, {"kind", "m", "g", "f", "t"}, "functional");
  if (!functional.contains("t")) functional["t"] = c.horizon;
  const auto fn = make_functional(functional);
  try {
    tg->index_of(fn.t);
  } catch (const GridError& e) {
    throw ValidationError(std::string("functional.t: ") + e.what());
  }
  functional["kind"] = to_string(fn.kind);
  functional["m"] = fn.m;
  c.functional = functional;
  resolved["functional"] = functional;

  c.n_paths = count(doc, "n_paths", "config");
  resolved["n_paths"] = c.n_paths;

  const json& quad = object(doc, "quadrature", "config");
  only_keys(quad, {"enabled", "resolution", "horizon", "chaos"}, "quadrature");
  c.quadrature = flag(quad, "enabled", "quadrature", c.n_paths == 0);
  c.quadrature_resolution = count(quad, "resolution", "quadrature", 1024);
  if (c.quadrature_resolution < 8) throw ValidationError("quadrature.resolution: must be at least 8");
  if (find(quad, "horizon")) {
    c.quadrature_horizon = num(quad, "horizon", "quadrature");
    if (!(*c.quadrature_horizon > 0.0)) throw ValidationError("quadrature.horizon: must be positive");
  }
  c.chaos = flag(quad, "chaos", "quadrature", false);
  std::string why;
  if (c.n_paths == 0 && !c.quadrature) throw ValidationError("n_paths: 0 needs quadrature.enabled");
  if (c.quadrature && !quadrature_possible(spec, functional, &why)) {
    throw ValidationError(c.n_paths == 0 ? "n_paths: 0 requests a quadrature-only report but " + why
                                         : "quadrature.enabled: " + why);
  }
  if (c.chaos && spec.name != "fbm") throw ValidationError("quadrature.chaos: only available for fbm");
  resolved["quadrature"] = {{"enabled", c.quadrature}, {"resolution", c.quadrature_resolution}, {"chaos", c.chaos}};
  if (c.quadrature_horizon) resolved["quadrature"]["horizon"] = *c.quadrature_horizon;

  if (const json* conds = find(doc, "conditions")) {
    if (!conds->is_array()) throw ValidationError("conditions: must be an array");
    for (std::size_t i = 0; i < conds->size(); ++i) {
      const auto& e = (*conds)[i];
      if (!e.is_object() || !e.contains("check") || !e["check"].is_string()) {
        throw ValidationError(fmt::format("conditions[{}].check: required string", i));
      }
    }
    c.conditions = *conds;
    resolved["conditions"] = *conds;
  } else {
    c.conditions = nullptr;
  }

  if (const json* e = find(doc, "expect")) {
    if (!e->is_object()) throw ValidationError("expect: must be an object");
    only_keys(*e,
              {"slope", "bounded_ratio", "mean_square_decreasing", "final_over_initial_max", "mean",
               "quadrature_agreement", "telescoping", "chaos", "conditions"},
              "expect");
    if (e->contains("telescoping")) {
      const auto f = functional.value("f", "");
      if (fn.kind != Functional::Kind::ito_residual || (f != "linear" && f != "identity")) {
        throw ValidationError("expect.telescoping: needs an ito_residual functional with f linear or identity");
      }
    }
    if (e->contains("chaos") && !c.chaos) throw ValidationError("expect.chaos: needs quadrature.chaos");
    c.expect = *e;
    resolved["expect"] = *e;
  }
  const json& report = object(doc, "report", "config");
  only_keys(report, {"include_estimates"}, "report");
  c.include_estimates = flag(report, "include_estimates", "report", false);
  resolved["report"] = {{"include_estimates", c.include_estimates}};
  c.resolved = resolved;
  return c;
}

ExperimentConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open config " + file.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

// ---- conditions

json default_conditions(const ModelSpec& spec) {
  json out = json::array();
  if (spec.univariate) {
    out.push_back({{"check", "little_o"}});
    out.push_back({{"check", "concave_increasing"}});
  }
  if (spec.metric) out.push_back({{"check", "measure_bound"}});
  if (spec.metric && spec.univariate) out.push_back({{"check", "forito"}});
  if (spec.univariate) out.push_back({{"check", "deltauuk"}, {"k", 2}});
  if (spec.volatility) out.push_back({{"check", "condition_M"}});
  if (spec.kernel && spec.univariate) out.push_back({{"check", "additional"}});
  if (rl_family(spec)) out.push_back({{"check", "prop_ex"}});
  return out;
}

ConditionVerdict run_condition(const ModelSpec& spec, const json& entry, double default_m, std::uint64_t default_seed) {
  const std::string check = str(entry, "check", "condition");
  const std::string w = "condition " + check;
  auto need_univ = [&]() -> const UnivariateMetric& {
    if (!spec.univariate) throw ValidationError(w + ": model " + spec.name + " has no univariate metric");
    return *spec.univariate;
  };
  auto need_metric = [&]() -> const BivariateMetric& {
    if (!spec.metric) throw ValidationError(w + ": model " + spec.name + " has no Gaussian metric");
    return *spec.metric;
  };
  auto m_int = [&] { return require_odd(num(entry, "m", w, default_m), w + ".m"); };

  if (check == "little_o") {
    only_keys(entry, {"check", "m", "convention"}, w);
    const auto conv = str(entry, "convention", w, "on_delta");
    if (conv != "on_delta" && conv != "on_delta_sq") throw ValidationError(w + ".convention: on_delta or on_delta_sq");
    return check_little_o(need_univ(), num(entry, "m", w, default_m),
                          conv == "on_delta" ? LittleOConvention::on_delta : LittleOConvention::on_delta_sq);
  }
  if (check == "concave_increasing") {
    only_keys(entry, {"check", "range"}, w);
    std::optional<double> range;
    if (find(entry, "range")) range = num(entry, "range", w);
    return check_concave_increasing(need_univ(), range);
  }
  if (check == "measure_bound") {
    only_keys(entry, {"check", "m", "ladder", "ladder_log2", "horizon"}, w);
    MeasureBoundOptions o;
    o.horizon = num(entry, "horizon", w, 1.0);
    return check_measure_bound(need_metric(), m_int(), eps_ladder(entry, w, {4, 5, 6, 7, 8, 9, 10}), o);
  }
  if (check == "condition_M") {
    only_keys(entry, {"check", "m", "tuples", "n_samples", "seed", "gamma_scale"}, w);
    if (!spec.volatility) throw ValidationError(w + ": model " + spec.name + " has no volatility");
    const int m = m_int();
    std::vector<std::vector<double>> tuples;
    if (const json* t = find(entry, "tuples")) {
      try {
        tuples = t->get<std::vector<std::vector<double>>>();
      } catch (const json::exception&) {
        throw ValidationError(w + ".tuples: must be an array of arrays of times");
      }
    } else {
      std::vector<double> tuple;
      if (m == 3) {
        tuple = {0.25, 0.5, 1.0};
      } else {
        for (int i = 1; i <= m; ++i) tuple.push_back(static_cast<double>(i) / m);
      }
      tuples.push_back(tuple);
    }
    for (const auto& t : tuples) {
      if (t.size() != static_cast<std::size_t>(m)) throw ValidationError(fmt::format("{}.tuples: need {} times each", w, m));
    }
    auto vol = *spec.volatility;
    const double scale = num(entry, "gamma_scale", w, 1.0);
    if (scale != 1.0) {
      auto base = vol;
      vol = vol.with_gamma([base, scale](double s, int mm) { return scale * base.gamma(s, mm); });
    }
    return check_condition_M(vol, m, tuples, count(entry, "n_samples", w, 100000), count(entry, "seed", w, default_seed));
  }
  if (check == "additional") {
    only_keys(entry, {"check", "m", "ladder", "ladder_log2", "resolution", "horizon", "min_exponent"}, w);
    if (!spec.kernel) throw ValidationError(w + ": model " + spec.name + " has no Volterra kernel");
    AdditionalOptions o;
    o.resolution = count(entry, "resolution", w, 1024);
    o.horizon = num(entry, "horizon", w, 1.0);
    if (find(entry, "min_exponent")) o.min_exponent = num(entry, "min_exponent", w);
    auto kernel = *spec.kernel;
    if (spec.volatility) kernel = kernel.scaled("gamma*" + kernel.name(), gamma_of(spec, m_int()));
    return check_additional(kernel, need_univ(), eps_ladder(entry, w, {4, 5, 6, 7, 8}), o);
  }
  if (check == "forito") {
    only_keys(entry, {"check", "horizon", "ladder_depth", "n_pairs", "gap", "seed"}, w);
    ForItoOptions o;
    o.horizon = num(entry, "horizon", w, 1.0);
    o.ladder_depth = static_cast<int>(count(entry, "ladder_depth", w, 20));
    o.n_pairs = count(entry, "n_pairs", w, 10000);
    o.gap = num(entry, "gap", w, 1e-3);
    o.seed = count(entry, "seed", w, default_seed);
    return check_forito_conditions(need_metric(), need_univ(), o);
  }
  if (check == "deltauuk") {
    only_keys(entry, {"check", "k", "ladder", "ladder_log2"}, w);
    const auto k = count(entry, "k", w, 2);
    if (k != 2 && k != 3) throw ValidationError(w + ".k: must be 2 or 3");
    return check_deltauuk(need_univ(), static_cast<int>(k), eps_ladder(entry, w, {4, 6, 8, 10, 12}));
  }
  if (check == "prop_ex") {
    only_keys(entry, {"check", "m", "horizon"}, w);
    if (!rl_family(spec)) throw ValidationError(w + ": needs a Riemann-Liouville kernel model");
    const int m = m_int();
    return check_prop_ex_bounds(rl_decomposition(spec.hurst, m, gamma_of(spec, m)), m, num(entry, "horizon", w, 1.0));
  }
  throw ValidationError(fmt::format("{}: unknown check (little_o, concave_increasing, measure_bound, condition_M, "
                                    "additional, forito, deltauuk, prop_ex)",
                                    w));
}

// ---- running

bool RunResult::all_passed() const {
  std::set<std::string> expected;
  for (const auto& a : expectations) {
    if (a.status == "fail") return false;
    if (a.name.rfind("condition_", 0) == 0) expected.insert(a.name.substr(10));
  }
  for (const auto& v : verdicts) {
    if (v.status == Status::fail && !expected.count(v.id)) return false;
  }
  return true;
}

RunResult run_config(const ExperimentConfig& c, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  ScopedWorkers guard(opts.workers);
  RunResult r;
  r.name = c.name;

  std::optional<ModelSpec> spec;
  if (!c.model.is_null()) spec = build_model(c.model);
  const bool has_grid = spec.has_value();
  const double default_m = has_grid ? c.functional.value("m", 3.0) : 3.0;

  if (!c.audit.is_null() && opts.mode == RunMode::full) {
    r.audit_json = run_audit(c.audit, c.seed, r.expectations, r.verdicts);
    r.audit_json["config"] = c.resolved;
  }

  std::optional<PathEnsemble> ens;
  if (has_grid && opts.mode == RunMode::full && c.n_paths > 0) {
    const TimeGrid grid(c.horizon, c.steps, c.ladder);
    ens.emplace(simulate(spec->process, grid, c.n_paths, c.seed));
    r.ladder = summarize(*ens, make_functional(c.functional));
  }

  std::optional<TheoryOut> theory;
  if (has_grid && (opts.mode == RunMode::theory || (opts.mode == RunMode::full && c.quadrature))) {
    std::string why;
    if (!quadrature_possible(*spec, c.functional, &why)) throw ValidationError("quadrature: " + why);
    theory = run_theory(*spec, c);
  }

  std::vector<ConditionVerdict> verdicts;
  if (has_grid && opts.mode != RunMode::theory) {
    json list = c.conditions;
    if (list.is_null() && opts.mode == RunMode::conditions) list = default_conditions(*spec);
    if (list.is_array()) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        try {
          verdicts.push_back(run_condition(*spec, list[i], default_m, c.seed));
        } catch (const ValidationError& e) {
          throw ValidationError(fmt::format("conditions[{}]: {}", i, e.what()));
        }
      }
    }
  }

  std::vector<Annotation> notes;
  if (has_grid) check_expectations(c, r.ladder, theory ? &*theory : nullptr, verdicts, ens, notes);
  if (r.ladder) {
    for (const auto& n : notes) r.ladder->annotations.push_back(n);
  }
  r.expectations.insert(r.expectations.end(), notes.begin(), notes.end());
  r.verdicts.insert(r.verdicts.end(), verdicts.begin(), verdicts.end());

  auto expectations_json = [&] {
    json a = json::array();
    for (const auto& n : r.expectations) a.push_back({{"name", n.name}, {"status", n.status}, {"detail", n.detail}});
    return a;
  };

  // Reports.
  if (theory) {
    r.quadrature = theory->points;
    r.theory_csv = theory_csv(*theory);
    json pts = json::array();
    for (const auto& p : theory->points) pts.push_back(p.to_json());
    r.theory_json = {{"config", c.resolved},
                     {"process", describe(spec->process)},
                     {"m", static_cast<int>(default_m)},
                     {"horizon", c.quadrature_horizon.value_or(c.horizon)},
                     {"points", pts},
                     {"slope", fit_json(theory->fit)},
                     {"max_over_min", theory->max_over_min}};
    if (!theory->chaos.empty()) {
      json ch = json::array();
      for (std::size_t i = 0; i < theory->chaos.size(); ++i) {
        const auto& x = theory->chaos[i];
        ch.push_back({{"eps", c.ladder[i]},
                      {"i1_sq", x.i1_sq},
                      {"i3_sq", x.i3_sq},
                      {"i1_diagonal", x.i1_diagonal},
                      {"i3_diagonal", x.i3_diagonal}});
      }
      r.theory_json["chaos"] = ch;
    }
  }
  if (r.ladder) {
    r.ladder_csv = r.ladder->to_csv();
    r.ladder_json = r.ladder->to_json(c.include_estimates);
    r.ladder_json["config"] = c.resolved;
    r.ladder_json["quadrature_only"] = false;
    if (theory) r.ladder_json["quadrature"] = r.theory_json["points"];
  } else if (has_grid && opts.mode == RunMode::full) {
    r.ladder_json = {{"config", c.resolved},
                     {"model", describe(spec->process)},
                     {"quadrature_only", true},
                     {"monte_carlo", nullptr},
                     {"note", "n_paths = 0: Monte Carlo sections omitted"},
                     {"quadrature", r.theory_json["points"]},
                     {"slope", r.theory_json["slope"]}};
  }
  if (has_grid && opts.mode != RunMode::full) r.ladder_json = nullptr;
  if (!r.ladder_json.is_null()) r.ladder_json["expectations"] = expectations_json();
  if (!verdicts.empty() || opts.mode == RunMode::conditions) {
    json vs = json::array();
    for (const auto& v : verdicts) vs.push_back(v.to_json());
    r.conditions_json = {{"config", c.resolved}, {"process", spec ? describe(spec->process) : "none"}, {"verdicts", vs}};
  }

  if (opts.write_files) {
    fs::create_directories(c.output_dir);
    const auto& d = c.output_dir;
    if (!r.ladder_json.is_null()) write_json(d / "ladder.json", r.ladder_json, r.files);
    if (r.ladder) write_text(d / "ladder.csv", r.ladder_csv, r.files);
    if (theory) {
      write_json(d / "theory.json", r.theory_json, r.files);
      write_text(d / "theory.csv", r.theory_csv, r.files);
    }
    if (!r.conditions_json.is_null()) {
      json out = r.conditions_json;
      out["matrix"] = condition_matrix({r});
      write_json(d / "conditions.json", out, r.files);
    }
    if (!r.audit_json.is_null()) {
      json out = r.audit_json;
      out["expectations"] = expectations_json();
      write_json(d / "audit.json", out, r.files);
    }
    if (ens && opts.dump_binary) {
      ens->write_binary(d / "ensemble.bin");
      r.files.push_back(d / "ensemble.bin");
    }
    if (ens && opts.dump_csv) {
      ens->write_csv(d / "ensemble.csv");
      r.files.push_back(d / "ensemble.csv");
    }
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const char* mode = opts.mode == RunMode::full ? "run" : opts.mode == RunMode::conditions ? "check" : "theory";
  json files = json::array();
  for (const auto& f : r.files) files.push_back(f.filename().string());
  r.manifest = {{"name", c.name},
                {"mode", mode},
                {"config", c.resolved},
                {"versions", build_versions()},
                {"workers", opts.workers},
                {"wall_time_seconds", wall},
                {"files", files},
                {"expectations", expectations_json()},
                {"all_passed", r.all_passed()}};
  if (opts.write_files) write_json(c.output_dir / "manifest.json", r.manifest, r.files);
  return r;
}

// ---- condition matrix

json condition_matrix(const std::vector<RunResult>& runs) {
  std::vector<std::string> ids;
  for (const auto& r : runs) {
    for (const auto& v : r.verdicts) {
      if (std::find(ids.begin(), ids.end(), v.id) == ids.end()) ids.push_back(v.id);
    }
  }
  json processes = json::array();
  json matrix = json::array();
  for (const auto& r : runs) {
    bool any = false;
    json row = json::array();
    for (const auto& id : ids) {
      auto v = std::find_if(r.verdicts.begin(), r.verdicts.end(), [&](const auto& x) { return x.id == id; });
      any = any || v != r.verdicts.end();
      row.push_back(v == r.verdicts.end() ? json(nullptr) : json(to_string(v->status)));
    }
    if (!any) continue;
    processes.push_back(r.name);
    matrix.push_back(row);
  }
  return {{"processes", processes}, {"conditions", ids}, {"matrix", matrix}};
}

std::string render_condition_matrix(const json& m) {
  const auto& ids = m["conditions"];
  const auto& procs = m["processes"];
  std::size_t w0 = 7;
  for (const auto& p : procs) w0 = std::max(w0, p.get<std::string>().size());
  std::vector<std::size_t> widths;
  std::string out = fmt::format("{:<{}}", "process", w0);
  for (const auto& id : ids) {
    widths.push_back(std::max<std::size_t>(id.get<std::string>().size(), 13));
    out += fmt::format("  {:<{}}", id.get<std::string>(), widths.back());
  }
  out += "\n";
  for (std::size_t i = 0; i < procs.size(); ++i) {
    out += fmt::format("{:<{}}", procs[i].get<std::string>(), w0);
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto& cell = m["matrix"][i][j];
      out += fmt::format("  {:<{}}", cell.is_null() ? "-" : cell.get<std::string>(), widths[j]);
    }
    out += "\n";
  }
  return out;
}

json build_versions() {
  return {{"oddvar", ODDVAR_VERSION},
          {"compiler", __VERSION__},
          {"cxx", static_cast<long>(__cplusplus)},
          {"openmp", _OPENMP},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"fmt", FMT_VERSION},
          {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                        NLOHMANN_JSON_VERSION_PATCH)}};
}

// ---- presets

std::vector<std::string> preset_names() {
  return {"fbm-threshold", "homog-sufficiency", "rl-fbm",        "log-corrected",
          "martingale-cos", "ito-residual",     "isserlis-audit", "brownian-baseline"};
}

namespace {

json ladder_log2(int from, int to, int stride = 1) {
  json a = json::array();
  for (int k = from; k <= to; k += stride) a.push_back(k);
  return a;
}

std::vector<json> preset_docs(const std::string& name) {
  const json decreasing = {{"mean_square_decreasing", true}, {"final_over_initial_max", 0.25}};
  const json coarse = {{"T", 1.0}, {"n", 2048}, {"ladder_log2", ladder_log2(2, 8, 2)}};
  if (name == "fbm-threshold") {
    std::vector<json> out;
    for (double h : {0.1, 1.0 / 6.0, 0.25}) {
      json doc = {{"name", fmt::format("fbm_H{:.4g}", h)},
                  {"model", {{"name", "fbm"}, {"params", {{"H", h}}}}},
                  {"grid", {{"T", 1.0}, {"n", 1024}, {"ladder_log2", ladder_log2(4, 9)}}},
                  {"functional", {{"kind", "odd_variation"}, {"m", 3}}},
                  {"n_paths", 0},
                  {"seed", 1},
                  {"quadrature", {{"enabled", true}, {"resolution", 1024}, {"chaos", h != 0.1 && h != 0.25}}},
                  {"conditions", {{{"check", "little_o"}, {"m", 3}}, {{"check", "measure_bound"}, {"m", 3}}}}};
      const bool above = h > 1.0 / 6.0 + 1e-12;
      const bool at = std::abs(h - 1.0 / 6.0) < 1e-12;
      if (at) {
        doc["expect"] = {{"bounded_ratio", {{"max", 1.5}, {"source", "quadrature"}}},
                         {"chaos", {{"i1_slope", {{"value", 4.0 * h}, {"tol", 0.05}}}, {"i3_diagonal_spread_max", 0.02}}}};
      } else {
        doc["expect"] = {{"slope", {{"value", 6.0 * h - 1.0}, {"tol", 0.05}, {"source", "quadrature"}}},
                         {"conditions", {{"little_o_delta", above ? "pass" : "fail"},
                                         {"measure_bound", above ? "pass" : "fail"}}}};
      }
      if (at) doc["expect"]["conditions"] = {{"little_o_delta", "fail"}, {"measure_bound", "pass"}};
      out.push_back(doc);
    }
    return out;
  }
  if (name == "homog-sufficiency") {
    return {{{"name", "fbm_H0.3"},
             {"model", {{"name", "fbm"}, {"params", {{"H", 0.3}}}}},
             {"grid", {{"T", 1.0}, {"n", 4096}, {"ladder_log2", ladder_log2(6, 8)}}},
             {"functional", {{"kind", "odd_variation"}, {"m", 3}}},
             {"n_paths", 2000},
             {"seed", 7},
             {"quadrature", {{"enabled", true}, {"resolution", 1024}}},
             {"conditions",
              {{{"check", "little_o"}}, {{"check", "concave_increasing"}}, {{"check", "measure_bound"}}}},
             {"expect",
              {{"mean_square_decreasing", true},
               {"quadrature_agreement", {{"se_multiple", 3}, {"rel_allowance", 0.02}, {"eps_log2", {6}}}}}}}};
  }
  if (name == "rl-fbm") {
    return {{{"name", "rl_fbm_H0.3"},
             {"model", {{"name", "rl_fbm"}, {"params", {{"H", 0.3}}}}},
             {"grid", coarse},
             {"functional", {{"kind", "odd_variation"}, {"m", 3}}},
             {"n_paths", 1000},
             {"seed", 11},
             {"quadrature", {{"enabled", true}, {"resolution", 256}}},
             {"conditions",
              {{{"check", "little_o"}},
               {{"check", "measure_bound"}},
               {{"check", "forito"}, {"n_pairs", 2000}},
               {{"check", "deltauuk"}, {"k", 2}},
               {{"check", "prop_ex"}}}},
             {"expect", decreasing}}};
  }
  if (name == "log-corrected") {
    return {{{"name", "log_corrected_m3"},
             {"model", {{"name", "log_corrected"}, {"params", {{"m", 3}}}}},
             {"grid", coarse},
             {"functional", {{"kind", "odd_variation"}, {"m", 3}}},
             {"n_paths", 1000},
             {"seed", 17},
             {"conditions",
              {{{"check", "little_o"}}, {{"check", "concave_increasing"}}, {{"check", "deltauuk"}, {"k", 2}}}},
             {"expect", {{"mean_square_decreasing", true}}}}};
  }
  if (name == "martingale-cos") {
    return {{{"name", "martingale_cos_H0.3"},
             {"model", {{"name", "martingale_cos"}, {"params", {{"H", 0.3}, {"m", 3}}}}},
             {"grid", coarse},
             {"functional", {{"kind", "odd_variation"}, {"m", 3}}},
             {"n_paths", 1000},
             {"seed", 13},
             {"conditions",
              {{{"check", "condition_M"}, {"tuples", {{0.25, 0.5, 1.0}}}, {"n_samples", 100000}},
               {{"check", "additional"}, {"ladder_log2", ladder_log2(4, 8)}, {"resolution", 1024}},
               {{"check", "prop_ex"}}}},
             {"expect", decreasing}}};
  }
  if (name == "ito-residual") {
    auto doc = [&](const char* f, std::size_t paths) {
      return json{{"name", fmt::format("ito_residual_{}", f)},
                  {"model", {{"name", "rl_fbm"}, {"params", {{"H", 0.3}}}}},
                  {"grid", coarse},
                  {"functional", {{"kind", "ito_residual"}, {"f", f}, {"t", 1.0}}},
                  {"n_paths", paths},
                  {"seed", 19}};
    };
    auto cube = doc("cube", 1000);
    cube["expect"] = decreasing;
    auto linear = doc("linear", 200);
    linear["expect"] = {{"telescoping", {{"tol", 1e-12}}}};
    return {cube, linear};
  }
  if (name == "isserlis-audit") {
    return {{{"name", "isserlis"},
             {"seed", 5},
             {"audit",
              {{"isserlis", {{"m", {1, 3, 5, 7, 9}}, {"mc_m", 3}, {"theta", 0.5}, {"n_samples", 400000}}},
               {"chaos_identity", {{"sigma_sq", 1.0}, {"n_samples", 400000}}}}}}};
  }
  if (name == "brownian-baseline") {
    return {{{"name", "brownian"},
             {"model", {{"name", "brownian"}}},
             {"grid", {{"T", 1.0}, {"n", 16384}, {"ladder_log2", ladder_log2(5, 7)}}},
             {"functional", {{"kind", "covariation"}}},
             {"n_paths", 500},
             {"seed", 3},
             {"conditions",
              {{{"check", "little_o"}, {"m", 3}}, {{"check", "measure_bound"}, {"m", 3}}, {{"check", "additional"}, {"m", 3}}}},
             {"expect", {{"mean", {{"value", 1.0}, {"rel_tol", 0.02}}}}}}};
  }
  std::string names;
  for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
  throw UsageError(fmt::format("unknown preset '{}'; presets: {}", name, names));
}

}  // namespace

std::vector<ExperimentConfig> preset_configs(const std::string& name, const fs::path& output_dir) {
  const auto docs = preset_docs(name);
  std::vector<ExperimentConfig> out;
  for (auto doc : docs) {
    doc["preset"] = name;
    doc["output_dir"] = (docs.size() == 1 ? output_dir : output_dir / doc["name"].get<std::string>()).string();
    out.push_back(parse_config(doc));
  }
  return out;
}

bool PresetResult::all_passed() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunResult& r) { return r.all_passed(); });
}

PresetResult run_preset(const std::string& name, const fs::path& output_dir, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  PresetResult pr;
  const auto configs = preset_configs(name, output_dir);
  std::ostringstream csv;
  csv << "name,model,functional,source,slope,half_width,max_over_min,expectations_passed,expectations_total,status\n";
  json rows = json::array();
  for (const auto& c : configs) {
    auto r = run_config(c, opts);
    std::size_t passed = 0;
    for (const auto& a : r.expectations) passed += a.status == "pass";
    std::string source = "none";
    double slope = NAN, half = NAN, ratio = NAN;
    if (r.ladder) {
      source = "monte_carlo";
      if (r.ladder->fit) slope = r.ladder->fit->slope, half = r.ladder->fit->half_width;
      double lo = INFINITY, hi = 0.0;
      for (const auto& rec : r.ladder->records) lo = std::min(lo, rec.mean_square), hi = std::max(hi, rec.mean_square);
      ratio = hi / lo;
    } else if (!r.theory_json.is_null()) {
      source = "quadrature";
      if (!r.theory_json["slope"].is_null()) {
        slope = r.theory_json["slope"]["value"].get<double>();
        half = r.theory_json["slope"]["half_width_95"].get<double>();
      }
      ratio = r.theory_json["max_over_min"].get<double>();
    }
    const std::string model = c.model.is_null() ? "audit" : c.model.dump();
    const std::string functional = c.functional.is_null() ? "" : c.functional.value("kind", "");
    const std::string status = r.all_passed() ? "pass" : "fail";
    auto cell = [](double x) { return std::isnan(x) ? std::string() : fmt_double(x); };
    std::string model_cell = model;
    std::replace(model_cell.begin(), model_cell.end(), '"', '\'');
    csv << fmt::format("{},\"{}\",{},{},{},{},{},{},{},{}\n", c.name, model_cell, functional, source, cell(slope),
                       cell(half), cell(ratio), passed, r.expectations.size(), status);
    rows.push_back({{"name", c.name},
                    {"model", c.model},
                    {"source", source},
                    {"slope", std::isnan(slope) ? json(nullptr) : json(slope)},
                    {"half_width_95", std::isnan(half) ? json(nullptr) : json(half)},
                    {"max_over_min", std::isnan(ratio) ? json(nullptr) : json(ratio)},
                    {"expectations", r.manifest["expectations"]},
                    {"status", status}});
    pr.runs.push_back(std::move(r));
  }
  pr.summary_csv = csv.str();
  json configs_json = json::array();
  for (const auto& c : configs) configs_json.push_back(c.resolved);
  pr.summary = {{"preset", name}, {"rows", rows}, {"all_passed", pr.all_passed()}};
  if (opts.write_files) {
    fs::create_directories(output_dir);
    std::vector<fs::path> files;
    write_json(output_dir / "summary.json", pr.summary, files);
    write_text(output_dir / "summary.csv", pr.summary_csv, files);
    const auto matrix = condition_matrix(pr.runs);
    if (!matrix["processes"].empty()) write_json(output_dir / "condition_matrix.json", matrix, files);
    if (configs.size() > 1) {
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      json names = json::array();
      for (const auto& f : files) names.push_back(f.filename().string());
      write_json(output_dir / "manifest.json",
                 {{"preset", name},
                  {"configs", configs_json},
                  {"versions", build_versions()},
                  {"workers", opts.workers},
                  {"wall_time_seconds", wall},
                  {"files", names},
                  {"all_passed", pr.all_passed()}},
                 files);
    }
  }
  return pr;
}

}  // namespace oddvar
