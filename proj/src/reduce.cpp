#include "oddvar/reduce.hpp"

#include <cmath>
#include <vector>

#include "oddvar/errors.hpp"

namespace oddvar {

namespace {

constexpr std::size_t kLeaf = 32;

double neumaier(std::span<const double> v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

double tree(std::span<const double> v) {
  if (v.size() <= kLeaf) return neumaier(v);
  const std::size_t half = v.size() / 2;
  const double parts[2] = {tree(v.first(half)), tree(v.subspan(half))};
  return neumaier(parts);
}

}  // namespace

double pairwise_sum(std::span<const double> values) { return tree(values); }

double pairwise_sum(std::span<const double> values, const std::function<double(double)>& f) {
  std::vector<double> mapped(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) mapped[i] = f(values[i]);
  return tree(mapped);
}

MeanEstimate estimate_mean(std::span<const double> values) {
  MeanEstimate est;
  est.count = values.size();
  if (values.empty()) return est;
  const double n = static_cast<double>(values.size());
  est.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    const double mean = est.mean;
    const double ss = pairwise_sum(values, [mean](double x) { return (x - mean) * (x - mean); });
    est.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

double sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("sample_covariance: size mismatch");
  if (x.size() < 2) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;
  std::vector<double> prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) prod[i] = (x[i] - mx) * (y[i] - my);
  return pairwise_sum(prod) / (n - 1.0);
}

}  // namespace oddvar
