#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace oddvar {

/// Sum in a fixed pairwise tree with Neumaier-compensated leaves. The
/// result depends only on the input order, never on the worker count.
double pairwise_sum(std::span<const double> values);

/// pairwise_sum of f(values[i]).
double pairwise_sum(std::span<const double> values, const std::function<double(double)>& f);

/// Sample mean and the standard error of that mean.
struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

MeanEstimate estimate_mean(std::span<const double> values);

/// Sample covariance of paired samples.
double sample_covariance(std::span<const double> x, std::span<const double> y);

}  // namespace oddvar
