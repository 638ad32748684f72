#pragma once

// Probabilists' Gauss-Hermite rule by Golub-Welsch: E f(Z) ~ sum w_i f(x_i).

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

namespace testing {

struct Rule {
  std::vector<double> x, w;
};

inline Rule gauss_hermite(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    r.w.push_back(v * v);
  }
  return r;
}

}  // namespace testing
