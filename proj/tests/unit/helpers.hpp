#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "qclt/fock.hpp"

namespace testing_helpers {

inline bool close(double a, double b, double rel, double abs_tol) {
  return std::abs(a - b) <= abs_tol + rel * std::max(std::abs(a), std::abs(b));
}

// <m|D_z|n> from the associated Laguerre closed form
inline qclt::cd displacement_element(qclt::cd z, int m, int n) {
  double u = std::norm(z);
  double g = std::exp(-0.5 * u);
  if (m >= n) {
    double c = std::sqrt(std::exp(std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
    return c * std::pow(z, m - n) * g * std::assoc_laguerre(n, m - n, u);
  }
  double c = std::sqrt(std::exp(std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
  return c * std::pow(-std::conj(z), n - m) * g * std::assoc_laguerre(m, n - m, u);
}

inline std::vector<double> random_probs(std::mt19937_64& rng, int K) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(K + 1);
  double s = 0.0;
  for (auto& v : p) s += (v = e(rng));
  for (auto& v : p) v /= s;
  return p;
}

inline qclt::DensityOperator random_dense(std::mt19937_64& rng, int K) {
  std::normal_distribution<double> g(0.0, 1.0);
  qclt::Matrix A(K + 1, K + 1);
  for (int i = 0; i <= K; ++i)
    for (int j = 0; j <= K; ++j) A(i, j) = qclt::cd(g(rng), g(rng));
  qclt::Matrix r = A * A.adjoint();
  r /= r.trace().real();
  return qclt::build_density(1, K, 0.5 * (r + r.adjoint()));
}

}  // namespace testing_helpers
