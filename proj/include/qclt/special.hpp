#pragma once

#include <vector>

namespace qclt {

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

// composite Gauss-Legendre, `panels` equal panels of `order` points (16, 32 or 64)
QuadRule gauss_legendre(double a, double b, int panels = 1, int order = 32);
void append(QuadRule& dst, const QuadRule& src);

// l_j(u) = exp(-u/2) L_j(u) for j = 0..K, overflow-safe
void scaled_laguerre(double u, int K, double* out);
std::vector<double> scaled_laguerre(double u, int K);

}  // namespace qclt
