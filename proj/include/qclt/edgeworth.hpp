#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "qclt/fock.hpp"
#include "qclt/phase_space.hpp"

namespace qclt {

// exponents (a_1, b_1, ..., a_m, b_m) of z_1^a_1 conj(z_1)^b_1 ...
using MultiIndex = std::vector<int>;
int degree(const MultiIndex& a);
double factorial_weight(const MultiIndex& a);  // alpha! = prod a_j! b_j!

struct Polynomial {
  int modes = 1;
  std::map<MultiIndex, cd> terms;  // coefficient of the monomial z^alpha

  cd operator()(std::span<const cd> z) const;
  cd operator()(cd z) const { return (*this)(std::span<const cd>(&z, 1)); }
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial scaled(cd s) const;
  int max_degree() const;
  bool is_zero(double tol = 0.0) const;
};

struct CumulantSet {
  int modes = 1;
  int order = 0;
  std::map<MultiIndex, cd> q;  // Taylor coefficients of ln chi times alpha!

  cd at(const MultiIndex& a) const;
  // sum_{|alpha| = d} q_alpha z^alpha / alpha!
  Polynomial stratum(int d) const;
};

using CharFunction = std::function<cd(std::span<const cd>)>;

// least-squares fit of ln chi on a stencil (radii 0.02..0.1, 16 phases per
// mode) with Richardson refinement; modes <= 2, order <= 6
CumulantSet weyl_cumulants(const CharFunction& chi, int modes, int order, double radius = 0.1);
CumulantSet weyl_cumulants(const State& rho, int order);

// E_1 .. E_{r_max}; r_max <= 2
std::vector<Polynomial> edgeworth_polynomials(const CumulantSet& q, int r_max);

struct ResidualStat {
  double weighted = 0.0;    // sup |.| e^{(nu_min-1)|z|^2/4} n^{(r_max+1)/2}
  double unweighted = 0.0;  // sup |.|
};

PhaseGrid residual_grid(int n);
// single-mode; grid must be radial with radius <= 0.1 sqrt(n)
ResidualStat expansion_residual(const State& rho, int n, int r_max, const PhaseGrid& grid);
ResidualStat expansion_residual(const State& rho, int n, int r_max);

}  // namespace qclt
