#pragma once

#include <map>
#include <vector>

#include "qclt/edgeworth.hpp"
#include "qclt/fock.hpp"
#include "qclt/gaussian.hpp"

namespace qclt {

// E(z) with only odd-degree terms and E(-z) = -E(z) = conj(E(z))
class OddPolynomial {
 public:
  OddPolynomial() = default;
  explicit OddPolynomial(Polynomial p);  // validates, NotOddPolynomial
  static OddPolynomial zero(int modes);
  const Polynomial& poly() const { return p_; }
  int modes() const { return p_.modes; }
  bool empty() const { return p_.is_zero(); }

 private:
  Polynomial p_{1, {}};
};

// Delta with chi_Delta = chi_tau E written as sum e_{pq} a^dag^p a^q tau;
// keys are (p_1, q_1, ..., p_m, q_m)
std::map<MultiIndex, cd> ladder_expansion(const ThermalSpec& tau, const OddPolynomial& E);

struct BoundConstants {
  double nu_beta = 0.0;
  double eta_beta = 0.0;
  double zeta = 0.0;
  double c_prime = 0.0;
  double c_double_prime = 0.0;
  double m_beta_e = 0.0;
  double s_tau = 0.0;
  double c_final = 0.0;
};

BoundConstants bound_constants(const ThermalSpec& tau, const OddPolynomial& E);

// tau + alpha Delta on levels 0..cutoff (single- or multi-mode)
FockOperator tau_alpha(const ThermalSpec& tau, const OddPolynomial& E, double alpha, int cutoff);

// min over retained k of RHS_k - LHS_k
double pointwise_bound_check(const State& rho, const ThermalSpec& tau);

struct TruncatedRhs {
  double rhs = 0.0;
  double relent = 0.0;
  bool holds = false;
};
TruncatedRhs truncated_rhs(const State& rho, const ThermalSpec& tau, double t);

// root of t - m ln(t+1) = ln(1/eps); 0 when eps >= 1
double balancing_t(double eps, int m);

// D(rho || tau), tail-corrected for diagonal states
double relent_to_thermal(const State& rho, const ThermalSpec& tau);

struct RelentBound {
  double relent = 0.0;
  double eps = 0.0;  // ||(rho - tau_alpha)(N+m)^{(m+3)/2}||_2
  double bound = 0.0;
  double t_star = 0.0;
  bool holds = false;
  BoundConstants constants;
};
RelentBound relent_upper(const State& rho, const ThermalSpec& tau, const OddPolynomial& E, double alpha);

struct NonGaussianity {
  double d_g = 0.0;
  double bound = 0.0;
  bool holds = false;
  double nu = 0.0;
  RelentBound detail;
};
NonGaussianity non_gaussianity_upper(const State& rho);

struct TailSums {
  double f_exact = 0.0, f_bound = 0.0, g_exact = 0.0, g_bound = 0.0;
};
TailSums appendix_tail_sums(const std::vector<double>& beta, double t);

}  // namespace qclt
