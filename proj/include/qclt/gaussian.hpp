#pragma once

#include <span>
#include <vector>

#include "qclt/fock.hpp"

namespace qclt {

struct GaussianSpec {
  int modes = 1;
  RVector mean;  // (x_1, p_1, ..., x_m, p_m)
  RMatrix cov;
};

// Product thermal state, one beta per mode (beta = inf is the vacuum).
struct ThermalSpec {
  std::vector<double> beta;

  static ThermalSpec from_nu(std::vector<double> nu);
  static ThermalSpec from_beta(std::vector<double> beta);
  int modes() const { return static_cast<int>(beta.size()); }
  double nu(int j) const;
  double q(int j) const;  // exp(-beta_j)
  // ln <k|tau|k> = sum_j ln(1 - q_j) - beta_j k_j
  double log_weight(const std::vector<int>& k) const;
};

double nu_from_beta(double beta);
double beta_from_nu(double nu);

DiagonalState thermal_diagonal(double nu, int cutoff);
int thermal_cutoff_for(double nu, double tail_tol = 1e-12);
// throws CutoffTooSmall when the truncated mass exceeds tail_tol
DensityOperator thermal_fock(const ThermalSpec& spec, int cutoff, double tail_tol = 1e-12);

struct GaussifyResult {
  GaussianSpec spec;
  State state = DiagonalState{};
  bool thermal = false;  // covariance is mode-wise nu_j I
  std::vector<double> nu;
};
// requires vanishing first moments (tol 1e-8)
GaussifyResult gaussify(const State& rho);

cd gaussian_char(const GaussianSpec& g, std::span<const cd> z);

// minimum eigenvalue of gamma + i Omega
double uncertainty_check(const RMatrix& gamma);

struct Williamson {
  double nu = 1.0;
  double r = 0.0;
  double phi = 0.0;
  RMatrix S;  // gamma = S (nu I) S^T
};
Williamson williamson_1mode(const RMatrix& gamma);

// U = exp(i phi N) S(r) on levels 0..cutoff; computed on an enlarged space
Matrix gaussian_unitary_1mode(double r, double phi, int cutoff, int headroom = 40);
// conjugate rho by U (or U^dag when inverse is set), output on cutoff out_cutoff
DensityOperator apply_gaussian_unitary(const DensityOperator& rho, double r, double phi,
                                       int out_cutoff, bool inverse = false);

void write_gaussian(std::ostream& os, const GaussianSpec& g);
GaussianSpec read_gaussian(std::istream& is);

}  // namespace qclt
