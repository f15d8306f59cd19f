#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "qclt/errors.hpp"

namespace qclt {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

enum class CutoffKind { Total, PerMode };

// Multi-mode Fock basis truncated either by total photon number |k| <= K
// or mode-wise k_j <= K. States are ordered by |k|, then lexicographically
// descending in (k_1, ..., k_m).
class FockBasis {
 public:
  FockBasis(int modes, int cutoff, CutoffKind kind = CutoffKind::Total);

  int modes() const { return modes_; }
  int cutoff() const { return cutoff_; }
  CutoffKind kind() const { return kind_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<int>& state(std::size_t i) const { return states_[i]; }
  int total(std::size_t i) const { return totals_[i]; }
  // -1 when k is outside the truncation
  long index(const std::vector<int>& k) const;
  bool same_as(const FockBasis& o) const {
    return modes_ == o.modes_ && cutoff_ == o.cutoff_ && kind_ == o.kind_;
  }

 private:
  int modes_;
  int cutoff_;
  CutoffKind kind_;
  std::vector<std::vector<int>> states_;
  std::vector<int> totals_;
  std::map<std::vector<int>, std::size_t> lookup_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;
BasisPtr make_basis(int modes, int cutoff, CutoffKind kind = CutoffKind::Total);

// Trace-class operator on a truncated basis. No positivity or trace
// constraints; used for differences, perturbations and ladder products.
struct FockOperator {
  BasisPtr basis;
  Matrix mat;
};

class DensityOperator {
 public:
  // validated: Hermitian within 1e-10, eigenvalues >= -1e-10,
  // trace within 1e-8 of 1 - trace_deficit
  DensityOperator(BasisPtr basis, Matrix mat, double trace_deficit = 0.0);

  static DensityOperator unchecked(BasisPtr basis, Matrix mat, double trace_deficit = 0.0);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const Matrix& matrix() const { return mat_; }
  double trace_deficit() const { return trace_deficit_; }
  int modes() const { return basis_->modes(); }
  int cutoff() const { return basis_->cutoff(); }
  FockOperator op() const { return {basis_, mat_}; }
  bool is_diagonal(double tol = 1e-14) const;

 private:
  DensityOperator() = default;
  BasisPtr basis_;
  Matrix mat_;
  double trace_deficit_ = 0.0;
};

// Single-mode Fock-diagonal state. tail_mass and tail_first_moment describe
// the part above the cutoff: sum_{k>K} p_k and sum_{k>K} k p_k.
struct DiagonalState {
  std::vector<double> probs;
  double tail_mass = 0.0;
  double tail_first_moment = 0.0;

  int cutoff() const { return static_cast<int>(probs.size()) - 1; }
  double retained_trace() const;
  double mean_photon_number() const;
};

DiagonalState make_diagonal(std::vector<double> probs, double tail_mass = 0.0,
                            double tail_first_moment = 0.0);

using State = std::variant<DensityOperator, DiagonalState>;

int state_modes(const State& s);
int state_cutoff(const State& s);

// construction helpers
DensityOperator build_density(int modes, int cutoff, const Matrix& entries,
                              double trace_deficit = 0.0);
DensityOperator fock_density(int cutoff, int k);
DensityOperator pure_density(int cutoff, const Eigen::VectorXcd& amplitudes);
DensityOperator to_density(const DiagonalState& d);
DiagonalState to_diagonal(const DensityOperator& rho);
DiagonalState fock_diagonal(int cutoff, int k);

// projection onto |k| <= n followed by renormalisation
DensityOperator truncate(const DensityOperator& rho, int n);
DiagonalState truncate(const DiagonalState& rho, int n);
double trace_kept(const DensityOperator& rho, int n);
double trace_kept(const DiagonalState& rho, int n);

// zero-padding (or cropping) into another basis of the same mode count
FockOperator embed(const FockOperator& op, const BasisPtr& target);

struct MomentValue {
  double order = 0.0;
  double value = 0.0;  // sum over retained levels
  double tail_bound = 0.0;  // bound on the unretained part; inf when unknown
};

// M_kappa = tr(rho (N + m)^{kappa/2})
MomentValue moment(const State& rho, double kappa);

// (<x_1>, <p_1>, ..., <x_m>, <p_m>)
RVector first_moments(const State& rho);
// anti-commutator convention, vacuum -> identity
RMatrix covariance(const State& rho);

// <a_j>, <a_j a_k>, <a_j^dag a_k>, exact on the truncated support
cd expect_a(const DensityOperator& rho, int j);
cd expect_aa(const DensityOperator& rho, int j, int k);
cd expect_ada(const DensityOperator& rho, int j, int k);

double schatten_norm(const FockOperator& t, int p);
double trace_distance(const DensityOperator& a, const DensityOperator& b);
double trace_distance(const DiagonalState& a, const DiagonalState& b);
double hs_distance(const DiagonalState& a, const DiagonalState& b);

double von_neumann_entropy(const State& rho);
double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);
double relative_entropy(const DiagonalState& rho, const DiagonalState& sigma);
// D(rho || thermal(nu)) including the first-moment tail correction
double relative_entropy_to_thermal(const DiagonalState& rho, double nu);

// single-mode block <i|D_z|j>, i,j <= cutoff
Matrix displacement_block(cd z, int cutoff);
// D_z on a multi-mode basis, z has one entry per mode
Matrix displacement_matrix(std::span<const cd> z, const FockBasis& basis);

struct CenterResult {
  DensityOperator state;
  std::vector<cd> shift;
};
// D_z^dag rho D_z with z = <a>; the result lives on an enlarged cutoff
CenterResult center(const DensityOperator& rho, double tol = 1e-10);

std::vector<double> hermitian_eigenvalues(const Matrix& m);

}  // namespace qclt
