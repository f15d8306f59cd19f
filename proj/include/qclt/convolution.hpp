#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qclt/fock.hpp"
#include "qclt/kernels.hpp"
#include "qclt/phase_space.hpp"

namespace qclt {

enum class Route { DiagonalInductive, CharPower, TensorOracle };

Route parse_route(const std::string& s);
std::string route_name(Route r);

// <j, N-j| U_eta |k, l> with U a_1 U^dag = sqrt(eta) a_1 - sqrt(1-eta) a_2
double bs_amplitude(int j, int k, int l, double eta);

// cached amplitude table for (eta, K)
std::shared_ptr<const kernels::BsTable> bs_kernel(double eta, int K);
void clear_kernel_cache();

// rho (x)_eta sigma truncated to cutoff (default: the larger input cutoff).
// CutoffTooSmall when more than 1e-9 of the retained mass leaves the cutoff.
DiagonalState convolve_pair(const DiagonalState& rho, const DiagonalState& sigma, double eta, int cutoff = -1);
DensityOperator convolve_pair(const DensityOperator& rho, const DensityOperator& sigma, double eta,
                              int cutoff = -1);

struct NfoldOptions {
  Route route = Route::DiagonalInductive;
  int cutoff = -1;  // default: input cutoff
  bool doubling = false;  // use rho^{2n} = rho^n (x)_{1/2} rho^n when n is a power of two
  PhaseGrid lattice = PhaseGrid::lattice(8.0, 0.05);
  RadialChar radial_char;  // analytic chi for heavy-tailed diagonal inputs
  double exact_mean = -1.0;  // mean photon number if known exactly
};

State nfold_symmetric(const State& rho, int n, const NfoldOptions& opts = {});

// rho^{(x)n} for every n in ns (sorted ascending); strict induction for the
// diagonal-inductive route, independent evaluations otherwise
void nfold_sequence(const State& rho, const std::vector<int>& ns, const NfoldOptions& opts,
                    const std::function<void(int, const State&)>& emit);

// brute two-mode reference: U built by exponentiating the generator in
// each photon-number sector; no truncation of intermediates
DensityOperator tensor_oracle_pair(const DensityOperator& rho, const DensityOperator& sigma, double eta);
// n <= 3, cutoff <= 12; output cropped to `cutoff` (default input cutoff)
DensityOperator tensor_oracle_nfold(const DensityOperator& rho, int n, int cutoff = -1);

}  // namespace qclt
