#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qclt/fock.hpp"
#include "qclt/special.hpp"

namespace qclt {

using RadialChar = std::function<double(double)>;  // chi(r), phase-invariant states

// Single-mode quadrature grid: a square lattice [-R, R]^2 with step h, or
// Gauss-Legendre panels in r for phase-invariant integrands.
struct PhaseGrid {
  enum class Kind { Lattice, Radial };
  Kind kind = Kind::Lattice;
  double radius = 8.0;
  double step = 0.05;   // lattice spacing, or radial panel width
  int order = 32;       // Gauss-Legendre points per radial panel

  static PhaseGrid lattice(double R, double h);
  static PhaseGrid radial(double R, double panel_width, int order = 32);
  // radial grid used for inverting to levels 0..K
  static PhaseGrid radial_for_cutoff(int K);

  std::vector<cd> lattice_points() const;  // x-major order
  int lattice_side() const;
  double cell_area() const { return step * step; }
  QuadRule radial_rule() const;
};

struct CharSamples {
  PhaseGrid grid;
  std::vector<cd> values;  // lattice order
};

cd char_fn(const FockOperator& t, std::span<const cd> z);
cd char_fn(const State& rho, std::span<const cd> z);
cd char_fn(const State& rho, cd z);
double char_fn_radial(const DiagonalState& d, double r);
RadialChar radial_char_of(const DiagonalState& d);

CharSamples sample_char(const std::function<cd(cd)>& f, const PhaseGrid& grid);
CharSamples sample_char(const State& rho, const PhaseGrid& grid);

// W(z) = (1/pi^2) int chi(w) exp(z conj(w) - conj(z) w) d^2w by lattice sum.
// GridTooCoarse if chi has not decayed to 1e-6 at the lattice edge.
std::vector<double> wigner_from_samples(const CharSamples& s, std::span<const cd> points);
struct WignerGrid {
  double half_width = 0.0;
  double step = 0.0;
  std::vector<double> values;  // x-major
  double normalisation = 0.0;  // step^2 sum W
};
// GridTooCoarse if the normalisation drifts from Re chi(0) by more than 1e-4
WignerGrid wigner_grid(const CharSamples& s, double half_width, double step);
// W(|z|) = (2/pi) int_0^inf r chi(r) J0(2|z| r) dr
double wigner_radial(const RadialChar& chi, double rho, const PhaseGrid& grid);

// | ||T||_2^2 - (1/pi) int |chi_T|^2 |
double plancherel_residual(const FockOperator& t, const PhaseGrid& grid);
double plancherel_residual(const State& rho, const PhaseGrid& grid);

// A^dag T A with A = a_1 ... a_m, on cutoff K + m
FockOperator ladder_sandwich(const FockOperator& t);
// sqrt((pi^2/6)^m int |chi_{A^dag T A}|^2); lattice quadrature for m = 1,
// Plancherel identity otherwise
double trace_norm_upper(const FockOperator& t, const PhaseGrid& grid);

// T = (1/pi) int chi(z) D_{-z} d^2z on levels 0..K; requires h <= pi/(4 sqrt K)
FockOperator invert_char(const CharSamples& s, int cutoff);

// p_j = 2 int_0^R r chi(r) exp(-r^2/2) L_j(r^2) dr with R = 8 + sqrt(K).
// Weights below -1e-9 raise QuadratureDivergence, smaller negatives are clipped.
// exact_mean (if >= 0) fixes tail_first_moment.
DiagonalState diagonal_from_radial_char(const RadialChar& chi, int cutoff, double exact_mean = -1.0);

}  // namespace qclt
