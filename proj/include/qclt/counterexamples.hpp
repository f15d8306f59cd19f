#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qclt/fock.hpp"
#include "qclt/phase_space.hpp"

namespace qclt {

enum class MixtureKind { Trace, Relent, PointMass };

// w(s) = c0 on [1/2, 1) and a (p-1) / s^p on [1, inf); PointMass is
// delta(s - point) and ignores the other fields
struct MixtureDensity {
  MixtureKind kind = MixtureKind::Trace;
  double theta = 0.5;
  double tail_exponent = 3.5;
  double a = 0.0;
  double plateau = 0.0;
  double point = 1.0;

  double operator()(double s) const;
};

MixtureKind parse_mixture_kind(const std::string& s);
std::string mixture_kind_name(MixtureKind k);

// thermal family tau_s with nu = 4 s^2
double beta_s(double s);
double s_n(double s, int n);
// <k|tau_s|k>
double tau_s_weight(double s, int k);

MixtureDensity plateau_solve(double p, double theta);
MixtureDensity mixture_family(MixtureKind kind, double theta);
MixtureDensity point_mass(double s);

// int w(s) s^kappa ds; nullopt when the integral diverges (kappa >= p - 1)
std::optional<double> w_moment(const MixtureDensity& w, double kappa);

// int w(s) tau_s ds on levels 0..K; the remainder is carried as tail mass
DiagonalState mixture_diag(const MixtureDensity& w, int cutoff);
// chi(r) = int w(s) exp(-2 s^2 r^2) ds
double mixture_char(const MixtureDensity& w, double r);
RadialChar mixture_radial_char(const MixtureDensity& w);
// exact mean photon number int w(s) (4 s^2 - 1)/2 ds
double mixture_mean(const MixtureDensity& w);

struct Lemma72Result {
  std::vector<double> reference;  // signed diagonal
  double residual = 0.0;          // max_k |<k|rho^n|k> - reference_k| over k <= kmax
};
// tau_1 + n int w(s) (tau_{s_n} - tau_1) ds on levels 0..K
std::vector<double> lemma72_reference(const MixtureDensity& w, int n, int cutoff);
// compares against rho^n from the char-power route; kmax < 0 means all levels
Lemma72Result lemma72_residual(const MixtureDensity& w, int n, int cutoff, int kmax = -1);

double h_eval(double t);
double h_threshold_search(double step = 1e-3, double t_max = 100.0);

}  // namespace qclt
