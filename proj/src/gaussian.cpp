#include "qclt/gaussian.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "qclt/io.hpp"

namespace qclt {

double nu_from_beta(double beta) {
  if (!(beta > 0.0)) fail(ErrorKind::InvalidArgument, "beta must be > 0");
  if (std::isinf(beta)) return 1.0;
  return 1.0 / std::tanh(0.5 * beta);
}

double beta_from_nu(double nu) {
  if (!(nu >= 1.0)) fail(ErrorKind::InvalidArgument, "nu must be >= 1");
  if (nu == 1.0) return std::numeric_limits<double>::infinity();
  return std::log((nu + 1.0) / (nu - 1.0));
}

ThermalSpec ThermalSpec::from_nu(std::vector<double> nu) {
  ThermalSpec t;
  for (double v : nu) t.beta.push_back(beta_from_nu(v));
  return t;
}

ThermalSpec ThermalSpec::from_beta(std::vector<double> beta) {
  for (double b : beta)
    if (!(b > 0.0)) fail(ErrorKind::InvalidArgument, "beta must be > 0");
  return ThermalSpec{std::move(beta)};
}

double ThermalSpec::nu(int j) const { return nu_from_beta(beta[j]); }
double ThermalSpec::q(int j) const { return std::exp(-beta[j]); }

double ThermalSpec::log_weight(const std::vector<int>& k) const {
  double s = 0.0;
  for (int j = 0; j < modes(); ++j) {
    if (std::isinf(beta[j])) {
      if (k[j] != 0) return -std::numeric_limits<double>::infinity();
      continue;
    }
    s += std::log1p(-std::exp(-beta[j])) - beta[j] * k[j];
  }
  return s;
}

DiagonalState thermal_diagonal(double nu, int cutoff) {
  double x = (nu - 1.0) / (nu + 1.0);
  DiagonalState d;
  d.probs.resize(cutoff + 1);
  double lx = x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
  double l1 = std::log1p(-x);
  for (int k = 0; k <= cutoff; ++k) d.probs[k] = k == 0 ? 1.0 - x : std::exp(l1 + k * lx);
  if (x > 0.0) {
    double tail = std::exp((cutoff + 1) * lx);
    d.tail_mass = tail;
    d.tail_first_moment = tail * ((cutoff + 1) + x / (1.0 - x));
  }
  return d;
}

int thermal_cutoff_for(double nu, double tail_tol) {
  double x = (nu - 1.0) / (nu + 1.0);
  if (x <= 0.0) return 0;
  return std::max(0, static_cast<int>(std::ceil(std::log(tail_tol) / std::log(x))) - 1);
}

DensityOperator thermal_fock(const ThermalSpec& spec, int cutoff, double tail_tol) {
  auto basis = make_basis(spec.modes(), cutoff);
  auto n = static_cast<Eigen::Index>(basis->size());
  Matrix m = Matrix::Zero(n, n);
  double tr = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double w = std::exp(spec.log_weight(basis->state(i)));
    m(i, i) = w;
    tr += w;
  }
  double deficit = std::max(0.0, 1.0 - tr);
  if (deficit > tail_tol)
    fail(ErrorKind::CutoffTooSmall, "thermal tail " + std::to_string(deficit) + " above tolerance");
  return DensityOperator(basis, m, deficit);
}

cd gaussian_char(const GaussianSpec& g, std::span<const cd> z) {
  if (static_cast<int>(z.size()) != g.modes) fail(ErrorKind::InvalidArgument, "dimension mismatch");
  // Lambda zhat is real: sqrt2 (Im z_j, -Re z_j) per mode
  RVector v(2 * g.modes);
  for (int j = 0; j < g.modes; ++j) {
    v(2 * j) = std::sqrt(2.0) * z[j].imag();
    v(2 * j + 1) = -std::sqrt(2.0) * z[j].real();
  }
  double quad = v.dot(g.cov * v);
  double lin = g.mean.dot(v);
  return std::exp(cd(-0.25 * quad, lin));
}

double uncertainty_check(const RMatrix& gamma) {
  auto n = gamma.rows();
  Matrix h = gamma.cast<cd>();
  for (Eigen::Index j = 0; j + 1 < n; j += 2) {
    h(j, j + 1) += cd(0.0, 1.0);
    h(j + 1, j) -= cd(0.0, 1.0);
  }
  return hermitian_eigenvalues(h).front();
}

Williamson williamson_1mode(const RMatrix& gamma) {
  if (gamma.rows() != 2 || gamma.cols() != 2) fail(ErrorKind::UnsupportedModes, "single-mode only");
  double det = gamma.determinant();
  if (!(det > 0.0) || gamma(0, 0) <= 0.0) fail(ErrorKind::UnphysicalCovariance, "not positive definite");
  Williamson w;
  w.nu = std::sqrt(det);
  if (w.nu < 1.0 - 1e-9) fail(ErrorKind::UnphysicalCovariance, "symplectic eigenvalue below 1");
  RMatrix a = gamma / w.nu;
  a = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(a);
  double lo = es.eigenvalues()(0);
  RVector v = es.eigenvectors().col(0);
  w.r = -0.5 * std::log(lo);
  if (w.r < 1e-14) {
    w.r = 0.0;
    w.phi = 0.0;
  } else {
    w.phi = std::atan2(v(1), v(0));
  }
  RMatrix R(2, 2);
  R << std::cos(w.phi), -std::sin(w.phi), std::sin(w.phi), std::cos(w.phi);
  RMatrix Sq = RMatrix::Zero(2, 2);
  Sq(0, 0) = std::exp(-w.r);
  Sq(1, 1) = std::exp(w.r);
  w.S = R * Sq;
  return w;
}

Matrix gaussian_unitary_1mode(double r, double phi, int cutoff, int headroom) {
  int N = cutoff + headroom;
  Matrix a = Matrix::Zero(N + 1, N + 1);
  for (int k = 1; k <= N; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  Matrix a2 = a * a;
  // S(r) = exp(r (a^2 - a^dag^2) / 2) = exp(-i H), H = i r (a^2 - a^dag^2) / 2
  Matrix H = cd(0.0, 0.5 * r) * (a2 - a2.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.adjoint()));
  Eigen::VectorXcd ph(N + 1);
  for (int i = 0; i <= N; ++i) ph(i) = std::exp(cd(0.0, -es.eigenvalues()(i)));
  Matrix S = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  for (int k = 0; k <= N; ++k) S.row(k) *= std::exp(cd(0.0, phi * k));
  return S.topLeftCorner(cutoff + 1, cutoff + 1);
}

DensityOperator apply_gaussian_unitary(const DensityOperator& rho, double r, double phi,
                                       int out_cutoff, bool inverse) {
  if (rho.modes() != 1) fail(ErrorKind::UnsupportedModes, "single-mode only");
  int K = std::max(out_cutoff, rho.cutoff());
  Matrix U = gaussian_unitary_1mode(r, phi, K, 40 + static_cast<int>(20 * r));
  if (inverse) U.adjointInPlace();
  auto big = make_basis(1, K);
  Matrix in = embed(rho.op(), big).mat;
  Matrix out = U * in * U.adjoint();
  Matrix crop = out.topLeftCorner(out_cutoff + 1, out_cutoff + 1);
  crop = 0.5 * (crop + crop.adjoint());
  double deficit = std::max(0.0, 1.0 - crop.trace().real());
  return DensityOperator(make_basis(1, out_cutoff), crop, deficit);
}

GaussifyResult gaussify(const State& rho) {
  RVector d = first_moments(rho);
  if (d.size() > 0 && d.cwiseAbs().maxCoeff() > 1e-8)
    fail(ErrorKind::NotCentered, "first moments must vanish; call center() first");
  RMatrix g = covariance(rho);
  int m = state_modes(rho);
  GaussifyResult res;
  res.spec.modes = m;
  res.spec.mean = RVector::Zero(2 * m);
  res.spec.cov = g;

  if (auto* diag = std::get_if<DiagonalState>(&rho)) {
    double nu = g(0, 0);
    res.thermal = true;
    res.nu = {nu};
    int K = std::max(diag->cutoff(), std::min(thermal_cutoff_for(nu), 4096));
    res.state = thermal_diagonal(nu, K);
    return res;
  }
  const auto& dm = std::get<DensityOperator>(rho);
  double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  bool modewise = true;
  for (int i = 0; i < 2 * m; ++i)
    for (int j = 0; j < 2 * m; ++j) {
      if (i / 2 == j / 2 && i == j) continue;
      if (std::abs(g(i, j)) > 1e-8 * scale) modewise = false;
    }
  for (int j = 0; j < m; ++j)
    if (std::abs(g(2 * j, 2 * j) - g(2 * j + 1, 2 * j + 1)) > 1e-8 * scale) modewise = false;

  if (modewise) {
    res.thermal = true;
    std::vector<double> nu(m);
    int K = dm.cutoff();
    for (int j = 0; j < m; ++j) {
      nu[j] = 0.5 * (g(2 * j, 2 * j) + g(2 * j + 1, 2 * j + 1));
      if (nu[j] < 1.0 - 1e-9) fail(ErrorKind::UnphysicalCovariance, "nu below 1");
      nu[j] = std::max(nu[j], 1.0);
      K = std::max(K, thermal_cutoff_for(nu[j]));
    }
    res.nu = nu;
    ThermalSpec spec = ThermalSpec::from_nu(nu);
    for (;; K += 4) {
      try {
        res.state = thermal_fock(spec, K, 1e-11);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::CutoffTooSmall || K > 400) throw;
      }
    }
    return res;
  }
  if (m != 1) fail(ErrorKind::UnsupportedCovariance, "multi-mode Gaussification needs mode-wise thermal covariance");
  Williamson w = williamson_1mode(g);
  res.nu = {w.nu};
  int K = std::max(dm.cutoff(), thermal_cutoff_for(w.nu)) + static_cast<int>(std::ceil(8.0 * w.r * (w.nu + 1.0)));
  DensityOperator tau = thermal_fock(ThermalSpec::from_nu({w.nu}), std::max(thermal_cutoff_for(w.nu), 1), 1e-11);
  res.state = apply_gaussian_unitary(tau, w.r, w.phi, K);
  return res;
}

void write_gaussian(std::ostream& os, const GaussianSpec& g) {
  os << g.modes << '\n';
  for (int i = 0; i < 2 * g.modes; ++i) os << (i ? " " : "") << fmt_double(g.mean(i));
  os << '\n';
  for (int i = 0; i < 2 * g.modes; ++i) {
    for (int j = 0; j < 2 * g.modes; ++j) os << (j ? " " : "") << fmt_double(g.cov(i, j));
    os << '\n';
  }
}

GaussianSpec read_gaussian(std::istream& is) {
  GaussianSpec g;
  if (!(is >> g.modes) || g.modes < 1) fail(ErrorKind::ParseError, "bad mode count");
  int n = 2 * g.modes;
  g.mean.resize(n);
  g.cov.resize(n, n);
  for (int i = 0; i < n; ++i)
    if (!(is >> g.mean(i))) fail(ErrorKind::ParseError, "bad mean vector");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(is >> g.cov(i, j))) fail(ErrorKind::ParseError, "bad covariance row");
  if ((g.cov - g.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorKind::ParseError, "covariance not symmetric");
  return g;
}

}  // namespace qclt
