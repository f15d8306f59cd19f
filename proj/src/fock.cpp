#include "qclt/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qclt {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorKind::BadTrace: return "BadTrace";
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::NotCentered: return "NotCentered";
    case ErrorKind::UnsupportedCovariance: return "UnsupportedCovariance";
    case ErrorKind::UnsupportedModes: return "UnsupportedModes";
    case ErrorKind::UnphysicalCovariance: return "UnphysicalCovariance";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::QuadratureDivergence: return "QuadratureDivergence";
    case ErrorKind::RouteUnavailable: return "RouteUnavailable";
    case ErrorKind::InsufficientOrder: return "InsufficientOrder";
    case ErrorKind::DivergentMoment: return "DivergentMoment";
    case ErrorKind::NoValidDensity: return "NoValidDensity";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::FitIllConditioned: return "FitIllConditioned";
    case ErrorKind::InfiniteBeta: return "InfiniteBeta";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::NotOddPolynomial: return "NotOddPolynomial";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

bool Error::is_input_error() const {
  switch (kind_) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::ParseError:
    case ErrorKind::IoError:
    case ErrorKind::NonHermitian:
    case ErrorKind::NegativeEigenvalue:
    case ErrorKind::BadTrace:
    case ErrorKind::NotCentered:
    case ErrorKind::UnsupportedCovariance:
    case ErrorKind::UnsupportedModes:
    case ErrorKind::UnphysicalCovariance:
    case ErrorKind::RouteUnavailable:
    case ErrorKind::InsufficientOrder:
    case ErrorKind::DivergentMoment:
    case ErrorKind::NoValidDensity:
    case ErrorKind::NotOddPolynomial:
    case ErrorKind::InfiniteBeta:
      return true;
    default:
      return false;
  }
}

namespace {

void enumerate_total(int modes, int remaining, std::vector<int>& cur,
                     std::vector<std::vector<int>>& out) {
  int pos = static_cast<int>(cur.size());
  if (pos == modes - 1) {
    cur.push_back(remaining);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    cur.push_back(k);
    enumerate_total(modes, remaining - k, cur, out);
    cur.pop_back();
  }
}

}  // namespace

FockBasis::FockBasis(int modes, int cutoff, CutoffKind kind)
    : modes_(modes), cutoff_(cutoff), kind_(kind) {
  if (modes < 1) fail(ErrorKind::InvalidArgument, "modes must be >= 1");
  if (cutoff < 0) fail(ErrorKind::InvalidArgument, "cutoff must be >= 0");
  int max_total = kind == CutoffKind::Total ? cutoff : cutoff * modes;
  std::vector<int> cur;
  for (int n = 0; n <= max_total; ++n) {
    std::vector<std::vector<int>> level;
    enumerate_total(modes, n, cur, level);
    for (auto& k : level) {
      if (kind == CutoffKind::PerMode &&
          std::any_of(k.begin(), k.end(), [&](int v) { return v > cutoff; }))
        continue;
      lookup_[k] = states_.size();
      states_.push_back(k);
      totals_.push_back(n);
    }
  }
}

long FockBasis::index(const std::vector<int>& k) const {
  if (static_cast<int>(k.size()) != modes_) return -1;
  if (modes_ == 1) return (k[0] >= 0 && k[0] <= cutoff_) ? k[0] : -1;
  auto it = lookup_.find(k);
  return it == lookup_.end() ? -1 : static_cast<long>(it->second);
}

BasisPtr make_basis(int modes, int cutoff, CutoffKind kind) {
  return std::make_shared<const FockBasis>(modes, cutoff, kind);
}

std::vector<double> hermitian_eigenvalues(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + h.rows());
  return ev;
}

DensityOperator::DensityOperator(BasisPtr basis, Matrix mat, double trace_deficit)
    : basis_(std::move(basis)), mat_(std::move(mat)), trace_deficit_(trace_deficit) {
  auto n = static_cast<Eigen::Index>(basis_->size());
  if (mat_.rows() != n || mat_.cols() != n)
    fail(ErrorKind::InvalidArgument, "matrix size does not match basis dimension");
  if (trace_deficit < -1e-12 || trace_deficit > 1.0)
    fail(ErrorKind::InvalidArgument, "trace deficit out of range");
  double herm = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) fail(ErrorKind::NonHermitian, "max |rho - rho^dag| = " + std::to_string(herm));
  mat_ = 0.5 * (mat_ + mat_.adjoint());
  auto ev = hermitian_eigenvalues(mat_);
  if (!ev.empty() && ev.front() < -1e-10)
    fail(ErrorKind::NegativeEigenvalue, "min eigenvalue " + std::to_string(ev.front()));
  double tr = mat_.trace().real();
  if (std::abs(tr - (1.0 - trace_deficit)) > 1e-8)
    fail(ErrorKind::BadTrace, "trace " + std::to_string(tr) + " with deficit " +
                                  std::to_string(trace_deficit));
}

DensityOperator DensityOperator::unchecked(BasisPtr basis, Matrix mat, double trace_deficit) {
  DensityOperator d;
  d.basis_ = std::move(basis);
  d.mat_ = std::move(mat);
  d.trace_deficit_ = trace_deficit;
  return d;
}

bool DensityOperator::is_diagonal(double tol) const {
  Matrix off = mat_;
  off.diagonal().setZero();
  return off.size() == 0 || off.cwiseAbs().maxCoeff() <= tol;
}

double DiagonalState::retained_trace() const {
  return std::accumulate(probs.begin(), probs.end(), 0.0);
}

double DiagonalState::mean_photon_number() const {
  double s = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) s += static_cast<double>(k) * probs[k];
  return s + tail_first_moment;
}

DiagonalState make_diagonal(std::vector<double> probs, double tail_mass, double tail_first_moment) {
  if (probs.empty()) fail(ErrorKind::InvalidArgument, "empty probability vector");
  for (double p : probs)
    if (!(p >= -1e-12)) fail(ErrorKind::NegativeEigenvalue, "negative Fock weight");
  if (tail_mass < -1e-12) fail(ErrorKind::InvalidArgument, "negative tail mass");
  DiagonalState d{std::move(probs), std::max(tail_mass, 0.0), std::max(tail_first_moment, 0.0)};
  double tr = d.retained_trace() + d.tail_mass;
  if (std::abs(tr - 1.0) > 1e-8) fail(ErrorKind::BadTrace, "total probability " + std::to_string(tr));
  return d;
}

int state_modes(const State& s) {
  return std::holds_alternative<DiagonalState>(s) ? 1 : std::get<DensityOperator>(s).modes();
}

int state_cutoff(const State& s) {
  return std::holds_alternative<DiagonalState>(s) ? std::get<DiagonalState>(s).cutoff()
                                                  : std::get<DensityOperator>(s).cutoff();
}

DensityOperator build_density(int modes, int cutoff, const Matrix& entries, double trace_deficit) {
  return DensityOperator(make_basis(modes, cutoff), entries, trace_deficit);
}

DensityOperator fock_density(int cutoff, int k) {
  if (k < 0 || k > cutoff) fail(ErrorKind::CutoffTooSmall, "Fock level above cutoff");
  Matrix m = Matrix::Zero(cutoff + 1, cutoff + 1);
  m(k, k) = 1.0;
  return DensityOperator(make_basis(1, cutoff), m);
}

DensityOperator pure_density(int cutoff, const Eigen::VectorXcd& amplitudes) {
  if (amplitudes.size() > cutoff + 1) fail(ErrorKind::CutoffTooSmall, "amplitudes exceed cutoff");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(cutoff + 1);
  v.head(amplitudes.size()) = amplitudes;
  double nrm = v.norm();
  if (nrm == 0.0) fail(ErrorKind::InvalidArgument, "zero vector");
  v /= nrm;
  return DensityOperator(make_basis(1, cutoff), v * v.adjoint());
}

DensityOperator to_density(const DiagonalState& d) {
  int K = d.cutoff();
  Matrix m = Matrix::Zero(K + 1, K + 1);
  for (int k = 0; k <= K; ++k) m(k, k) = d.probs[k];
  return DensityOperator(make_basis(1, K), m, d.tail_mass);
}

DiagonalState to_diagonal(const DensityOperator& rho) {
  if (rho.modes() != 1) fail(ErrorKind::UnsupportedModes, "diagonal form is single-mode");
  if (!rho.is_diagonal(1e-12)) fail(ErrorKind::InvalidArgument, "state is not Fock-diagonal");
  DiagonalState d;
  d.probs.resize(rho.cutoff() + 1);
  for (int k = 0; k <= rho.cutoff(); ++k) d.probs[k] = std::max(0.0, rho.matrix()(k, k).real());
  d.tail_mass = rho.trace_deficit();
  d.tail_first_moment = d.tail_mass * (rho.cutoff() + 1);
  return d;
}

DiagonalState fock_diagonal(int cutoff, int k) {
  if (k < 0 || k > cutoff) fail(ErrorKind::CutoffTooSmall, "Fock level above cutoff");
  DiagonalState d;
  d.probs.assign(cutoff + 1, 0.0);
  d.probs[k] = 1.0;
  return d;
}

double trace_kept(const DensityOperator& rho, int n) {
  double s = 0.0;
  for (std::size_t i = 0; i < rho.basis().size(); ++i)
    if (rho.basis().total(i) <= n) s += rho.matrix()(i, i).real();
  return s;
}

double trace_kept(const DiagonalState& rho, int n) {
  double s = 0.0;
  for (int k = 0; k <= std::min(n, rho.cutoff()); ++k) s += rho.probs[k];
  return s;
}

DensityOperator truncate(const DensityOperator& rho, int n) {
  if (n < 0) fail(ErrorKind::InvalidArgument, "negative truncation level");
  if (n >= rho.cutoff() && rho.basis().kind() == CutoffKind::Total) {
    return DensityOperator::unchecked(rho.basis_ptr(), rho.matrix() / rho.matrix().trace().real());
  }
  auto nb = make_basis(rho.modes(), n, CutoffKind::Total);
  FockOperator e = embed(rho.op(), nb);
  double tr = e.mat.trace().real();
  if (tr <= 0.0) fail(ErrorKind::CutoffTooSmall, "no weight below truncation level");
  return DensityOperator(nb, e.mat / tr);
}

DiagonalState truncate(const DiagonalState& rho, int n) {
  int K = std::min(n, rho.cutoff());
  DiagonalState d;
  d.probs.assign(rho.probs.begin(), rho.probs.begin() + K + 1);
  double tr = d.retained_trace();
  if (tr <= 0.0) fail(ErrorKind::CutoffTooSmall, "no weight below truncation level");
  for (double& p : d.probs) p /= tr;
  return d;
}

FockOperator embed(const FockOperator& op, const BasisPtr& target) {
  if (op.basis->modes() != target->modes())
    fail(ErrorKind::InvalidArgument, "embed between different mode counts");
  auto n = static_cast<Eigen::Index>(target->size());
  FockOperator out{target, Matrix::Zero(n, n)};
  std::vector<long> map(op.basis->size());
  for (std::size_t i = 0; i < op.basis->size(); ++i) map[i] = target->index(op.basis->state(i));
  for (std::size_t i = 0; i < op.basis->size(); ++i) {
    if (map[i] < 0) continue;
    for (std::size_t j = 0; j < op.basis->size(); ++j)
      if (map[j] >= 0) out.mat(map[i], map[j]) = op.mat(i, j);
  }
  return out;
}

MomentValue moment(const State& s, double kappa) {
  MomentValue mv;
  mv.order = kappa;
  if (auto* d = std::get_if<DiagonalState>(&s)) {
    for (std::size_t k = 0; k < d->probs.size(); ++k)
      mv.value += d->probs[k] * std::pow(static_cast<double>(k) + 1.0, kappa / 2.0);
    if (d->tail_mass > 0.0) {
      if (kappa <= 2.0)
        mv.tail_bound =
            d->tail_mass * std::pow(d->tail_first_moment / d->tail_mass + 1.0, kappa / 2.0);
      else
        mv.tail_bound = std::numeric_limits<double>::infinity();
    }
    return mv;
  }
  const auto& rho = std::get<DensityOperator>(s);
  int m = rho.modes();
  for (std::size_t i = 0; i < rho.basis().size(); ++i)
    mv.value += rho.matrix()(i, i).real() * std::pow(rho.basis().total(i) + m, kappa / 2.0);
  if (rho.trace_deficit() > 0.0) mv.tail_bound = std::numeric_limits<double>::infinity();
  return mv;
}

namespace {

// index of k + delta_j e_j (+ delta_k e_k), or -1
long shifted(const FockBasis& b, std::size_t i, int j, int dj, int k = -1, int dk = 0) {
  std::vector<int> s = b.state(i);
  s[j] += dj;
  if (k >= 0) s[k] += dk;
  for (int v : s)
    if (v < 0) return -1;
  return b.index(s);
}

}  // namespace

cd expect_a(const DensityOperator& rho, int j) {
  // tr(rho a) = sum_l rho_{l', l} sqrt(l_j), l' = l - e_j
  const auto& b = rho.basis();
  cd s = 0.0;
  for (std::size_t l = 0; l < b.size(); ++l) {
    int lj = b.state(l)[j];
    if (lj == 0) continue;
    long i = shifted(b, l, j, -1);
    if (i >= 0) s += rho.matrix()(l, i) * std::sqrt(static_cast<double>(lj));
  }
  return s;
}

cd expect_aa(const DensityOperator& rho, int j, int k) {
  const auto& b = rho.basis();
  cd s = 0.0;
  for (std::size_t l = 0; l < b.size(); ++l) {
    std::vector<int> st = b.state(l);
    double f = std::sqrt(static_cast<double>(st[k]));
    st[k] -= 1;
    if (st[k] < 0) continue;
    f *= std::sqrt(static_cast<double>(st[j]));
    st[j] -= 1;
    if (st[j] < 0) continue;
    long i = b.index(st);
    if (i >= 0) s += rho.matrix()(l, i) * f;
  }
  return s;
}

cd expect_ada(const DensityOperator& rho, int j, int k) {
  const auto& b = rho.basis();
  cd s = 0.0;
  for (std::size_t l = 0; l < b.size(); ++l) {
    std::vector<int> st = b.state(l);
    double f = std::sqrt(static_cast<double>(st[k]));
    st[k] -= 1;
    if (st[k] < 0) continue;
    st[j] += 1;
    f *= std::sqrt(static_cast<double>(st[j]));
    long i = b.index(st);
    if (i >= 0) s += rho.matrix()(l, i) * f;
  }
  return s;
}

RVector first_moments(const State& s) {
  int m = state_modes(s);
  RVector d = RVector::Zero(2 * m);
  if (auto* rho = std::get_if<DensityOperator>(&s)) {
    for (int j = 0; j < m; ++j) {
      cd a = expect_a(*rho, j);
      d(2 * j) = std::sqrt(2.0) * a.real();
      d(2 * j + 1) = std::sqrt(2.0) * a.imag();
    }
  }
  return d;
}

RMatrix covariance(const State& s) {
  if (auto* d = std::get_if<DiagonalState>(&s)) {
    double tr = d->retained_trace() + d->tail_mass;
    double v = 2.0 * d->mean_photon_number() / tr + 1.0;
    return v * RMatrix::Identity(2, 2);
  }
  const auto& rho = std::get<DensityOperator>(s);
  int m = rho.modes();
  double tr = rho.matrix().trace().real();
  // b_mu = a_mu for mu < m, a^dag_{mu-m} otherwise
  Matrix S(2 * m, 2 * m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      cd aa = expect_aa(rho, j, k) / tr;
      cd ada_kj = expect_ada(rho, k, j) / tr;  // <a_k^dag a_j>
      cd ada_jk = expect_ada(rho, j, k) / tr;
      S(j, k) = 2.0 * aa;
      S(m + j, m + k) = 2.0 * std::conj(aa);
      S(j, m + k) = 2.0 * ada_kj + (j == k ? 1.0 : 0.0);
      S(m + j, k) = 2.0 * ada_jk + (j == k ? 1.0 : 0.0);
    }
  Matrix C = Matrix::Zero(2 * m, 2 * m);
  const double r = 1.0 / std::sqrt(2.0);
  const cd I(0.0, 1.0);
  for (int j = 0; j < m; ++j) {
    C(2 * j, j) = r;
    C(2 * j, m + j) = r;
    C(2 * j + 1, j) = -I * r;
    C(2 * j + 1, m + j) = I * r;
  }
  Matrix G = C * S * C.transpose();
  RVector d = first_moments(s) / tr;
  RMatrix g = G.real() - 2.0 * d * d.transpose();
  return 0.5 * (g + g.transpose());
}

double schatten_norm(const FockOperator& t, int p) {
  if (p < 1) fail(ErrorKind::InvalidArgument, "Schatten index must be >= 1");
  if (p == 2) return t.mat.norm();
  Eigen::BDCSVD<Matrix> svd(t.mat);
  const auto& sv = svd.singularValues();
  if (p == 1) return sv.sum();
  double s = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) s += std::pow(sv(i), p);
  return std::pow(s, 1.0 / p);
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  BasisPtr target = a.basis().cutoff() >= b.basis().cutoff() ? a.basis_ptr() : b.basis_ptr();
  Matrix diff = embed(a.op(), target).mat - embed(b.op(), target).mat;
  double s = 0.0;
  for (double e : hermitian_eigenvalues(diff)) s += std::abs(e);
  return s + std::abs(a.trace_deficit() - b.trace_deficit());
}

double trace_distance(const DiagonalState& a, const DiagonalState& b) {
  std::size_t n = std::max(a.probs.size(), b.probs.size());
  double s = 0.0, ta = a.tail_mass, tb = b.tail_mass;
  for (std::size_t k = 0; k < n; ++k) {
    double pa = k < a.probs.size() ? a.probs[k] : 0.0;
    double pb = k < b.probs.size() ? b.probs[k] : 0.0;
    s += std::abs(pa - pb);
  }
  return s + std::abs(ta - tb);
}

double hs_distance(const DiagonalState& a, const DiagonalState& b) {
  std::size_t n = std::max(a.probs.size(), b.probs.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double pa = k < a.probs.size() ? a.probs[k] : 0.0;
    double pb = k < b.probs.size() ? b.probs[k] : 0.0;
    s += (pa - pb) * (pa - pb);
  }
  return std::sqrt(s);
}

namespace {
double xlogx(double p) { return p > 1e-300 ? p * std::log(p) : 0.0; }
}  // namespace

double von_neumann_entropy(const State& s) {
  double h = 0.0;
  if (auto* d = std::get_if<DiagonalState>(&s)) {
    for (double p : d->probs)
      if (p > 1e-15) h -= xlogx(p);
    return h;
  }
  for (double e : hermitian_eigenvalues(std::get<DensityOperator>(s).matrix()))
    if (e > 1e-15) h -= xlogx(e);
  return h;
}

double relative_entropy(const DiagonalState& rho, const DiagonalState& sigma) {
  double d = 0.0;
  for (std::size_t k = 0; k < rho.probs.size(); ++k) {
    double p = rho.probs[k];
    if (p <= 1e-300) continue;
    double q = k < sigma.probs.size() ? sigma.probs[k] : 0.0;
    if (q <= 0.0) {
      if (p > 1e-12) fail(ErrorKind::SupportViolation, "rho has weight outside supp sigma");
      continue;
    }
    d += p * (std::log(p) - std::log(q));
  }
  return d;
}

double relative_entropy_to_thermal(const DiagonalState& rho, double nu) {
  if (!(nu >= 1.0)) fail(ErrorKind::InvalidArgument, "nu must be >= 1");
  double x = (nu - 1.0) / (nu + 1.0);
  double d = 0.0;
  if (x == 0.0) {
    for (std::size_t k = 1; k < rho.probs.size(); ++k)
      if (rho.probs[k] > 1e-12) fail(ErrorKind::SupportViolation, "vacuum reference");
    return -std::log(rho.probs[0]);
  }
  double l1 = std::log1p(-x), lx = std::log(x);
  for (std::size_t k = 0; k < rho.probs.size(); ++k) {
    double p = rho.probs[k];
    if (p <= 1e-300) continue;
    d += p * (std::log(p) - l1 - static_cast<double>(k) * lx);
  }
  // log-sum bound on the unretained part; exact when the tail is geometric with ratio x
  double t = rho.tail_mass;
  if (t > 1e-300) d += t * (std::log(t) - static_cast<double>(rho.probs.size()) * lx);
  return d;
}

double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.modes() != sigma.modes()) fail(ErrorKind::InvalidArgument, "mode count mismatch");
  BasisPtr target = rho.cutoff() >= sigma.cutoff() ? rho.basis_ptr() : sigma.basis_ptr();
  Matrix r = embed(rho.op(), target).mat;
  Matrix s = embed(sigma.op(), target).mat;
  double d = 0.0;
  for (double e : hermitian_eigenvalues(r))
    if (e > 1e-15) d += xlogx(e);
  DensityOperator sd = DensityOperator::unchecked(target, s);
  if (sd.is_diagonal(0.0)) {
    for (Eigen::Index k = 0; k < s.rows(); ++k) {
      double w = r(k, k).real();
      double q = s(k, k).real();
      if (q <= 0.0) {
        if (w > 1e-12) fail(ErrorKind::SupportViolation, "rho has weight outside supp sigma");
        continue;
      }
      d -= w * std::log(q);
    }
    return d;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.adjoint()));
  const Matrix& V = es.eigenvectors();
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double mu = es.eigenvalues()(i);
    double w = (V.col(i).adjoint() * r * V.col(i))(0, 0).real();
    if (mu <= 0.0) {
      if (w > 1e-12) fail(ErrorKind::SupportViolation, "rho has weight outside supp sigma");
      continue;
    }
    d -= w * std::log(mu);
  }
  return d;
}

Matrix displacement_block(cd z, int cutoff) {
  int K = cutoff;
  double u = std::norm(z);
  if (u == 0.0) return Matrix::Identity(K + 1, K + 1);
  Matrix D(K + 1, K + 1);
  double arg = std::arg(z);
  // f_n = sqrt(n!/(n+d)!) u^{d/2} e^{-u/2} L_n^{(d)}(u), so <n+d|D_z|n> = e^{i d arg z} f_n
  for (int d = 0; d <= K; ++d) {
    cd below = std::polar(1.0, d * arg);
    cd above = (d % 2 ? -1.0 : 1.0) * std::conj(below);
    double prev = 0.0;
    double cur = std::exp(0.5 * d * std::log(u) - 0.5 * std::lgamma(d + 1.0) - 0.5 * u);
    for (int n = 0; n + d <= K; ++n) {
      D(n + d, n) = below * cur;
      if (d > 0) D(n, n + d) = above * cur;
      double next = ((2.0 * n + 1.0 + d - u) * cur - std::sqrt(n * (n + static_cast<double>(d))) * prev) /
                    std::sqrt((n + 1.0) * (n + 1.0 + d));
      prev = cur;
      cur = next;
    }
  }
  return D;
}

Matrix displacement_matrix(std::span<const cd> z, const FockBasis& basis) {
  int m = basis.modes();
  if (static_cast<int>(z.size()) != m) fail(ErrorKind::InvalidArgument, "one displacement per mode");
  int K = basis.kind() == CutoffKind::Total ? basis.cutoff() : basis.cutoff();
  std::vector<Matrix> blocks;
  for (int j = 0; j < m; ++j) blocks.push_back(displacement_block(z[j], K));
  if (m == 1) return blocks[0];
  auto n = static_cast<Eigen::Index>(basis.size());
  Matrix D(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      cd v = 1.0;
      const auto& si = basis.state(i);
      const auto& sk = basis.state(k);
      for (int j = 0; j < m; ++j) v *= blocks[j](si[j], sk[j]);
      D(i, k) = v;
    }
  return D;
}

CenterResult center(const DensityOperator& rho, double tol) {
  int m = rho.modes();
  double tr = rho.matrix().trace().real();
  std::vector<cd> z(m);
  double zmax = 0.0;
  for (int j = 0; j < m; ++j) {
    z[j] = expect_a(rho, j) / tr;
    zmax = std::max(zmax, std::abs(z[j]));
  }
  if (zmax < 1e-14) return {rho, z};
  int K = rho.cutoff();
  int head = static_cast<int>(std::ceil(4.0 * zmax * zmax + 4.0 * zmax * std::sqrt(K + 1.0))) + 6;
  for (int attempt = 0; attempt < 4; ++attempt, head *= 2) {
    auto big = make_basis(m, K + head);
    std::vector<cd> mz(m);
    for (int j = 0; j < m; ++j) mz[j] = -z[j];
    Matrix D = displacement_matrix(mz, *big);
    Matrix r = embed(rho.op(), big).mat;
    Matrix out = D * r * D.adjoint();
    double lost = rho.matrix().trace().real() - out.trace().real();
    if (lost <= tol) {
      DensityOperator res(big, 0.5 * (out + out.adjoint()),
                          std::max(0.0, rho.trace_deficit() + lost));
      return {res, z};
    }
  }
  fail(ErrorKind::CutoffTooSmall, "centering displacement leaves the truncated space");
}

}  // namespace qclt
