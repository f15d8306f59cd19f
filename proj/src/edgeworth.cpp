#include "qclt/edgeworth.hpp"

#include <cmath>
#include <numbers>

#include "qclt/gaussian.hpp"

namespace qclt {

using std::numbers::pi;

int degree(const MultiIndex& a) {
  int d = 0;
  for (int v : a) d += v;
  return d;
}

double factorial_weight(const MultiIndex& a) {
  double f = 1.0;
  for (int v : a) f *= std::tgamma(v + 1.0);
  return f;
}

cd Polynomial::operator()(std::span<const cd> z) const {
  cd s = 0.0;
  for (const auto& [a, c] : terms) {
    cd t = c;
    for (int j = 0; j < modes; ++j) {
      if (a[2 * j]) t *= std::pow(z[j], a[2 * j]);
      if (a[2 * j + 1]) t *= std::pow(std::conj(z[j]), a[2 * j + 1]);
    }
    s += t;
  }
  return s;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r = *this;
  for (const auto& [a, c] : o.terms) r.terms[a] += c;
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r{modes, {}};
  for (const auto& [a, c] : terms)
    for (const auto& [b, d] : o.terms) {
      MultiIndex s(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) s[i] = a[i] + b[i];
      r.terms[s] += c * d;
    }
  return r;
}

Polynomial Polynomial::scaled(cd s) const {
  Polynomial r = *this;
  for (auto& [a, c] : r.terms) c *= s;
  return r;
}

int Polynomial::max_degree() const {
  int d = 0;
  for (const auto& [a, c] : terms)
    if (c != 0.0) d = std::max(d, degree(a));
  return d;
}

bool Polynomial::is_zero(double tol) const {
  for (const auto& [a, c] : terms)
    if (std::abs(c) > tol) return false;
  return true;
}

cd CumulantSet::at(const MultiIndex& a) const {
  auto it = q.find(a);
  return it == q.end() ? cd(0.0) : it->second;
}

Polynomial CumulantSet::stratum(int d) const {
  Polynomial p{modes, {}};
  for (const auto& [a, c] : q)
    if (degree(a) == d) p.terms[a] = c / factorial_weight(a);
  return p;
}

namespace {

constexpr int kRadii = 5;
constexpr int kPhases = 16;
constexpr int kMaxFreq = 7;

// monomial coefficients of ln chi from one stencil of the given radius
std::map<MultiIndex, cd> fit_stencil(const CharFunction& chi, int m, int order, double rho) {
  int nr = 1, np = 1;
  for (int j = 0; j < m; ++j) {
    nr *= kRadii;
    np *= kPhases;
  }
  std::vector<double> radii(kRadii);
  for (int i = 0; i < kRadii; ++i) radii[i] = rho * (i + 1) / kRadii;
  // samples L[ri * np + pi]
  std::vector<cd> L(static_cast<std::size_t>(nr) * np);
  std::vector<cd> z(m);
  for (int ri = 0; ri < nr; ++ri)
    for (int pi_ = 0; pi_ < np; ++pi_) {
      int a = ri, b = pi_;
      for (int j = 0; j < m; ++j) {
        double r = radii[a % kRadii];
        double ph = 2.0 * pi * (b % kPhases) / kPhases;
        z[j] = std::polar(r, ph);
        a /= kRadii;
        b /= kPhases;
      }
      cd c = chi(z);
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) || std::abs(c) < 0.05)
        fail(ErrorKind::FitIllConditioned, "characteristic function too small on the stencil");
      L[static_cast<std::size_t>(ri) * np + pi_] = std::log(c);
    }

  int nf = 2 * kMaxFreq + 1, nfm = 1;
  for (int j = 0; j < m; ++j) nfm *= nf;
  std::map<MultiIndex, cd> out;
  for (int fi = 0; fi < nfm; ++fi) {
    std::vector<int> f(m);
    int t = fi;
    int total_min = 0;
    for (int j = 0; j < m; ++j) {
      f[j] = t % nf - kMaxFreq;
      t /= nf;
      total_min += std::abs(f[j]);
    }
    if (total_min > order) continue;
    // DFT over phases for each radius combination
    Eigen::VectorXcd H(nr);
    for (int ri = 0; ri < nr; ++ri) {
      cd s = 0.0;
      for (int pi_ = 0; pi_ < np; ++pi_) {
        int b = pi_;
        double ph = 0.0;
        for (int j = 0; j < m; ++j) {
          ph += f[j] * 2.0 * pi * (b % kPhases) / kPhases;
          b /= kPhases;
        }
        s += L[static_cast<std::size_t>(ri) * np + pi_] * std::polar(1.0, -ph);
      }
      H(ri) = s / static_cast<double>(np);
    }
    // per-mode Vandermonde in (r/rho)^{|f|+2e}, solved as a Kronecker product
    std::vector<Eigen::MatrixXd> Vinv(m);
    for (int j = 0; j < m; ++j) {
      Eigen::MatrixXd V(kRadii, kRadii);
      for (int i = 0; i < kRadii; ++i)
        for (int e = 0; e < kRadii; ++e) V(i, e) = std::pow(radii[i] / rho, std::abs(f[j]) + 2 * e);
      Vinv[j] = V.inverse();
    }
    Eigen::VectorXcd C = Eigen::VectorXcd::Zero(nr);
    for (int ei = 0; ei < nr; ++ei)
      for (int ri = 0; ri < nr; ++ri) {
        double w = 1.0;
        int a = ei, b = ri;
        for (int j = 0; j < m; ++j) {
          w *= Vinv[j](a % kRadii, b % kRadii);
          a /= kRadii;
          b /= kRadii;
        }
        C(ei) += w * H(ri);
      }
    for (int ei = 0; ei < nr; ++ei) {
      MultiIndex alpha(2 * m);
      int a = ei, dsum = 0;
      for (int j = 0; j < m; ++j) {
        int d = std::abs(f[j]) + 2 * (a % kRadii);
        a /= kRadii;
        dsum += d;
        alpha[2 * j] = (d + f[j]) / 2;
        alpha[2 * j + 1] = (d - f[j]) / 2;
      }
      if (dsum > order) continue;
      out[alpha] = C(ei) / std::pow(rho, dsum);
    }
  }
  return out;
}

}  // namespace

CumulantSet weyl_cumulants(const CharFunction& chi, int modes, int order, double radius) {
  if (order < 0 || order > 6) fail(ErrorKind::InvalidArgument, "order must be in 0..6");
  if (modes < 1 || modes > 2) fail(ErrorKind::UnsupportedModes, "cumulant fitting supports 1 or 2 modes");
  auto c1 = fit_stencil(chi, modes, order, radius);
  auto c2 = fit_stencil(chi, modes, order, 0.5 * radius);
  CumulantSet cs;
  cs.modes = modes;
  cs.order = order;
  for (const auto& [alpha, v1] : c1) {
    cd v2 = c2.at(alpha);
    int p = 1 << 20;
    for (int j = 0; j < modes; ++j) {
      int d = alpha[2 * j] + alpha[2 * j + 1];
      int f = std::abs(alpha[2 * j] - alpha[2 * j + 1]);
      p = std::min(p, f + 2 * kRadii - d);
    }
    double s = std::pow(2.0, p);
    cd v = (s * v2 - v1) / (s - 1.0);
    cs.q[alpha] = v * factorial_weight(alpha);
  }
  return cs;
}

CumulantSet weyl_cumulants(const State& rho, int order) {
  int m = state_modes(rho);
  if (auto* d = std::get_if<DiagonalState>(&rho)) {
    DiagonalState copy = *d;
    return weyl_cumulants([copy](std::span<const cd> z) { return cd(char_fn_radial(copy, std::abs(z[0])), 0.0); },
                          1, order);
  }
  FockOperator op = std::get<DensityOperator>(rho).op();
  return weyl_cumulants([op](std::span<const cd> z) { return char_fn(op, z); }, m, order);
}

std::vector<Polynomial> edgeworth_polynomials(const CumulantSet& q, int r_max) {
  if (r_max < 1 || r_max > 2) fail(ErrorKind::InvalidArgument, "r_max must be 1 or 2");
  if (q.order < r_max + 2) fail(ErrorKind::InsufficientOrder, "cumulants not available to order r_max + 2");
  std::vector<Polynomial> out;
  Polynomial k3 = q.stratum(3);
  out.push_back(k3);
  if (r_max >= 2) out.push_back(q.stratum(4) + (k3 * k3).scaled(0.5));
  return out;
}

PhaseGrid residual_grid(int n) {
  double w = 0.1 * std::sqrt(static_cast<double>(n));
  return PhaseGrid::radial(w, w / 4.0, 16);
}

ResidualStat expansion_residual(const State& rho, int n, int r_max, const PhaseGrid& grid) {
  if (state_modes(rho) != 1) fail(ErrorKind::UnsupportedModes, "expansion residual is single-mode");
  if (n < 1) fail(ErrorKind::InvalidArgument, "n must be >= 1");
  if (grid.kind != PhaseGrid::Kind::Radial || grid.radius > 0.1 * std::sqrt(static_cast<double>(n)) + 1e-12)
    fail(ErrorKind::GridTooCoarse, "grid must be radial within |z| <= 0.1 sqrt(n)");
  if (r_max < 0 || r_max > 2) fail(ErrorKind::InvalidArgument, "r_max must be in 0..2");
  GaussianSpec g;
  g.modes = 1;
  g.mean = RVector::Zero(2);
  g.cov = covariance(rho);
  double nu_min = std::sqrt(g.cov.determinant());
  std::vector<Polynomial> E;
  if (r_max > 0) E = edgeworth_polynomials(weyl_cumulants(rho, r_max + 2), r_max);
  double sn = std::sqrt(static_cast<double>(n));
  double npow = std::pow(static_cast<double>(n), 0.5 * (r_max + 1));
  QuadRule q = grid.radial_rule();
  ResidualStat st;
  constexpr int kAngles = 32;
  for (std::size_t i = 0; i < q.size(); ++i)
    for (int a = 0; a < kAngles; ++a) {
      cd z = std::polar(q.x[i], 2.0 * pi * a / kAngles);
      cd chin = std::pow(char_fn(rho, z / sn), n);
      cd corr = 1.0;
      for (int r = 1; r <= r_max; ++r) corr += std::pow(sn, -r) * E[r - 1](z);
      cd gz = gaussian_char(g, std::span<const cd>(&z, 1));
      double diff = std::abs(chin - gz * corr);
      st.unweighted = std::max(st.unweighted, diff);
      st.weighted = std::max(st.weighted, diff * std::exp(0.25 * (nu_min - 1.0) * std::norm(z)) * npow);
    }
  return st;
}

ResidualStat expansion_residual(const State& rho, int n, int r_max) {
  return expansion_residual(rho, n, r_max, residual_grid(n));
}

}  // namespace qclt
