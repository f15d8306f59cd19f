#include "qclt/entropy_bound.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace qclt {

OddPolynomial::OddPolynomial(Polynomial p) : p_(std::move(p)) {
  double scale = 0.0;
  for (const auto& [a, c] : p_.terms) scale = std::max(scale, std::abs(c));
  double tol = 1e-12 * std::max(1.0, scale);
  for (const auto& [a, c] : p_.terms) {
    if (std::abs(c) <= tol) continue;
    if (degree(a) % 2 == 0) fail(ErrorKind::NotOddPolynomial, "even-degree term present");
    MultiIndex s = a;
    for (int j = 0; j < p_.modes; ++j) std::swap(s[2 * j], s[2 * j + 1]);
    auto it = p_.terms.find(s);
    cd partner = it == p_.terms.end() ? cd(0.0) : it->second;
    if (std::abs(partner + std::conj(c)) > tol)
      fail(ErrorKind::NotOddPolynomial, "coefficients violate E(-z) = conj(E(z))");
  }
}

OddPolynomial OddPolynomial::zero(int modes) { return OddPolynomial(Polynomial{modes, {}}); }

namespace {

void check_finite_beta(const ThermalSpec& tau) {
  for (double b : tau.beta)
    if (!std::isfinite(b) || !(b > 0.0)) fail(ErrorKind::InfiniteBeta, "reference state has a vacuum mode");
}

using LadderMap = std::map<MultiIndex, cd>;

LadderMap ad_lower(const LadderMap& in, int j, double beta) {
  LadderMap out;
  double g = std::expm1(beta);
  for (const auto& [k, v] : in) {
    MultiIndex a = k;
    a[2 * j + 1] += 1;
    out[a] += g * v;
    int p = k[2 * j];
    if (p > 0) {
      MultiIndex b = k;
      b[2 * j] -= 1;
      out[b] -= static_cast<double>(p) * v;
    }
  }
  return out;
}

LadderMap ad_raise(const LadderMap& in, int j, double beta) {
  LadderMap out;
  double e = std::exp(-beta);
  for (const auto& [k, v] : in) {
    MultiIndex a = k;
    a[2 * j] += 1;
    out[a] += (e - 1.0) * v;
    int q = k[2 * j + 1];
    if (q > 0) {
      MultiIndex b = k;
      b[2 * j + 1] -= 1;
      out[b] += e * q * v;
    }
  }
  return out;
}

double half_lfact_ratio(int hi, int lo) {  // ln sqrt(hi!/lo!)
  return 0.5 * (std::lgamma(hi + 1.0) - std::lgamma(lo + 1.0));
}

// sum_k tau_k <k| a^dag^p2 a^q2 a^dag^p1 a^q1 |k> for one mode
double mode_trace(int p2, int q2, int p1, int q1, double beta) {
  if (p1 - q1 + p2 - q2 != 0) return 0.0;
  double l1q = std::log1p(-std::exp(-beta));
  double sum = 0.0;
  int small = 0;
  for (int k = q1; k < 1000000; ++k) {
    int l1 = k - q1, l2 = l1 + p1;
    if (l2 < q2) continue;
    int l3 = l2 - q2;
    double lc = half_lfact_ratio(k, l1) + half_lfact_ratio(l2, l1) + half_lfact_ratio(l2, l3) +
                half_lfact_ratio(k, l3);
    double term = std::exp(l1q - beta * k + lc);
    sum += term;
    if (k > 20 && term < 1e-18 * std::abs(sum)) {
      if (++small > 10) break;
    } else {
      small = 0;
    }
  }
  return sum;
}

// <i| prod_j a_j^dag^{p_j} a_j^{q_j} |k>; returns the target index via out
bool ladder_element(const std::vector<int>& k, const MultiIndex& key, std::vector<int>& i, double& coef) {
  int m = static_cast<int>(k.size());
  i = k;
  double lc = 0.0;
  for (int j = 0; j < m; ++j) {
    int p = key[2 * j], q = key[2 * j + 1];
    if (k[j] < q) return false;
    int l = k[j] - q;
    lc += half_lfact_ratio(k[j], l) + half_lfact_ratio(l + p, l);
    i[j] = l + p;
  }
  coef = std::exp(lc);
  return true;
}

// visit every multi-index k outside the total-number cutoff K with beta.k <= 70
void for_each_outside(const ThermalSpec& tau, int K, const std::function<void(const std::vector<int>&, double)>& fn) {
  int m = tau.modes();
  std::vector<int> k(m, 0);
  std::function<void(int, double, int)> rec = [&](int j, double bk, int tot) {
    if (j == m) {
      if (tot > K) fn(k, tau.log_weight(k));
      return;
    }
    for (int v = 0; bk + tau.beta[j] * v <= 70.0; ++v) {
      k[j] = v;
      rec(j + 1, bk + tau.beta[j] * v, tot + v);
    }
    k[j] = 0;
  };
  rec(0, 0.0, 0);
}

// per-k data on the retained basis
struct Diagnostics {
  std::vector<std::vector<int>> k;
  std::vector<double> rho_kk;
  std::vector<double> rho_log_rho_kk;  // <k| rho ln rho |k>
  std::vector<double> diff_sq_kk;      // <k| (rho - tau)^2 |k>
  std::vector<double> diffN_kk;        // <k| (rho - tau)(N + m) |k>
  double entropy_term = 0.0;           // tr rho ln rho
  int cutoff = 0;
  double tail_mass = 0.0, tail_first_moment = 0.0;
  bool diagonal = false;
};

double xlogx(double p) { return p > 1e-300 ? p * std::log(p) : 0.0; }

Diagnostics diagnose(const State& s, const ThermalSpec& tau) {
  Diagnostics d;
  int m = tau.modes();
  if (state_modes(s) != m) fail(ErrorKind::InvalidArgument, "mode count mismatch between rho and tau");
  if (auto* dg = std::get_if<DiagonalState>(&s)) {
    d.diagonal = true;
    d.cutoff = dg->cutoff();
    d.tail_mass = dg->tail_mass;
    d.tail_first_moment = dg->tail_first_moment;
    for (int k = 0; k <= dg->cutoff(); ++k) {
      double p = dg->probs[k];
      double t = std::exp(tau.log_weight({k}));
      d.k.push_back({k});
      d.rho_kk.push_back(p);
      d.rho_log_rho_kk.push_back(xlogx(p));
      d.diff_sq_kk.push_back((p - t) * (p - t));
      d.diffN_kk.push_back((p - t) * (k + m));
      d.entropy_term += xlogx(p);
    }
    return d;
  }
  const auto& rho = std::get<DensityOperator>(s);
  const auto& b = rho.basis();
  d.cutoff = rho.cutoff();
  auto n = static_cast<Eigen::Index>(b.size());
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  if (es.info() != Eigen::Success) fail(ErrorKind::EigenFailure, "eigendecomposition failed");
  Eigen::VectorXd lnl(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lnl(i) = xlogx(es.eigenvalues()(i));
    d.entropy_term += lnl(i);
  }
  Matrix diff = rho.matrix();
  for (Eigen::Index i = 0; i < n; ++i) diff(i, i) -= std::exp(tau.log_weight(b.state(i)));
  for (Eigen::Index i = 0; i < n; ++i) {
    d.k.push_back(b.state(i));
    d.rho_kk.push_back(rho.matrix()(i, i).real());
    d.rho_log_rho_kk.push_back((es.eigenvectors().row(i).cwiseAbs2() * lnl)(0));
    d.diff_sq_kk.push_back(diff.row(i).squaredNorm());
    d.diffN_kk.push_back(diff(i, i).real() * (b.total(i) + m));
  }
  return d;
}

double relent_from(const Diagnostics& d, const ThermalSpec& tau) {
  double D = d.entropy_term;
  for (std::size_t i = 0; i < d.k.size(); ++i)
    if (d.rho_kk[i] > 0.0) D -= d.rho_kk[i] * tau.log_weight(d.k[i]);
  if (d.diagonal && d.tail_mass > 0.0) {
    double t = d.tail_mass;
    D += t * (std::log(t) + tau.beta[0] * (d.cutoff + 1.0));
  }
  return D;
}

double sum_over_k(const Diagnostics& d, const ThermalSpec& tau, double t, double eta) {
  // three-term right-hand side of the truncated estimate
  double first = 0.0, second = 0.0, third = 0.0;
  int m = tau.modes();
  auto bk = [&](const std::vector<int>& k) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += tau.beta[j] * k[j];
    return s;
  };
  for (std::size_t i = 0; i < d.k.size(); ++i) {
    double lt = tau.log_weight(d.k[i]);
    if (bk(d.k[i]) <= t) {
      if (d.diff_sq_kk[i] > 0.0) first += std::exp(std::log(d.diff_sq_kk[i]) - lt);
    } else {
      second += std::abs(d.diffN_kk[i]);
      third -= std::exp(lt) * lt;
    }
  }
  for_each_outside(tau, d.cutoff, [&](const std::vector<int>& k, double lt) {
    double tk = std::exp(lt);
    int tot = 0;
    for (int v : k) tot += v;
    if (bk(k) <= t) {
      first += tk;
    } else {
      second += tk * (tot + m);
      third -= tk * lt;
    }
  });
  return first + eta * second + third;
}

double eps_weighted(const State& s, const ThermalSpec& tau, const OddPolynomial& E, double alpha) {
  int m = tau.modes();
  double w = 0.5 * (m + 3);
  if (alpha != 0.0 && !E.empty()) {
    if (m != 1) fail(ErrorKind::UnsupportedModes, "alpha != 0 is single-mode");
    int K = state_cutoff(s);
    int Kext = std::max(K, static_cast<int>(std::ceil(80.0 / tau.beta[0])) + 8);
    FockOperator ta = tau_alpha(tau, E, alpha, Kext);
    Matrix r = std::holds_alternative<DiagonalState>(s)
                   ? embed(to_density(std::get<DiagonalState>(s)).op(), ta.basis).mat
                   : embed(std::get<DensityOperator>(s).op(), ta.basis).mat;
    Matrix diff = r - ta.mat;
    double acc = 0.0;
    for (int l = 0; l <= Kext; ++l) acc += diff.col(l).squaredNorm() * std::pow(l + 1.0, 2.0 * w);
    return std::sqrt(acc);
  }
  double acc = 0.0;
  int K = 0;
  if (auto* dg = std::get_if<DiagonalState>(&s)) {
    K = dg->cutoff();
    for (int k = 0; k <= K; ++k) {
      double dk = dg->probs[k] - std::exp(tau.log_weight({k}));
      acc += dk * dk * std::pow(k + 1.0, 2.0 * w);
    }
  } else {
    const auto& rho = std::get<DensityOperator>(s);
    const auto& b = rho.basis();
    K = rho.cutoff();
    Matrix diff = rho.matrix();
    for (std::size_t i = 0; i < b.size(); ++i) diff(i, i) -= std::exp(tau.log_weight(b.state(i)));
    for (std::size_t l = 0; l < b.size(); ++l)
      acc += diff.col(l).squaredNorm() * std::pow(b.total(l) + static_cast<double>(m), 2.0 * w);
  }
  for_each_outside(tau, K, [&](const std::vector<int>& k, double lt) {
    int tot = 0;
    for (int v : k) tot += v;
    acc += std::exp(2.0 * lt) * std::pow(tot + static_cast<double>(m), 2.0 * w);
  });
  return std::sqrt(acc);
}

}  // namespace

std::map<MultiIndex, cd> ladder_expansion(const ThermalSpec& tau, const OddPolynomial& E) {
  int m = tau.modes();
  if (E.modes() != m) fail(ErrorKind::InvalidArgument, "E and tau have different mode counts");
  check_finite_beta(tau);
  LadderMap total;
  for (const auto& [alpha, c] : E.poly().terms) {
    if (c == 0.0) continue;
    LadderMap cur;
    cur[MultiIndex(2 * m, 0)] = c;
    for (int j = 0; j < m; ++j) {
      for (int r = 0; r < alpha[2 * j]; ++r) cur = ad_lower(cur, j, tau.beta[j]);
      for (int r = 0; r < alpha[2 * j + 1]; ++r) cur = ad_raise(cur, j, tau.beta[j]);
    }
    for (const auto& [k, v] : cur) total[k] += v;
  }
  for (auto it = total.begin(); it != total.end();)
    it = std::abs(it->second) == 0.0 ? total.erase(it) : std::next(it);
  return total;
}

BoundConstants bound_constants(const ThermalSpec& tau, const OddPolynomial& E) {
  check_finite_beta(tau);
  int m = tau.modes();
  BoundConstants c;
  double bmax = 0.0, sum_log = 0.0, prod_b1 = 1.0;
  c.nu_beta = 1.0;
  for (double b : tau.beta) {
    double l = std::log1p(-std::exp(-b));
    c.nu_beta *= -std::expm1(-b);
    sum_log += l;
    bmax = std::max(bmax, b);
    prod_b1 *= (b + 1.0);
    double q = std::exp(-b);
    c.s_tau += -l + b * q / (1.0 - q);
  }
  c.eta_beta = bmax - sum_log + 1.0;
  double s = 1.0 + 1.0 / m;
  c.zeta = m == 1 ? std::numbers::pi * std::numbers::pi / 6.0 : std::riemann_zeta(s);
  c.c_prime = 2.0 * (bmax + 1.0) / c.nu_beta;
  c.c_double_prime = std::pow(2.0, m) * m * c.eta_beta * prod_b1 * prod_b1 / c.nu_beta;
  auto lad = ladder_expansion(tau, E);
  for (const auto& [k1, e1] : lad)
    for (const auto& [k2, e2] : lad) {
      double tr = 1.0;
      for (int j = 0; j < m && tr != 0.0; ++j)
        tr *= mode_trace(k2[2 * j], k2[2 * j + 1], k1[2 * j], k1[2 * j + 1], tau.beta[j]);
      c.m_beta_e += std::abs(e1 * e2) * std::abs(tr);
    }
  double zm = std::pow(c.zeta, 0.5 * m);
  c.c_final = std::max({2.0 * c.m_beta_e, c.c_prime + c.eta_beta * zm + c.c_double_prime,
                        c.nu_beta + 1.0 / c.nu_beta + c.eta_beta * zm + c.s_tau});
  return c;
}

FockOperator tau_alpha(const ThermalSpec& tau, const OddPolynomial& E, double alpha, int cutoff) {
  check_finite_beta(tau);
  int m = tau.modes();
  auto basis = make_basis(m, cutoff);
  auto n = static_cast<Eigen::Index>(basis->size());
  Matrix T = Matrix::Zero(n, n);
  std::vector<double> tk(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    tk[i] = std::exp(tau.log_weight(basis->state(i)));
    T(i, i) = tk[i];
  }
  if (alpha != 0.0 && !E.empty()) {
    auto lad = ladder_expansion(tau, E);
    std::vector<int> target;
    for (const auto& [key, e] : lad)
      for (Eigen::Index k = 0; k < n; ++k) {
        double coef;
        if (!ladder_element(basis->state(k), key, target, coef)) continue;
        long i = basis->index(target);
        if (i < 0) continue;
        T(i, k) += alpha * e * coef * tk[k];
      }
    double herm = (T - T.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) fail(ErrorKind::NumericalFailure, "tau_alpha is not Hermitian");
    T = 0.5 * (T + T.adjoint());
  }
  return FockOperator{basis, T};
}

double pointwise_bound_check(const State& rho, const ThermalSpec& tau) {
  check_finite_beta(tau);
  Diagnostics d = diagnose(rho, tau);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.k.size(); ++i) {
    double lt = tau.log_weight(d.k[i]);
    double lhs = d.rho_log_rho_kk[i] - (d.rho_kk[i] != 0.0 ? d.rho_kk[i] * lt : 0.0);
    double quad = d.diff_sq_kk[i] > 0.0 ? std::exp(std::log(d.diff_sq_kk[i]) - lt) : 0.0;
    double rhs = d.rho_kk[i] - std::exp(lt) + quad;
    worst = std::min(worst, rhs - lhs);
  }
  return worst;
}

TruncatedRhs truncated_rhs(const State& rho, const ThermalSpec& tau, double t) {
  check_finite_beta(tau);
  if (!(t >= 0.0)) fail(ErrorKind::InvalidArgument, "t must be >= 0");
  BoundConstants c = bound_constants(tau, OddPolynomial::zero(tau.modes()));
  Diagnostics d = diagnose(rho, tau);
  TruncatedRhs r;
  r.relent = relent_from(d, tau);
  r.rhs = sum_over_k(d, tau, t, c.eta_beta);
  r.holds = r.relent <= r.rhs + 1e-8;
  return r;
}

double balancing_t(double eps, int m) {
  if (!(eps > 0.0) || eps >= 1.0) return 0.0;
  double target = std::log(1.0 / eps);
  auto g = [m](double t) { return t - m * std::log1p(t); };
  double lo = std::max(0.0, m - 1.0), hi = lo + 1.0;
  while (g(hi) < target) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double relent_to_thermal(const State& rho, const ThermalSpec& tau) {
  check_finite_beta(tau);
  return relent_from(diagnose(rho, tau), tau);
}

RelentBound relent_upper(const State& rho, const ThermalSpec& tau, const OddPolynomial& E, double alpha) {
  check_finite_beta(tau);
  RelentBound r;
  r.constants = bound_constants(tau, E);
  r.relent = relent_to_thermal(rho, tau);
  r.eps = eps_weighted(rho, tau, E, alpha);
  r.bound = r.constants.c_final * (alpha * alpha + r.eps);
  r.t_star = balancing_t(r.eps, tau.modes());
  r.holds = r.relent <= r.bound + 1e-8;
  return r;
}

NonGaussianity non_gaussianity_upper(const State& rho) {
  NonGaussianity out;
  State work = rho;
  if (auto* dm = std::get_if<DensityOperator>(&rho)) {
    RVector d = first_moments(rho);
    if (d.cwiseAbs().maxCoeff() > 1e-10) work = center(*dm).state;
  }
  GaussifyResult g = gaussify(work);
  if (!g.thermal) {
    const auto& dm = std::get<DensityOperator>(work);
    Williamson w = williamson_1mode(g.spec.cov);
    int K = dm.cutoff() + static_cast<int>(std::ceil(10.0 * w.r * (w.nu + 1.0))) + 8;
    work = apply_gaussian_unitary(dm, w.r, w.phi, K, true);
    g.nu = {w.nu};
  }
  for (double v : g.nu)
    if (v <= 1.0 + 1e-12) fail(ErrorKind::InfiniteBeta, "Gaussification has a vacuum mode");
  ThermalSpec tau = ThermalSpec::from_nu(g.nu);
  out.nu = g.nu.front();
  out.detail = relent_upper(work, tau, OddPolynomial::zero(tau.modes()), 0.0);
  out.d_g = out.detail.relent;
  out.bound = out.detail.bound;
  out.holds = out.detail.holds;
  return out;
}

TailSums appendix_tail_sums(const std::vector<double>& beta, double t) {
  int m = static_cast<int>(beta.size());
  if (m < 1 || m > 3) fail(ErrorKind::InvalidArgument, "tail sums support 1 to 3 modes");
  for (double b : beta)
    if (!std::isfinite(b) || !(b > 0.0)) fail(ErrorKind::InfiniteBeta, "beta must be finite and positive");
  TailSums ts;
  std::vector<int> kmax(m);
  double nu = 1.0, prod = 1.0;
  for (int j = 0; j < m; ++j) {
    kmax[j] = static_cast<int>(std::ceil((t + 40.0) / beta[j])) + 1;
    nu *= -std::expm1(-beta[j]);
    prod *= beta[j] + 1.0;
  }
  std::vector<int> k(m, 0);
  std::function<void(int, double)> rec = [&](int j, double bk) {
    if (j == m) {
      if (bk > t) {
        double e = std::exp(-bk);
        ts.f_exact += e;
        ts.g_exact += (k[0] + 1.0) * e;
      }
      return;
    }
    for (int v = 0; v <= kmax[j]; ++v) {
      k[j] = v;
      rec(j + 1, bk + beta[j] * v);
    }
  };
  rec(0, 0.0);
  double pm = std::pow(2.0, m);
  ts.f_bound = pm * prod / nu * std::pow(t + 1.0, m - 1) * std::exp(-t);
  ts.g_bound = pm * prod * prod / (nu * nu) * std::pow(t + 1.0, m) * std::exp(-t);
  return ts;
}

}  // namespace qclt
