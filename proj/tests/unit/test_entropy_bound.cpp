#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "qclt/convolution.hpp"
#include "qclt/entropy_bound.hpp"
#include "qclt/phase_space.hpp"

using namespace qclt;
using doctest::Approx;

namespace {

OddPolynomial cubic(double c = 1.0) {
  Polynomial p{1, {}};
  p.terms[{3, 0}] = c;
  p.terms[{0, 3}] = -c;
  return OddPolynomial(p);
}

DiagonalState half_zero_half() { return make_diagonal({0.5, 0.0, 0.5}); }

// D(rho || thermal) for a diagonal rho by direct summation
double direct_relent(const std::vector<double>& p, double nu) {
  double q = (nu - 1.0) / (nu + 1.0), s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] > 0.0) s += p[k] * (std::log(p[k]) - std::log(1.0 - q) - k * std::log(q));
  return s;
}

}  // namespace

TEST_CASE("odd polynomial validation") {
  CHECK_NOTHROW(cubic());
  Polynomial even{1, {}};
  even.terms[{1, 1}] = 1.0;
  CHECK_THROWS_AS(OddPolynomial{even}, Error);
  Polynomial asym{1, {}};
  asym.terms[{3, 0}] = 1.0;
  asym.terms[{0, 3}] = 1.0;
  CHECK_THROWS_AS(OddPolynomial{asym}, Error);
  CHECK(OddPolynomial::zero(2).empty());
}

TEST_CASE("bound constants at beta = ln(5/3)") {
  double b = std::log(5.0 / 3.0);
  BoundConstants c = bound_constants(ThermalSpec::from_beta({b}), OddPolynomial::zero(1));
  CHECK(c.nu_beta == Approx(0.4).epsilon(1e-14));
  CHECK(c.zeta == Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-14));
  CHECK(c.eta_beta == Approx(std::log(25.0 / 6.0) + 1.0).epsilon(1e-13));
  CHECK(c.c_prime == Approx(2.0 * (b + 1.0) / 0.4).epsilon(1e-13));
  CHECK(c.c_double_prime == Approx(2.0 * c.eta_beta * (b + 1.0) * (b + 1.0) / 0.4).epsilon(1e-13));
  double q = 0.6;
  CHECK(c.s_tau == Approx(-std::log(1.0 - q) - q / (1.0 - q) * std::log(q)).epsilon(1e-12));
  CHECK(c.m_beta_e == 0.0);
  CHECK(c.c_final >= c.c_prime + c.c_double_prime);
  CHECK(c.c_final >= c.nu_beta + 1.0 / c.nu_beta + c.s_tau);

  BoundConstants e = bound_constants(ThermalSpec::from_beta({b}), cubic());
  CHECK(e.m_beta_e > 0.0);
  CHECK(e.c_final >= 2.0 * e.m_beta_e);
  BoundConstants again = bound_constants(ThermalSpec::from_beta({b}), cubic());
  CHECK(again.c_final == e.c_final);
  CHECK_THROWS_AS(bound_constants(ThermalSpec::from_beta({INFINITY}), OddPolynomial::zero(1)), Error);
}

TEST_CASE("tau_alpha") {
  ThermalSpec tau = ThermalSpec::from_nu({4.0});
  int K = 90;
  FockOperator t0 = tau_alpha(tau, cubic(), 0.0, K);
  DiagonalState th = thermal_diagonal(4.0, K);
  for (int k = 0; k <= K; ++k) CHECK(std::abs(t0.mat(k, k) - th.probs[k]) < 1e-15);
  CHECK((t0.mat - Matrix(t0.mat.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

  for (double alpha : {0.01, 0.05}) {
    FockOperator ta = tau_alpha(tau, cubic(), alpha, K);
    CHECK((ta.mat.diagonal() - t0.mat.diagonal()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((ta.mat - ta.mat.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(ta.mat.trace() - 1.0) < 1e-10);
  }

  FockOperator ta = tau_alpha(tau, cubic(), 0.01, K);
  OddPolynomial E = cubic();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    cd z(u(rng), u(rng));
    cd expect = std::exp(-2.0 * std::norm(z)) * (1.0 + 0.01 * E.poly()(z));
    worst = std::max(worst, std::abs(char_fn(ta, std::span<const cd>(&z, 1)) - expect));
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("pointwise bound") {
  ThermalSpec t3 = ThermalSpec::from_nu({3.0});
  CHECK(pointwise_bound_check(State(thermal_diagonal(3.0, 40)), t3) >= -1e-12);
  CHECK(pointwise_bound_check(State(half_zero_half()), t3) >= 0.0);
  ThermalSpec t4 = ThermalSpec::from_nu({4.0});
  std::mt19937_64 rng(20);
  for (int i = 0; i < 20; ++i) {
    State r = i % 2 ? State(testing_helpers::random_dense(rng, 8))
                    : State(make_diagonal(testing_helpers::random_probs(rng, 8)));
    CHECK(pointwise_bound_check(r, t4) >= -1e-8);
  }
}

TEST_CASE("truncated right-hand side") {
  ThermalSpec t3 = ThermalSpec::from_nu({3.0});
  double b = t3.beta[0];
  for (double t : {0.0, 1.0, 2.0, 5.0}) {
    TruncatedRhs r = truncated_rhs(State(half_zero_half()), t3, t);
    CHECK(r.holds);
    CHECK(r.relent == Approx(direct_relent({0.5, 0.0, 0.5}, 3.0)).epsilon(1e-12));
  }
  // rho = tau: only the entropy tail survives
  DiagonalState th = thermal_diagonal(3.0, 200);
  for (double t : {0.0, 3.0}) {
    TruncatedRhs r = truncated_rhs(State(th), t3, t);
    double tail = 0.0;
    for (int k = 0; k < 400; ++k)
      if (b * k > t) {
        double p = std::exp(t3.log_weight({k}));
        tail -= p * std::log(p);
      }
    CHECK(r.rhs == Approx(tail).epsilon(1e-6));
    CHECK(std::abs(r.relent) < 1e-10);
    CHECK(r.holds);
  }
  // no level above t: the quadratic term alone
  TruncatedRhs big = truncated_rhs(State(half_zero_half()), t3, 1e4);
  double quad = 0.0;
  std::vector<double> p{0.5, 0.0, 0.5};
  for (int k = 0; k < 400; ++k) {
    double tk = std::exp(t3.log_weight({k}));
    double d = (k < 3 ? p[k] : 0.0) - tk;
    quad += d * d / tk;
  }
  CHECK(big.rhs == Approx(quad).epsilon(1e-8));
  CHECK(big.holds);
}

TEST_CASE("balancing t") {
  CHECK(balancing_t(1.0, 1) == 0.0);
  for (int m : {1, 2})
    for (double eps : {1e-2, 1e-6}) {
      double t = balancing_t(eps, m);
      CHECK(std::exp(t) / std::pow(t + 1.0, m) == Approx(1.0 / eps).epsilon(1e-9));
    }
}

TEST_CASE("relative entropy upper bound") {
  ThermalSpec t3 = ThermalSpec::from_nu({3.0});
  RelentBound same = relent_upper(State(thermal_diagonal(3.0, 120)), t3, OddPolynomial::zero(1), 0.0);
  CHECK(same.bound >= 0.0);
  CHECK(same.holds);

  auto one16 = nfold_symmetric(State(fock_diagonal(60, 1)), 16);
  RelentBound r = relent_upper(one16, t3, OddPolynomial::zero(1), 0.0);
  CHECK(r.holds);
  CHECK(r.relent > 0.0);
  CHECK(r.t_star >= 0.0);
  CHECK(truncated_rhs(one16, t3, r.t_star).rhs <= r.bound + 1e-8);

  std::mt19937_64 rng(50);
  for (int i = 0; i < 50; ++i) {
    State s = make_diagonal(testing_helpers::random_probs(rng, 10));
    double nu = 2.0 * std::get<DiagonalState>(s).mean_photon_number() + 1.0;
    ThermalSpec tau = ThermalSpec::from_nu({nu});
    RelentBound b = relent_upper(s, tau, OddPolynomial::zero(1), 0.0);
    CHECK(b.holds);
    TruncatedRhs tr = truncated_rhs(s, tau, b.t_star);
    CHECK(tr.relent <= tr.rhs + 1e-8);
    NonGaussianity g = non_gaussianity_upper(s);
    CHECK(std::abs(g.bound - b.bound) <= 1e-12 * std::max(1.0, b.bound));
  }

  RelentBound with_e = relent_upper(one16, t3, cubic(), 0.01);
  CHECK(with_e.holds);
  CHECK_THROWS_AS(relent_upper(one16, ThermalSpec::from_beta({INFINITY}), OddPolynomial::zero(1), 0.0), Error);
}

TEST_CASE("non-Gaussianity") {
  NonGaussianity th = non_gaussianity_upper(State(thermal_diagonal(3.0, 120)));
  CHECK(std::abs(th.d_g) < 1e-10);
  CHECK(th.holds);

  NonGaussianity one = non_gaussianity_upper(State(fock_density(10, 1)));
  CHECK(one.nu == Approx(3.0));
  CHECK(one.d_g == Approx(direct_relent({0.0, 1.0}, 3.0)).epsilon(1e-9));
  CHECK(one.d_g == Approx(std::log(4.0)).epsilon(1e-9));
  CHECK(one.holds);

  double prev = one.d_g;
  for (int n : {4, 16, 64}) {
    NonGaussianity g = non_gaussianity_upper(nfold_symmetric(State(fock_diagonal(80, 1)), n));
    CHECK(g.holds);
    CHECK(g.d_g < prev);
    prev = g.d_g;
  }

  // squeezed vacuum mixed with a little |1>: non-thermal covariance
  Matrix sq = apply_gaussian_unitary(fock_density(20, 0), 0.3, 0.0, 20).matrix();
  Matrix mix = 0.8 * sq + 0.2 * fock_density(20, 1).matrix();
  NonGaussianity g = non_gaussianity_upper(State(build_density(1, 20, mix)));
  CHECK(g.d_g > 0.0);
  CHECK(g.holds);
}

TEST_CASE("tail sums") {
  double e = std::exp(-1.0);
  TailSums a = appendix_tail_sums({1.0}, 0.0);
  CHECK(a.f_exact == Approx(e / (1.0 - e)).epsilon(1e-12));
  CHECK(a.f_bound == Approx(4.0 / (1.0 - e)).epsilon(1e-12));
  CHECK(a.g_exact <= a.g_bound + 1e-10);
  for (int t = 0; t <= 10; ++t) {
    TailSums s = appendix_tail_sums({1.0, 2.0}, t);
    CHECK(s.f_exact <= s.f_bound + 1e-10);
    CHECK(s.g_exact <= s.g_bound + 1e-10);
    // enumeration oracle
    double f = 0.0;
    for (int i = 0; i < 60; ++i)
      for (int j = 0; j < 60; ++j)
        if (i + 2.0 * j > t) f += std::exp(-(i + 2.0 * j));
    CHECK(s.f_exact == Approx(f).epsilon(1e-10));
  }
  TailSums far = appendix_tail_sums({1.0}, 20.0);
  CHECK(far.f_exact < 1e-8);
  CHECK(far.f_bound < 1e-6);
  CHECK(far.f_bound / far.f_exact < 100.0);
  TailSums three = appendix_tail_sums({0.5, 1.0, 1.5}, 3.0);
  CHECK(three.f_exact <= three.f_bound);
  CHECK_THROWS_AS(appendix_tail_sums({1.0, 1.0, 1.0, 1.0}, 0.0), Error);
}
