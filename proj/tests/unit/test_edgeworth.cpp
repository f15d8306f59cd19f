#include <algorithm>
#include "doctest.h"
#include "helpers.hpp"
#include "qclt/edgeworth.hpp"
#include "qclt/entropy_bound.hpp"
#include "qclt/gaussian.hpp"

using namespace qclt;
using doctest::Approx;

TEST_CASE("polynomial algebra") {
  Polynomial p{1, {}};
  p.terms[{1, 0}] = 2.0;
  p.terms[{0, 1}] = cd(0.0, 1.0);
  cd z(0.3, -0.4);
  CHECK(std::abs(p(z) - (2.0 * z + cd(0.0, 1.0) * std::conj(z))) < 1e-15);
  Polynomial sq = p * p;
  CHECK(std::abs(sq(z) - p(z) * p(z)) < 1e-14);
  CHECK(sq.max_degree() == 2);
  CHECK((p + p.scaled(-1.0)).is_zero(1e-15));
  CHECK(factorial_weight({2, 3}) == 12.0);
}

TEST_CASE("cumulants of thermal and Fock states") {
  for (double nu : {1.0, 3.0, 4.0}) {
    CumulantSet q = weyl_cumulants(State(thermal_diagonal(nu, 160)), 4);
    CHECK(q.at({1, 1}).real() == Approx(-nu / 2.0).epsilon(1e-7));
    for (const auto& [a, v] : q.q)
      if (a != MultiIndex{1, 1}) CHECK(std::abs(v) <= 1e-7);
  }
  CumulantSet one = weyl_cumulants(State(fock_diagonal(20, 1)), 4);
  CHECK(one.at({1, 1}).real() == Approx(-1.5).epsilon(1e-7));
  CHECK(one.at({2, 2}).real() == Approx(-2.0).epsilon(1e-5));
  for (const auto& [a, v] : one.q)
    if (a[0] != a[1]) CHECK(std::abs(v) <= 1e-8);
}

TEST_CASE("cumulants against direct ladder moments") {
  std::mt19937_64 rng(2);
  DensityOperator r = testing_helpers::random_dense(rng, 5);
  CumulantSet q = weyl_cumulants(State(r), 3);
  cd ea = expect_a(r, 0), eaa = expect_aa(r, 0, 0), en = expect_ada(r, 0, 0);
  // ln chi = z<a^dag> - conj(z)<a> + (z^2 k(a^dag,a^dag) + conj(z)^2 k(a,a) - |z|^2 (2 k(a^dag,a) + 1)) / 2 + ...
  CHECK(std::abs(q.at({1, 0}) - std::conj(ea)) < 1e-7);
  CHECK(std::abs(q.at({0, 1}) + ea) < 1e-7);
  CHECK(std::abs(q.at({2, 0}) - (std::conj(eaa) - std::conj(ea * ea))) < 1e-6);
  CHECK(std::abs(q.at({0, 2}) - (eaa - ea * ea)) < 1e-6);
  CHECK(std::abs(q.at({1, 1}) + (2.0 * (en - std::norm(ea)) + 1.0) / 2.0) < 1e-6);
}

TEST_CASE("two-mode cumulants of a product thermal state") {
  auto chi = [](std::span<const cd> z) { return cd(std::exp(-1.5 * std::norm(z[0]) - 2.5 * std::norm(z[1])), 0.0); };
  CumulantSet q = weyl_cumulants(chi, 2, 4);
  CHECK(q.at({1, 1, 0, 0}).real() == Approx(-1.5).epsilon(1e-7));
  CHECK(q.at({0, 0, 1, 1}).real() == Approx(-2.5).epsilon(1e-7));
  CHECK(std::abs(q.at({1, 1, 1, 1})) < 1e-6);
}

TEST_CASE("edgeworth polynomials") {
  auto fock = edgeworth_polynomials(weyl_cumulants(State(fock_diagonal(20, 2)), 4), 2);
  CHECK(fock[0].is_zero(1e-8));
  auto th = edgeworth_polynomials(weyl_cumulants(State(thermal_diagonal(3.0, 120)), 4), 2);
  CHECK(th[0].is_zero(1e-7));
  CHECK(th[1].is_zero(1e-6));

  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(7);
  amp(0) = amp(3) = 1.0 / std::sqrt(2.0);
  State psi = pure_density(6, amp);
  auto E = edgeworth_polynomials(weyl_cumulants(psi, 3), 1);
  double c = std::sqrt(6.0) / 12.0;
  CHECK(std::abs(E[0].terms.at({0, 3}) - cd(-c, 0.0)) < 1e-6);
  CHECK(std::abs(E[0].terms.at({3, 0}) - cd(c, 0.0)) < 1e-6);
  CHECK_NOTHROW(OddPolynomial{E[0]});
  CHECK_THROWS_AS(edgeworth_polynomials(weyl_cumulants(psi, 3), 2), Error);
}

TEST_CASE("expansion residual") {
  for (int n : {4, 64}) CHECK(expansion_residual(State(thermal_diagonal(3.0, 120)), n, 2).unweighted <= 1e-8);

  // the 0.1 sqrt(n) window still widens below n = 64, so boundedness is read from there on
  std::vector<double> w;
  for (int n : {64, 256, 1024}) w.push_back(expansion_residual(State(fock_diagonal(20, 1)), n, 2).weighted);
  double lo = *std::min_element(w.begin(), w.end()), hi = *std::max_element(w.begin(), w.end());
  CHECK(lo > 0.0);
  CHECK(hi / lo < 10.0);
  CHECK(w[2] < 1.5 * w[1]);

  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(7);
  amp(0) = amp(3) = 1.0 / std::sqrt(2.0);
  State psi = pure_density(6, amp);
  for (int n : {16, 64}) {
    double r0 = expansion_residual(psi, n, 0).unweighted;
    double r1 = expansion_residual(psi, n, 1).unweighted;
    CHECK(r0 >= 3.0 * r1);
  }
  CHECK_THROWS_AS(expansion_residual(psi, 16, 1, PhaseGrid::radial(5.0, 1.0)), Error);
}

TEST_CASE("stencil rejects a vanishing characteristic function") {
  auto chi = [](std::span<const cd> z) { return cd(0.01 * std::exp(-std::norm(z[0])), 0.0); };
  CHECK_THROWS_AS(weyl_cumulants(chi, 1, 4), Error);
}
