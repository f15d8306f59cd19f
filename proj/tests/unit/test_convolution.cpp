#include "doctest.h"
#include "helpers.hpp"
#include "qclt/convolution.hpp"
#include "qclt/counterexamples.hpp"
#include "qclt/gaussian.hpp"

using namespace qclt;
using doctest::Approx;

namespace {

double diag_dist(const DiagonalState& a, const DiagonalState& b) { return trace_distance(a, b); }

}  // namespace

TEST_CASE("route parsing") {
  CHECK(parse_route("diagonal") == Route::DiagonalInductive);
  CHECK(parse_route("char") == Route::CharPower);
  CHECK(parse_route("oracle") == Route::TensorOracle);
  CHECK_THROWS_AS(parse_route("fft"), Error);
}

TEST_CASE("pairwise convolution examples") {
  DiagonalState vac = fock_diagonal(6, 0), one = fock_diagonal(6, 1);
  DiagonalState vv = convolve_pair(vac, vac, 0.3);
  CHECK(vv.probs[0] == Approx(1.0));
  for (double eta : {0.5, 0.2, 0.75}) {
    DiagonalState s = convolve_pair(one, vac, eta);
    CHECK(s.probs[0] == Approx(1.0 - eta));
    CHECK(s.probs[1] == Approx(eta));
  }
  DiagonalState hom = convolve_pair(one, one, 0.5);
  CHECK(hom.probs[0] == Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(hom.probs[1]) < 1e-12);
  CHECK(hom.probs[2] == Approx(0.5).epsilon(1e-12));

  DensityOperator h2 = convolve_pair(fock_density(6, 1), fock_density(6, 1), 0.5);
  CHECK(std::abs(h2.matrix()(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(h2.matrix()(2, 2) - 0.5) < 1e-12);
  CHECK(h2.matrix().cwiseAbs().sum() == Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(convolve_pair(fock_diagonal(3, 3), fock_diagonal(3, 3), 0.5), Error);
}

TEST_CASE("dense and diagonal paths agree on diagonal inputs") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    DiagonalState a = make_diagonal(testing_helpers::random_probs(rng, 5));
    DiagonalState b = make_diagonal(testing_helpers::random_probs(rng, 5));
    DiagonalState d = convolve_pair(a, b, 0.4, 10);
    DensityOperator m = convolve_pair(to_density(a), to_density(b), 0.4, 10);
    for (int k = 0; k <= 10; ++k) CHECK(std::abs(m.matrix()(k, k).real() - d.probs[k]) < 1e-12);
    CHECK(m.is_diagonal(1e-12));
  }
}

TEST_CASE("tensor oracle agrees with the fast routes") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 3; ++trial) {
    DensityOperator r = testing_helpers::random_dense(rng, 4);
    DensityOperator s = testing_helpers::random_dense(rng, 4);
    for (double eta : {0.5, 0.3}) {
      DensityOperator fast = convolve_pair(r, s, eta, 8);
      DensityOperator brute = tensor_oracle_pair(r, s, eta);
      CHECK(trace_distance(fast, brute) < 1e-10);
    }
  }
  DensityOperator o = tensor_oracle_nfold(fock_density(4, 1), 2, 4);
  CHECK(std::abs(o.matrix()(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(o.matrix()(2, 2) - 0.5) < 1e-12);
}

TEST_CASE("n-fold routes agree") {
  DiagonalState one = fock_diagonal(40, 1);
  NfoldOptions diag;
  NfoldOptions chr;
  chr.route = Route::CharPower;
  for (int n : {2, 4, 16}) {
    auto a = std::get<DiagonalState>(nfold_symmetric(one, n, diag));
    auto b = std::get<DiagonalState>(nfold_symmetric(one, n, chr));
    CHECK(diag_dist(a, b) < 1e-8);
  }
  NfoldOptions dbl;
  dbl.doubling = true;
  auto a16 = std::get<DiagonalState>(nfold_symmetric(one, 16, diag));
  auto d16 = std::get<DiagonalState>(nfold_symmetric(one, 16, dbl));
  CHECK(diag_dist(a16, d16) < 1e-12);
  CHECK(diag_dist(std::get<DiagonalState>(nfold_symmetric(one, 1, diag)), one) == 0.0);

  // heavy tail: keep the whole support of rho^n on the diagonal route
  MixtureDensity w = mixture_family(MixtureKind::Relent, 0.5);
  DiagonalState mix = mixture_diag(w, 100);
  NfoldOptions mchr = chr;
  mchr.radial_char = mixture_radial_char(w);
  mchr.exact_mean = mixture_mean(w);
  for (int n : {2, 3}) {
    NfoldOptions full = diag;
    full.cutoff = 100 * n;
    mchr.cutoff = 100 * n;
    auto a = std::get<DiagonalState>(nfold_symmetric(mix, n, full));
    auto b = std::get<DiagonalState>(nfold_symmetric(mix, n, mchr));
    double d = 0.0;
    for (int k = 0; k <= 30; ++k) d += std::abs(a.probs[k] - b.probs[k]);
    // the diagonal route sees the input without its tail; convolution contracts the trace norm
    CHECK(d <= n * mix.tail_mass + 1e-8);
  }
}

TEST_CASE("gaussian fixed point and covariance additivity") {
  DiagonalState th = thermal_diagonal(3.0, 60);
  for (int n : {2, 5, 16}) {
    auto r = std::get<DiagonalState>(nfold_symmetric(th, n));
    for (int k = 0; k <= 30; ++k) CHECK(std::abs(r.probs[k] - th.probs[k]) < 1e-12);
  }
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(9);
  amp(0) = amp(2) = 1.0 / std::sqrt(2.0);
  DensityOperator a = pure_density(8, amp);
  DensityOperator b = to_density(thermal_diagonal(2.0, 8));
  for (double eta : {0.5, 0.2}) {
    DensityOperator c = convolve_pair(a, b, eta, 16);
    RMatrix expect = eta * covariance(State(a)) + (1.0 - eta) * covariance(State(b));
    CHECK((covariance(State(c)) - expect).cwiseAbs().maxCoeff() < 1e-8);
  }
  DiagonalState one = fock_diagonal(64, 1);
  auto r16 = std::get<DiagonalState>(nfold_symmetric(one, 16));
  CHECK(gaussify(State(r16)).nu[0] == Approx(3.0).epsilon(1e-9));
}

TEST_CASE("sequence emits every grid point") {
  std::vector<int> seen;
  NfoldOptions o;
  nfold_sequence(fock_diagonal(20, 1), {1, 3, 8}, o, [&](int n, const State& s) {
    seen.push_back(n);
    auto d = std::get<DiagonalState>(s);
    double tr = 0.0;
    for (double p : d.probs) tr += p;
    CHECK(tr == Approx(1.0).epsilon(1e-10));
    if (n == 3) {
      auto direct = std::get<DiagonalState>(nfold_symmetric(fock_diagonal(20, 1), 3, o));
      CHECK(trace_distance(d, direct) < 1e-13);
    }
  });
  CHECK(seen == std::vector<int>{1, 3, 8});
}

TEST_CASE("char-power route on a dense state") {
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(7);
  amp(0) = amp(3) = 1.0 / std::sqrt(2.0);
  DensityOperator psi = pure_density(6, amp);
  NfoldOptions chr;
  chr.route = Route::CharPower;
  chr.cutoff = 12;
  auto c2 = std::get<DensityOperator>(nfold_symmetric(psi, 2, chr));
  DensityOperator o2 = tensor_oracle_nfold(psi, 2, 12);
  CHECK(trace_distance(c2, o2) < 1e-8);
}
