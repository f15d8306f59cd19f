#include "doctest.h"
#include "helpers.hpp"
#include "qclt/convolution.hpp"
#include "qclt/kernels.hpp"

using namespace qclt;
using doctest::Approx;

namespace {

// <j, N-j| U |k, l> by expanding (c x - s y)^k (s x + c y)^l in the creation operators
double bs_oracle(int j, int k, int l, double eta) {
  double c = std::sqrt(eta), s = std::sqrt(1.0 - eta);
  int N = k + l;
  std::vector<double> poly(N + 1, 0.0);  // coefficient of x^i y^{N-i}
  poly[0] = 1.0;
  int deg = 0;
  auto mul = [&](double ax, double ay) {
    std::vector<double> next(N + 1, 0.0);
    for (int i = 0; i <= deg; ++i) {
      next[i + 1] += ax * poly[i];
      next[i] += ay * poly[i];
    }
    poly = next;
    ++deg;
  };
  for (int i = 0; i < k; ++i) mul(c, -s);
  for (int i = 0; i < l; ++i) mul(s, c);
  double lf = std::lgamma(j + 1.0) + std::lgamma(N - j + 1.0) - std::lgamma(k + 1.0) - std::lgamma(l + 1.0);
  return poly[j] * std::exp(0.5 * lf);
}

}  // namespace

TEST_CASE("beam splitter amplitudes") {
  CHECK(bs_amplitude(1, 1, 0, 0.3) == Approx(std::sqrt(0.3)));
  CHECK(bs_amplitude(0, 1, 0, 0.3) == Approx(-std::sqrt(0.7)));
  CHECK(std::abs(bs_amplitude(1, 1, 1, 0.5)) < 1e-15);
  CHECK(bs_amplitude(0, 1, 1, 0.5) == Approx(-1.0 / std::sqrt(2.0)));
  CHECK(bs_amplitude(2, 1, 1, 0.5) == Approx(1.0 / std::sqrt(2.0)));
  for (double eta : {0.5, 0.2, 0.9})
    for (int k = 0; k <= 7; ++k)
      for (int l = 0; l <= 7; ++l)
        for (int j = 0; j <= k + l; ++j)
          CHECK(testing_helpers::close(bs_amplitude(j, k, l, eta), bs_oracle(j, k, l, eta), 1e-12, 1e-13));
}

TEST_CASE("beam splitter table unitarity") {
  kernels::BsTable t = kernels::bs_table_serial(0.37, 30);
  for (int N : {0, 5, 30, 60}) {
    // columns of each sector are orthonormal
    for (int k1 = std::max(0, N - 30); k1 <= std::min(N, 30); ++k1)
      for (int k2 = k1; k2 <= std::min(N, 30); ++k2) {
        double dot = 0.0;
        for (int j = 0; j <= N; ++j) dot += t.amp(j, k1, N - k1) * t.amp(j, k2, N - k2);
        CHECK(testing_helpers::close(dot, k1 == k2 ? 1.0 : 0.0, 0.0, 1e-11));
      }
  }
}

TEST_CASE("parallel kernels match the serial reference and ignore the thread count") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> u(3000), c(3000);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = 30.0 * u01(rng);
    c[i] = u01(rng) - 0.5;
  }
  std::vector<cd> z(700), cz(700);
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = cd(3 * u01(rng) - 1.5, 3 * u01(rng) - 1.5);
    cz[i] = cd(u01(rng), u01(rng));
  }
  auto p = testing_helpers::random_probs(rng, 40);
  auto q = testing_helpers::random_probs(rng, 40);
  DensityOperator ra = testing_helpers::random_dense(rng, 8), rb = testing_helpers::random_dense(rng, 8);
  auto f = [](cd w) { return std::exp(-std::norm(w)) * w; };

  auto rs = kernels::radial_invert_serial(u, c, 60);
  auto ls = kernels::lattice_invert_serial(z, cz, 10);
  auto ts = kernels::bs_table_serial(0.41, 40);
  auto ds = kernels::bs_apply_diag_serial(ts, p, q, 40);
  auto ms = kernels::bs_apply_dense_serial(ts, ra.matrix(), rb.matrix(), 8);
  auto ss = kernels::sample_serial(f, z);

  kernels::set_thread_count(1);
  auto rp1 = kernels::radial_invert_parallel(u, c, 60);
  auto lp1 = kernels::lattice_invert_parallel(z, cz, 10);
  auto dp1 = kernels::bs_apply_diag_parallel(ts, p, q, 40);
  auto mp1 = kernels::bs_apply_dense_parallel(ts, ra.matrix(), rb.matrix(), 8);
  for (int j = 0; j <= 60; ++j) CHECK(testing_helpers::close(rp1[j], rs[j], 1e-12, 1e-12));
  CHECK((lp1 - ls).cwiseAbs().maxCoeff() < 1e-12);
  for (int j = 0; j <= 40; ++j) CHECK(testing_helpers::close(dp1[j], ds[j], 1e-12, 1e-15));
  CHECK((mp1 - ms).cwiseAbs().maxCoeff() < 1e-13);

  for (int threads : {2, 3, 4}) {
    kernels::set_thread_count(threads);
    CHECK(kernels::radial_invert_parallel(u, c, 60) == rp1);
    CHECK(kernels::lattice_invert_parallel(z, cz, 10) == lp1);
    auto tp = kernels::bs_table_parallel(0.41, 40);
    bool same = true;
    for (int k = 0; k <= 40; ++k)
      for (int l = 0; l <= 40; ++l)
        for (int j = 0; j <= k + l; ++j) same = same && tp.amp(j, k, l) == ts.amp(j, k, l);
    CHECK(same);
    CHECK(kernels::bs_apply_diag_parallel(ts, p, q, 40) == dp1);
    CHECK(kernels::bs_apply_dense_parallel(ts, ra.matrix(), rb.matrix(), 8) == mp1);
    CHECK(kernels::sample_parallel(f, z) == ss);
  }
  kernels::set_thread_count(1);
}

TEST_CASE("radial inversion against the Laguerre closed form") {
  std::vector<double> u{0.1, 1.0, 4.0}, c{0.5, -0.25, 2.0};
  auto p = kernels::radial_invert_serial(u, c, 12);
  for (int j = 0; j <= 12; ++j) {
    double e = 0.0;
    for (int i = 0; i < 3; ++i) e += c[i] * std::exp(-u[i] / 2.0) * std::laguerre(j, u[i]);
    CHECK(testing_helpers::close(p[j], e, 1e-12, 1e-14));
  }
}

TEST_CASE("beam splitter table stays unitary at large cutoff") {
  for (double eta : {0.5, 1.0 / 200.0, 0.99}) {
    kernels::BsTable t = kernels::bs_table_parallel(eta, 200);
    double worst = 0.0, worst_edge = 0.0;
    for (int k : {0, 7, 120, 200})
      for (int l : {0, 33, 200}) {
        int N = k + l;
        double norm = 0.0;
        for (int j = 0; j <= N; ++j) norm += t.amp(j, k, l) * t.amp(j, k, l);
        worst = std::max(worst, std::abs(norm - 1.0));
        // all photons leave through the first port
        double ledge = 0.5 * k * std::log(eta) + 0.5 * l * std::log1p(-eta) +
                       0.5 * (std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(l + 1.0));
        double expect = std::exp(ledge);
        if (expect > 1e-200) worst_edge = std::max(worst_edge, std::abs(t.amp(N, k, l) / expect - 1.0));
      }
    CHECK(worst <= 1e-11);
    CHECK(worst_edge <= 1e-9);
    // orthogonality of two columns in a shared sector
    double dot = 0.0;
    for (int j = 0; j <= 300; ++j) dot += t.amp(j, 150, 150) * t.amp(j, 100, 200);
    CHECK(std::abs(dot) <= 1e-11);
  }
}
