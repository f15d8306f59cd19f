#include "qclt/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "qclt/special.hpp"

namespace qclt::kernels {

namespace {

int& threads_ref() {
  static int n = [] {
    int t = omp_get_max_threads();
    if (const char* env = std::getenv("QCLT_THREADS")) {
      int v = std::atoi(env);
      if (v > 0) t = std::min(t, v);
    }
    return std::max(t, 1);
  }();
  return n;
}

std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

}  // namespace

int thread_count() { return threads_ref(); }
void set_thread_count(int n) { threads_ref() = std::max(1, n); }

std::vector<double> radial_invert_serial(std::span<const double> u, std::span<const double> c, int K) {
  std::vector<double> p(K + 1, 0.0), l(K + 1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (c[i] == 0.0) continue;
    scaled_laguerre(u[i], K, l.data());
    for (int j = 0; j <= K; ++j) p[j] += c[i] * l[j];
  }
  return p;
}

std::vector<double> radial_invert_parallel(std::span<const double> u, std::span<const double> c, int K) {
  std::size_t nc = chunk_count(u.size());
  std::vector<std::vector<double>> part(nc);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (std::size_t b = 0; b < nc; ++b) {
    std::size_t lo = b * kChunk, hi = std::min(u.size(), lo + kChunk);
    part[b] = radial_invert_serial(u.subspan(lo, hi - lo), c.subspan(lo, hi - lo), K);
  }
  std::vector<double> p(K + 1, 0.0);
  for (const auto& v : part)
    for (int j = 0; j <= K; ++j) p[j] += v[j];
  return p;
}

Matrix lattice_invert_serial(std::span<const cd> z, std::span<const cd> c, int K) {
  Matrix T = Matrix::Zero(K + 1, K + 1);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (c[i] == 0.0) continue;
    T += c[i] * displacement_block(-z[i], K);
  }
  return T;
}

Matrix lattice_invert_parallel(std::span<const cd> z, std::span<const cd> c, int K) {
  std::size_t nc = chunk_count(z.size());
  std::vector<Matrix> part(nc);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (std::size_t b = 0; b < nc; ++b) {
    std::size_t lo = b * kChunk, hi = std::min(z.size(), lo + kChunk);
    part[b] = lattice_invert_serial(z.subspan(lo, hi - lo), c.subspan(lo, hi - lo), K);
  }
  Matrix T = Matrix::Zero(K + 1, K + 1);
  for (const auto& m : part) T += m;
  return T;
}

std::vector<cd> sample_serial(const std::function<cd(cd)>& f, std::span<const cd> z) {
  std::vector<cd> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = f(z[i]);
  return out;
}

std::vector<cd> sample_parallel(const std::function<cd(cd)>& f, std::span<const cd> z) {
  std::vector<cd> out(z.size());
  auto n = static_cast<long>(z.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(thread_count())
  for (long i = 0; i < n; ++i) out[i] = f(z[i]);
  return out;
}

BsTable::BsTable(double eta, int K) : eta_(eta), K_(K) {
  offset_.resize((K + 1) * (K + 1));
  std::size_t off = 0;
  for (int k = 0; k <= K; ++k)
    for (int l = 0; l <= K; ++l) {
      offset_[k * (K + 1) + l] = off;
      off += k + l + 1;
    }
  data_.assign(off, 0.0);
}

namespace {

// <j, N-j|U|k, l> over j is the eigenvector, with eigenvalue k, of the
// tridiagonal matrix of U n_1 U^dag on the N-photon sector. Forward
// recurrence from j = 0 and backward from j = N are each stable up to the
// allowed region; they are joined around the mean eta k + (1-eta) l.
void fill_sector(BsTable& t, int k, int l) {
  const double eta = t.eta();
  const int N = k + l;
  double* c = t.sector(k, l);
  if (eta >= 1.0 || eta <= 0.0) {
    for (int j = 0; j <= N; ++j) c[j] = 0.0;
    if (eta >= 1.0) c[k] = 1.0;
    else c[l] = (k % 2) ? -1.0 : 1.0;
    return;
  }
  const double tc = std::sqrt(eta * (1.0 - eta));
  auto diag = [&](int j) { return eta * j + (1.0 - eta) * (N - j) - k; };
  auto off = [&](int j) { return -tc * std::sqrt((j + 1.0) * (N - j)); };  // couples j and j+1
  if (N == 0) {
    c[0] = 1.0;
    return;
  }
  int js = static_cast<int>(std::lround(eta * k + (1.0 - eta) * l));
  js = std::clamp(js, 1, N - 1 > 0 ? N - 1 : 1);
  int jf = std::min(js + 1, N), jb = std::max(js - 1, 0);

  std::vector<double> f(jf + 1), g(N + 1);
  f[0] = 1.0;
  if (jf >= 1) f[1] = -diag(0) * f[0] / off(0);
  for (int j = 1; j < jf; ++j) {
    f[j + 1] = (-diag(j) * f[j] - off(j - 1) * f[j - 1]) / off(j);
    if (std::abs(f[j + 1]) > 1e100)
      for (int i = 0; i <= j + 1; ++i) f[i] *= 1e-100;
  }
  g[N] = 1.0;
  g[N - 1] = -diag(N) * g[N] / off(N - 1);
  for (int j = N - 1; j > jb; --j) {
    g[j - 1] = (-diag(j) * g[j] - off(j) * g[j + 1]) / off(j - 1);
    if (std::abs(g[j - 1]) > 1e100)
      for (int i = j - 1; i <= N; ++i) g[i] *= 1e-100;
  }
  double fg = 0.0, gg = 0.0;
  for (int j = jb; j <= jf; ++j) {
    fg += f[j] * g[j];
    gg += g[j] * g[j];
  }
  double lam = fg / gg;
  double peak = 0.0;
  for (int j = 0; j <= N; ++j) {
    c[j] = j <= js ? f[j] : lam * g[j];
    peak = std::max(peak, std::abs(c[j]));
  }
  double norm = 0.0;
  for (int j = 0; j <= N; ++j) {
    c[j] /= peak;
    norm += c[j] * c[j];
  }
  // all photons in mode 1 carry the amplitude eta^{k/2} (1-eta)^{l/2} sqrt(N!/(k! l!)) > 0
  double scale = (lam < 0.0 ? -1.0 : 1.0) / std::sqrt(norm);
  for (int j = 0; j <= N; ++j) c[j] *= scale;
}

}  // namespace

BsTable bs_table_serial(double eta, int K) {
  BsTable t(eta, K);
  for (int k = 0; k <= K; ++k)
    for (int l = 0; l <= K; ++l) fill_sector(t, k, l);
  return t;
}

BsTable bs_table_parallel(double eta, int K) {
  BsTable t(eta, K);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (int k = 0; k <= K; ++k)
    for (int l = 0; l <= K; ++l) fill_sector(t, k, l);
  return t;
}

namespace {

double diag_entry(const BsTable& t, std::span<const double> p, std::span<const double> q, int j) {
  int Kp = static_cast<int>(p.size()) - 1, Kq = static_cast<int>(q.size()) - 1;
  double s = 0.0;
  for (int k = 0; k <= Kp; ++k) {
    if (p[k] == 0.0) continue;
    double sk = 0.0;
    for (int l = std::max(0, j - k); l <= Kq; ++l) {
      if (q[l] == 0.0) continue;
      double a = t.sector(k, l)[j];
      sk += q[l] * a * a;
    }
    s += p[k] * sk;
  }
  return s;
}

void check_table(const BsTable& t, std::size_t np, std::size_t nq) {
  if (static_cast<int>(std::max(np, nq)) > t.cutoff() + 1)
    fail(ErrorKind::InvalidArgument, "beam-splitter table smaller than input cutoff");
}

}  // namespace

std::vector<double> bs_apply_diag_serial(const BsTable& t, std::span<const double> p,
                                         std::span<const double> q, int Kout) {
  check_table(t, p.size(), q.size());
  std::vector<double> r(Kout + 1);
  for (int j = 0; j <= Kout; ++j) r[j] = diag_entry(t, p, q, j);
  return r;
}

std::vector<double> bs_apply_diag_parallel(const BsTable& t, std::span<const double> p,
                                           std::span<const double> q, int Kout) {
  check_table(t, p.size(), q.size());
  std::vector<double> r(Kout + 1);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (int j = 0; j <= Kout; ++j) r[j] = diag_entry(t, p, q, j);
  return r;
}

namespace {

void dense_row(const BsTable& t, const Matrix& rho, const Matrix& sigma, int Kout, int j, Matrix& out) {
  int Kr = static_cast<int>(rho.rows()) - 1, Ks = static_cast<int>(sigma.rows()) - 1;
  for (int k = 0; k <= Kr; ++k)
    for (int l = std::max(0, j - k); l <= Ks; ++l) {
      double a = t.sector(k, l)[j];
      if (a == 0.0) continue;
      int jp = k + l - j;
      for (int kt = 0; kt <= Kr; ++kt) {
        cd r = rho(k, kt);
        if (r == 0.0) continue;
        int lt_lo = std::max(0, jp - kt);
        int lt_hi = std::min(Ks, Kout + jp - kt);
        for (int lt = lt_lo; lt <= lt_hi; ++lt) {
          cd s = sigma(l, lt);
          if (s == 0.0) continue;
          int jt = kt + lt - jp;
          out(j, jt) += r * s * (a * t.sector(kt, lt)[jt]);
        }
      }
    }
}

}  // namespace

Matrix bs_apply_dense_serial(const BsTable& t, const Matrix& rho, const Matrix& sigma, int Kout) {
  check_table(t, rho.rows(), sigma.rows());
  Matrix out = Matrix::Zero(Kout + 1, Kout + 1);
  for (int j = 0; j <= Kout; ++j) dense_row(t, rho, sigma, Kout, j, out);
  return out;
}

Matrix bs_apply_dense_parallel(const BsTable& t, const Matrix& rho, const Matrix& sigma, int Kout) {
  check_table(t, rho.rows(), sigma.rows());
  Matrix out = Matrix::Zero(Kout + 1, Kout + 1);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (int j = 0; j <= Kout; ++j) dense_row(t, rho, sigma, Kout, j, out);
  return out;
}

}  // namespace qclt::kernels
