#include "qclt/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>

namespace qclt {

Route parse_route(const std::string& s) {
  if (s == "diagonal" || s == "diagonal-inductive") return Route::DiagonalInductive;
  if (s == "char" || s == "char-power") return Route::CharPower;
  if (s == "oracle" || s == "tensor-oracle") return Route::TensorOracle;
  fail(ErrorKind::InvalidArgument, "unknown route '" + s + "'");
}

std::string route_name(Route r) {
  switch (r) {
    case Route::DiagonalInductive: return "diagonal";
    case Route::CharPower: return "char";
    case Route::TensorOracle: return "oracle";
  }
  return "?";
}

double bs_amplitude(int j, int k, int l, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorKind::InvalidArgument, "eta outside [0,1]");
  if (k < 0 || l < 0) fail(ErrorKind::InvalidArgument, "negative photon number");
  if (j < 0 || j > k + l) return 0.0;
  int K = std::max(k, l);
  return bs_kernel(eta, K)->amp(j, k, l);
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::mutex cache_mutex;
std::map<std::pair<double, int>, std::shared_ptr<const kernels::BsTable>> cache;

}  // namespace

std::shared_ptr<const kernels::BsTable> bs_kernel(double eta, int K) {
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.lower_bound({eta, K});
    if (it != cache.end() && it->first.first == eta) return it->second;
  }
  auto t = std::make_shared<const kernels::BsTable>(kernels::bs_table_parallel(eta, K));
  std::lock_guard<std::mutex> lock(cache_mutex);
  if (cache.size() > 16) cache.clear();
  cache[{eta, K}] = t;
  return t;
}

void clear_kernel_cache() {
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.clear();
}

namespace {

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorKind::InvalidArgument, "eta outside [0,1]");
}

}  // namespace

DiagonalState convolve_pair(const DiagonalState& rho, const DiagonalState& sigma, double eta, int cutoff) {
  check_eta(eta);
  int K = std::max(rho.cutoff(), sigma.cutoff());
  int Kout = cutoff < 0 ? K : cutoff;
  auto table = bs_kernel(eta, K);
  std::vector<double> r = kernels::bs_apply_diag_parallel(*table, rho.probs, sigma.probs, Kout);
  double in = rho.retained_trace() * sigma.retained_trace();
  double out = 0.0, first = 0.0;
  for (int j = 0; j <= Kout; ++j) {
    out += r[j];
    first += j * r[j];
  }
  if (in - out > 1e-9)
    fail(ErrorKind::CutoffTooSmall, "convolution pushes " + sci(in - out) + " above the cutoff");
  DiagonalState d;
  d.probs = std::move(r);
  d.tail_mass = std::max(0.0, 1.0 - out);
  double mean = eta * rho.mean_photon_number() + (1.0 - eta) * sigma.mean_photon_number();
  d.tail_first_moment = std::max(0.0, mean - first);
  return d;
}

DensityOperator convolve_pair(const DensityOperator& rho, const DensityOperator& sigma, double eta, int cutoff) {
  check_eta(eta);
  if (rho.modes() != 1 || sigma.modes() != 1)
    fail(ErrorKind::UnsupportedModes, "dense convolution is single-mode");
  int K = std::max(rho.cutoff(), sigma.cutoff());
  int Kout = cutoff < 0 ? K : cutoff;
  auto table = bs_kernel(eta, K);
  Matrix out = kernels::bs_apply_dense_parallel(*table, rho.matrix(), sigma.matrix(), Kout);
  double in = rho.matrix().trace().real() * sigma.matrix().trace().real();
  double tr = out.trace().real();
  if (in - tr > 1e-9)
    fail(ErrorKind::CutoffTooSmall, "convolution pushes " + sci(in - tr) + " above the cutoff");
  return DensityOperator(make_basis(1, Kout), out, std::max(0.0, 1.0 - tr));
}

namespace {

DensityOperator density_from_inversion(const FockOperator& t) {
  auto ev = hermitian_eigenvalues(t.mat);
  if (ev.front() < -1e-8)
    fail(ErrorKind::NumericalFailure, "inverted state has eigenvalue " + sci(ev.front()));
  double tr = t.mat.trace().real();
  if (tr > 1.0 + 1e-8) fail(ErrorKind::NumericalFailure, "inverted state has trace above one");
  return DensityOperator::unchecked(t.basis, t.mat, std::max(0.0, 1.0 - tr));
}

// widen the lattice (same spacing) until |chi| stays below kTail on a ring
// of probes beyond the radius; the requested radius is a lower bound
constexpr double kTail = 1e-10;
constexpr double kMaxRadius = 24.0;

PhaseGrid lattice_for(const std::function<cd(cd)>& chi, const PhaseGrid& base) {
  auto ring_max = [&](double R) {
    double m = 0.0;
    for (double r = R; r <= R + 4.0; r += 0.25)
      for (int a = 0; a < 64; ++a) m = std::max(m, std::abs(chi(std::polar(r, 2.0 * std::numbers::pi * a / 64.0))));
    return m;
  };
  double R = base.radius;
  while (R < kMaxRadius && ring_max(R) > kTail) R += 1.0;
  return R == base.radius ? base : PhaseGrid::lattice(R, base.step);
}

State char_power(const State& rho, int n, const NfoldOptions& opts, int K) {
  double sn = std::sqrt(static_cast<double>(n));
  if (auto* d = std::get_if<DiagonalState>(&rho)) {
    RadialChar chi = opts.radial_char ? opts.radial_char : radial_char_of(*d);
    double mean = opts.exact_mean >= 0.0 ? opts.exact_mean : d->mean_photon_number();
    return diagonal_from_radial_char([&](double r) { return std::pow(chi(r / sn), n); }, K, mean);
  }
  const auto& dm = std::get<DensityOperator>(rho);
  if (dm.modes() != 1) fail(ErrorKind::UnsupportedModes, "char-power route is single-mode");
  FockOperator op = dm.op();
  auto chi_n = [&](cd z) {
    cd w = z / sn;
    return std::pow(char_fn(op, std::span<const cd>(&w, 1)), n);
  };
  return density_from_inversion(invert_char(sample_char(chi_n, lattice_for(chi_n, opts.lattice)), K));
}

State diag_step(const State& acc, const State& rho, double eta, int K) {
  if (auto* a = std::get_if<DiagonalState>(&acc)) return convolve_pair(*a, std::get<DiagonalState>(rho), eta, K);
  return convolve_pair(std::get<DensityOperator>(acc), std::get<DensityOperator>(rho), eta, K);
}

State crop(const DensityOperator& rho, int K) {
  if (rho.cutoff() == K) return rho;
  auto b = make_basis(1, K);
  FockOperator e = embed(rho.op(), b);
  return DensityOperator(b, e.mat, std::max(0.0, 1.0 - e.mat.trace().real()));
}

}  // namespace

State nfold_symmetric(const State& rho, int n, const NfoldOptions& opts) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "n must be >= 1");
  int K = opts.cutoff < 0 ? state_cutoff(rho) : opts.cutoff;
  switch (opts.route) {
    case Route::CharPower:
      return char_power(rho, n, opts, K);
    case Route::TensorOracle: {
      const DensityOperator dm = std::holds_alternative<DiagonalState>(rho)
                                     ? to_density(std::get<DiagonalState>(rho))
                                     : std::get<DensityOperator>(rho);
      DensityOperator out = tensor_oracle_nfold(dm, n, K);
      if (std::holds_alternative<DiagonalState>(rho)) return to_diagonal(out);
      return out;
    }
    case Route::DiagonalInductive: {
      if (state_cutoff(rho) > 256) fail(ErrorKind::RouteUnavailable, "diagonal-inductive route limited to cutoff 256");
      State base = rho;
      if (auto* dm = std::get_if<DensityOperator>(&rho)) base = crop(*dm, K);
      if (opts.doubling && (n & (n - 1)) == 0) {
        State acc = base;
        for (int m = 1; m < n; m *= 2) acc = diag_step(acc, acc, 0.5, K);
        return acc;
      }
      State acc = base;
      for (int k = 2; k <= n; ++k) acc = diag_step(acc, base, 1.0 - 1.0 / k, K);
      return acc;
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown route");
}

void nfold_sequence(const State& rho, const std::vector<int>& ns, const NfoldOptions& opts,
                    const std::function<void(int, const State&)>& emit) {
  if (opts.route != Route::DiagonalInductive || opts.doubling) {
    for (int n : ns) emit(n, nfold_symmetric(rho, n, opts));
    return;
  }
  if (state_cutoff(rho) > 256) fail(ErrorKind::RouteUnavailable, "diagonal-inductive route limited to cutoff 256");
  int K = opts.cutoff < 0 ? state_cutoff(rho) : opts.cutoff;
  State base = rho;
  if (auto* dm = std::get_if<DensityOperator>(&rho)) base = crop(*dm, K);
  State acc = base;
  int k = 1;
  for (int n : ns) {
    if (n < k) fail(ErrorKind::InvalidArgument, "n grid must be ascending");
    for (; k < n; ++k) acc = diag_step(acc, base, 1.0 - 1.0 / (k + 1), K);
    emit(n, acc);
  }
}

DensityOperator tensor_oracle_pair(const DensityOperator& rho, const DensityOperator& sigma, double eta) {
  check_eta(eta);
  if (rho.modes() != 1 || sigma.modes() != 1) fail(ErrorKind::UnsupportedModes, "oracle is single-mode");
  int Kr = rho.cutoff(), Ks = sigma.cutoff(), Kt = Kr + Ks;
  int d = Kt + 1;
  auto idx = [d](int i1, int i2) { return i1 * d + i2; };
  Matrix U = Matrix::Zero(d * d, d * d);
  double theta = std::acos(std::sqrt(eta));
  for (int N = 0; N <= Kt; ++N) {
    // G = theta (a1^dag a2 - a2^dag a1) on |j, N-j>
    Matrix H = Matrix::Zero(N + 1, N + 1);
    for (int j = 0; j < N; ++j) {
      double g = theta * std::sqrt((j + 1.0) * (N - j));
      // <j+1| G |j> = g, <j| G |j+1> = -g; H = i G
      H(j + 1, j) = cd(0.0, g);
      H(j, j + 1) = cd(0.0, -g);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    Eigen::VectorXcd ph(N + 1);
    for (int i = 0; i <= N; ++i) ph(i) = std::exp(cd(0.0, -es.eigenvalues()(i)));
    Matrix B = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    for (int a = 0; a <= N; ++a)
      for (int b = 0; b <= N; ++b) U(idx(a, N - a), idx(b, N - b)) = B(a, b);
  }
  Matrix in = Matrix::Zero(d * d, d * d);
  for (int i1 = 0; i1 <= Kr; ++i1)
    for (int j1 = 0; j1 <= Kr; ++j1) {
      cd r = rho.matrix()(i1, j1);
      if (r == 0.0) continue;
      for (int i2 = 0; i2 <= Ks; ++i2)
        for (int j2 = 0; j2 <= Ks; ++j2) in(idx(i1, i2), idx(j1, j2)) = r * sigma.matrix()(i2, j2);
    }
  Matrix full = U * in * U.adjoint();
  Matrix out = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cd s = 0.0;
      for (int k = 0; k < d; ++k) s += full(idx(i, k), idx(j, k));
      out(i, j) = s;
    }
  out = 0.5 * (out + out.adjoint());
  return DensityOperator(make_basis(1, Kt), out, std::max(0.0, 1.0 - out.trace().real()));
}

DensityOperator tensor_oracle_nfold(const DensityOperator& rho, int n, int cutoff) {
  if (n < 1 || n > 3) fail(ErrorKind::RouteUnavailable, "tensor oracle supports n <= 3");
  if (rho.cutoff() > 12) fail(ErrorKind::RouteUnavailable, "tensor oracle supports cutoff <= 12");
  int K = cutoff < 0 ? rho.cutoff() : cutoff;
  DensityOperator acc = rho;
  if (n >= 2) acc = tensor_oracle_pair(rho, rho, 0.5);
  if (n == 3) acc = tensor_oracle_pair(acc, rho, 2.0 / 3.0);
  return std::get<DensityOperator>(crop(acc, K));
}

}  // namespace qclt
