#include "qclt/phase_space.hpp"

#include <cmath>
#include <numbers>

#include "qclt/kernels.hpp"

namespace qclt {

using std::numbers::pi;

PhaseGrid PhaseGrid::lattice(double R, double h) {
  if (!(R > 0.0) || !(h > 0.0)) fail(ErrorKind::InvalidArgument, "lattice needs R, h > 0");
  return PhaseGrid{Kind::Lattice, R, h, 0};
}

PhaseGrid PhaseGrid::radial(double R, double panel_width, int order) {
  if (!(R > 0.0) || !(panel_width > 0.0)) fail(ErrorKind::InvalidArgument, "radial grid needs R, width > 0");
  return PhaseGrid{Kind::Radial, R, panel_width, order};
}

PhaseGrid PhaseGrid::radial_for_cutoff(int K) {
  return radial(8.0 + std::sqrt(static_cast<double>(K)), std::min(0.5, 6.0 / std::sqrt(K + 1.0)));
}

int PhaseGrid::lattice_side() const { return 2 * static_cast<int>(std::llround(radius / step)) + 1; }

std::vector<cd> PhaseGrid::lattice_points() const {
  int n = lattice_side(), half = n / 2;
  std::vector<cd> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j) pts.emplace_back(i * step, j * step);
  return pts;
}

QuadRule PhaseGrid::radial_rule() const {
  int panels = std::max(1, static_cast<int>(std::ceil(radius / step)));
  return gauss_legendre(0.0, radius, panels, order);
}

cd char_fn(const FockOperator& t, std::span<const cd> z) {
  if (t.basis->modes() == 1) {
    Matrix D = displacement_block(z[0], t.basis->cutoff());
    return t.mat.transpose().cwiseProduct(D).sum();
  }
  Matrix D = displacement_matrix(z, *t.basis);
  return t.mat.transpose().cwiseProduct(D).sum();
}

double char_fn_radial(const DiagonalState& d, double r) {
  std::vector<double> l = scaled_laguerre(r * r, d.cutoff());
  double s = 0.0;
  for (std::size_t k = 0; k < d.probs.size(); ++k) s += d.probs[k] * l[k];
  return s;
}

RadialChar radial_char_of(const DiagonalState& d) {
  return [d](double r) { return char_fn_radial(d, r); };
}

cd char_fn(const State& rho, std::span<const cd> z) {
  if (auto* d = std::get_if<DiagonalState>(&rho)) return char_fn_radial(*d, std::abs(z[0]));
  return char_fn(std::get<DensityOperator>(rho).op(), z);
}

cd char_fn(const State& rho, cd z) { return char_fn(rho, std::span<const cd>(&z, 1)); }

CharSamples sample_char(const std::function<cd(cd)>& f, const PhaseGrid& grid) {
  if (grid.kind != PhaseGrid::Kind::Lattice) fail(ErrorKind::InvalidArgument, "lattice grid required");
  auto pts = grid.lattice_points();
  return CharSamples{grid, kernels::sample_parallel(f, pts)};
}

CharSamples sample_char(const State& rho, const PhaseGrid& grid) {
  if (state_modes(rho) != 1) fail(ErrorKind::UnsupportedModes, "phase-space grids are single-mode");
  if (auto* d = std::get_if<DiagonalState>(&rho)) {
    DiagonalState copy = *d;
    return sample_char([copy](cd z) { return cd(char_fn_radial(copy, std::abs(z)), 0.0); }, grid);
  }
  FockOperator op = std::get<DensityOperator>(rho).op();
  return sample_char([op](cd z) { return char_fn(op, std::span<const cd>(&z, 1)); }, grid);
}

namespace {

void check_edge_decay(const CharSamples& s) {
  int n = s.grid.lattice_side();
  double edge = 0.0;
  for (int i = 0; i < n; ++i) {
    edge = std::max(edge, std::abs(s.values[i]));
    edge = std::max(edge, std::abs(s.values[(n - 1) * n + i]));
    edge = std::max(edge, std::abs(s.values[i * n]));
    edge = std::max(edge, std::abs(s.values[i * n + n - 1]));
  }
  if (edge > 1e-6)
    fail(ErrorKind::GridTooCoarse, "characteristic function is " + std::to_string(edge) + " at the lattice edge");
}

double wigner_at(const CharSamples& s, const std::vector<cd>& pts, cd z) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // z conj(w) - conj(z) w = 2 i Im(z conj(w))
    double ph = 2.0 * (z * std::conj(pts[i])).imag();
    acc += s.values[i].real() * std::cos(ph) - s.values[i].imag() * std::sin(ph);
  }
  return acc * s.grid.cell_area() / (pi * pi);
}

}  // namespace

std::vector<double> wigner_from_samples(const CharSamples& s, std::span<const cd> points) {
  check_edge_decay(s);
  auto pts = s.grid.lattice_points();
  std::vector<cd> pv(points.begin(), points.end());
  auto w = kernels::sample_parallel([&](cd z) { return cd(wigner_at(s, pts, z), 0.0); }, pv);
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i].real();
  return out;
}

WignerGrid wigner_grid(const CharSamples& s, double half_width, double step) {
  WignerGrid g;
  g.half_width = half_width;
  g.step = step;
  auto out_pts = PhaseGrid::lattice(half_width, step).lattice_points();
  g.values = wigner_from_samples(s, out_pts);
  double sum = 0.0;
  for (double v : g.values) sum += v;
  g.normalisation = sum * step * step;
  double chi0 = s.values[s.values.size() / 2].real();
  if (std::abs(g.normalisation - chi0) > 1e-4)
    fail(ErrorKind::GridTooCoarse, "Wigner normalisation drift " + std::to_string(g.normalisation - chi0));
  return g;
}

double wigner_radial(const RadialChar& chi, double rho, const PhaseGrid& grid) {
  QuadRule q = grid.radial_rule();
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    acc += q.w[i] * q.x[i] * chi(q.x[i]) * std::cyl_bessel_j(0.0, 2.0 * rho * q.x[i]);
  return 2.0 / pi * acc;
}

double plancherel_residual(const FockOperator& t, const PhaseGrid& grid) {
  if (t.basis->modes() != 1) fail(ErrorKind::UnsupportedModes, "phase-space grids are single-mode");
  double hs = t.mat.squaredNorm();
  if (grid.kind == PhaseGrid::Kind::Radial) {
    if (!DensityOperator::unchecked(t.basis, t.mat).is_diagonal(0.0))
      fail(ErrorKind::InvalidArgument, "radial grid needs a Fock-diagonal operator");
    QuadRule q = grid.radial_rule();
    double acc = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      auto l = scaled_laguerre(q.x[i] * q.x[i], t.basis->cutoff());
      double c = 0.0;
      for (int k = 0; k <= t.basis->cutoff(); ++k) c += t.mat(k, k).real() * l[k];
      acc += q.w[i] * q.x[i] * c * c;
    }
    return std::abs(hs - 2.0 * acc);
  }
  FockOperator op = t;
  auto s = sample_char([op](cd z) { return char_fn(op, std::span<const cd>(&z, 1)); }, grid);
  double acc = 0.0;
  for (const cd& v : s.values) acc += std::norm(v);
  return std::abs(hs - acc * grid.cell_area() / pi);
}

double plancherel_residual(const State& rho, const PhaseGrid& grid) {
  if (auto* d = std::get_if<DiagonalState>(&rho)) return plancherel_residual(to_density(*d).op(), grid);
  return plancherel_residual(std::get<DensityOperator>(rho).op(), grid);
}

FockOperator ladder_sandwich(const FockOperator& t) {
  int m = t.basis->modes();
  auto big = make_basis(m, t.basis->cutoff() + m, t.basis->kind());
  auto n = static_cast<Eigen::Index>(big->size());
  FockOperator out{big, Matrix::Zero(n, n)};
  // (A^dag T A)_{ij} = prod_r sqrt(i_r j_r) T_{i-1, j-1}
  std::vector<long> src(n, -1);
  std::vector<double> fac(n, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<int> s = big->state(i);
    double f = 1.0;
    bool ok = true;
    for (int& v : s) {
      if (v == 0) { ok = false; break; }
      f *= std::sqrt(static_cast<double>(v));
      v -= 1;
    }
    if (!ok) continue;
    src[i] = t.basis->index(s);
    fac[i] = f;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (src[i] < 0) continue;
    for (Eigen::Index j = 0; j < n; ++j)
      if (src[j] >= 0) out.mat(i, j) = fac[i] * fac[j] * t.mat(src[i], src[j]);
  }
  return out;
}

double trace_norm_upper(const FockOperator& t, const PhaseGrid& grid) {
  int m = t.basis->modes();
  FockOperator x = ladder_sandwich(t);
  double integral;
  if (m == 1) {
    if (grid.kind != PhaseGrid::Kind::Lattice) fail(ErrorKind::InvalidArgument, "lattice grid required");
    auto s = sample_char([x](cd z) { return char_fn(x, std::span<const cd>(&z, 1)); }, grid);
    double acc = 0.0;
    for (const cd& v : s.values) acc += std::norm(v);
    integral = acc * grid.cell_area();
  } else {
    integral = std::pow(pi, m) * x.mat.squaredNorm();
  }
  return std::sqrt(std::pow(pi * pi / 6.0, m) * integral);
}

FockOperator invert_char(const CharSamples& s, int cutoff) {
  if (s.grid.kind != PhaseGrid::Kind::Lattice) fail(ErrorKind::InvalidArgument, "lattice grid required");
  if (cutoff > 0 && s.grid.step > pi / (4.0 * std::sqrt(static_cast<double>(cutoff))))
    fail(ErrorKind::GridTooCoarse, "lattice step too large for cutoff");
  check_edge_decay(s);
  auto pts = s.grid.lattice_points();
  std::vector<cd> c(s.values.size());
  double w = s.grid.cell_area() / pi;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = w * s.values[i];
  Matrix T = kernels::lattice_invert_parallel(pts, c, cutoff);
  return FockOperator{make_basis(1, cutoff), 0.5 * (T + T.adjoint())};
}

DiagonalState diagonal_from_radial_char(const RadialChar& chi, int cutoff, double exact_mean) {
  PhaseGrid g = PhaseGrid::radial_for_cutoff(cutoff);
  QuadRule q = g.radial_rule();
  std::vector<cd> r(q.x.begin(), q.x.end());
  auto vals = kernels::sample_parallel([&](cd x) { return cd(chi(x.real()), 0.0); }, r);
  std::vector<double> u(q.size()), c(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    u[i] = q.x[i] * q.x[i];
    c[i] = 2.0 * q.w[i] * q.x[i] * vals[i].real();
    if (!std::isfinite(c[i])) fail(ErrorKind::QuadratureDivergence, "non-finite characteristic function");
  }
  std::vector<double> p = kernels::radial_invert_parallel(u, c, cutoff);
  double sum = 0.0, first = 0.0;
  for (int k = 0; k <= cutoff; ++k) {
    if (!std::isfinite(p[k])) fail(ErrorKind::QuadratureDivergence, "non-finite Fock weight");
    if (p[k] < -1e-9) fail(ErrorKind::QuadratureDivergence, "Fock weight " + std::to_string(p[k]) + " at level " + std::to_string(k));
    if (p[k] < 0.0) p[k] = 0.0;
    sum += p[k];
    first += k * p[k];
  }
  DiagonalState d;
  d.probs = std::move(p);
  d.tail_mass = std::max(0.0, 1.0 - sum);
  d.tail_first_moment = exact_mean >= 0.0 ? std::max(0.0, exact_mean - first) : d.tail_mass * (cutoff + 1);
  return d;
}

}  // namespace qclt
