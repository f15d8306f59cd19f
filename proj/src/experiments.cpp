#include "qclt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "qclt/entropy_bound.hpp"
#include "qclt/gaussian.hpp"
#include "qclt/io.hpp"

namespace qclt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool wants(const std::vector<Metric>& which, Metric m) {
  return std::find(which.begin(), which.end(), m) != which.end();
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::Trace: return "trace";
    case Metric::Relent: return "relent";
    case Metric::Hs: return "hs";
  }
  return "?";
}

std::string csv_field(double v) { return std::isnan(v) ? std::string() : fmt_double(v == 0.0 ? 0.0 : v); }

RateScanRecord make_record(int n, const MetricSet& m, long ms) {
  RateScanRecord r;
  r.n = n;
  r.trace_dist = m.trace_dist;
  r.relent = m.relent;
  r.hs_dist = m.hs_dist;
  r.sqrt_n_scaled = std::sqrt(static_cast<double>(n)) * m.trace_dist;
  r.n_scaled = n * m.relent;
  r.wall_ms = ms;
  return r;
}

nlohmann::json constants_json(const BoundConstants& c) {
  return {{"nu_beta", c.nu_beta},        {"eta_beta", c.eta_beta}, {"zeta", c.zeta},
          {"c_prime", c.c_prime},        {"c_double_prime", c.c_double_prime},
          {"m_beta_e", c.m_beta_e},      {"s_tau", c.s_tau},       {"c_final", c.c_final}};
}

}  // namespace

MetricSet gaussian_metrics(const State& conv, const State& input, const std::vector<Metric>& which) {
  MetricSet out{kNaN, kNaN, kNaN};
  GaussifyResult g = gaussify(input);
  if (auto* d = std::get_if<DiagonalState>(&conv)) {
    double nu = g.nu.front();
    DiagonalState ref = thermal_diagonal(nu, d->cutoff());
    if (wants(which, Metric::Trace)) out.trace_dist = trace_distance(*d, ref);
    if (wants(which, Metric::Relent)) out.relent = relative_entropy_to_thermal(*d, nu);
    if (wants(which, Metric::Hs)) out.hs_dist = hs_distance(*d, ref);
    return out;
  }
  DensityOperator rho = std::get<DensityOperator>(conv);
  std::vector<double> nu = g.nu;
  if (!g.thermal) {
    // all three metrics are unitarily invariant; undo the Williamson squeeze
    if (rho.modes() != 1) fail(ErrorKind::UnsupportedCovariance, "non-thermal reference is single-mode only");
    Williamson w = williamson_1mode(g.spec.cov);
    int K = rho.cutoff() + static_cast<int>(std::ceil(10.0 * w.r * (w.nu + 1.0))) + 8;
    rho = apply_gaussian_unitary(rho, w.r, w.phi, K, true);
    nu = {w.nu};
  }
  ThermalSpec tau = ThermalSpec::from_nu(nu);
  DensityOperator ref = thermal_fock(tau, rho.cutoff(), 1.0);
  if (wants(which, Metric::Trace)) out.trace_dist = trace_distance(rho, ref);
  if (wants(which, Metric::Relent)) out.relent = relent_to_thermal(rho, tau);
  if (wants(which, Metric::Hs)) out.hs_dist = (rho.matrix() - ref.matrix()).norm();
  return out;
}

std::vector<RateScanRecord> rate_scan(const ScanConfig& cfg) {
  if (cfg.n_grid.empty()) fail(ErrorKind::InvalidArgument, "empty n grid");
  if (cfg.metrics.empty()) fail(ErrorKind::InvalidArgument, "metrics must be nonempty");
  if (cfg.cutoff < 8) fail(ErrorKind::InvalidArgument, "cutoff must be >= 8");
  PreparedState ps = prepare_state(cfg.state_spec, cfg.cutoff);
  bool diag = std::holds_alternative<DiagonalState>(ps.state);
  NfoldOptions opts;
  opts.route = cfg.route ? *cfg.route
               : (diag && !ps.mixture) ? Route::DiagonalInductive
                                       : Route::CharPower;
  opts.cutoff = cfg.state_spec.rfind("file:", 0) == 0 ? -1 : cfg.cutoff;
  opts.lattice = PhaseGrid::lattice(cfg.grid_radius, cfg.grid_step);
  opts.radial_char = ps.radial_char;
  opts.exact_mean = ps.exact_mean;
  std::vector<RateScanRecord> out;
  auto t0 = std::chrono::steady_clock::now();
  nfold_sequence(ps.state, cfg.n_grid, opts, [&](int n, const State& s) {
    MetricSet m = gaussian_metrics(s, ps.state, cfg.metrics);
    auto t1 = std::chrono::steady_clock::now();
    long ms = cfg.timing ? static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count())
                         : 0;
    t0 = t1;
    out.push_back(make_record(n, m, ms));
  });
  return out;
}

std::string config_line(const ScanConfig& cfg) {
  std::ostringstream os;
  os << "state=" << cfg.state_spec << " n_grid=";
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) os << (i ? "," : "") << cfg.n_grid[i];
  os << " metrics=";
  for (std::size_t i = 0; i < cfg.metrics.size(); ++i) os << (i ? "," : "") << metric_name(cfg.metrics[i]);
  os << " route=" << (cfg.route ? route_name(*cfg.route) : std::string("auto")) << " cutoff=" << cfg.cutoff
     << " grid_radius=" << fmt_double(cfg.grid_radius) << " grid_step=" << fmt_double(cfg.grid_step)
     << " seed=" << cfg.seed;
  return os.str();
}

void write_rates_csv(std::ostream& os, const std::string& config, const std::vector<RateScanRecord>& recs) {
  os << "# config: " << config << "\n";
  os << "n,trace_dist,relent,hs_dist,sqrt_n_scaled,n_scaled,wall_ms\n";
  for (const auto& r : recs)
    os << r.n << ',' << csv_field(r.trace_dist) << ',' << csv_field(r.relent) << ',' << csv_field(r.hs_dist) << ','
       << csv_field(r.sqrt_n_scaled) << ',' << csv_field(r.n_scaled) << ',' << r.wall_ms << "\n";
}

std::string gnuplot_template(const std::string& csv_path, bool counterexample) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set xlabel 'n'\n"
     << "set key left bottom\n";
  if (counterexample) {
    os << "plot '" << csv_path << "' using 1:5 with linespoints title 'sqrt(n) trace', \\\n"
       << "     '' using 1:6 with linespoints title 'n relent'\n";
  } else {
    os << "plot '" << csv_path << "' using 1:2 with linespoints title 'trace', \\\n"
       << "     '' using 1:3 with linespoints title 'relent', \\\n"
       << "     '' using 1:(0.5/sqrt($1)) with lines dt 2 title 'n^{-1/2}', \\\n"
       << "     '' using 1:(1.0/$1) with lines dt 3 title 'n^{-1}'\n";
  }
  return os.str();
}

SlopeFit slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorKind::InvalidArgument, "x and y sizes differ");
  if (x.size() < 4) fail(ErrorKind::DegenerateFit, "need at least 4 points");
  std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !std::isfinite(y[i]) || !(y[i] > 1e-14))
      fail(ErrorKind::DegenerateFit, "points must be positive and finite with y > 1e-14");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorKind::DegenerateFit, "x values are all equal");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = ly[i] - f.intercept - f.slope * lx[i];
    ssr += r * r;
  }
  f.stderr_ = std::sqrt(ssr / (n - 2) / sxx);
  return f;
}

SlopeFit slope_fit(const std::vector<RateScanRecord>& recs, Metric m, std::size_t first, std::size_t last) {
  last = std::min(last, recs.size());
  std::vector<double> x, y;
  for (std::size_t i = first; i < last; ++i) {
    x.push_back(recs[i].n);
    y.push_back(m == Metric::Trace ? recs[i].trace_dist : m == Metric::Relent ? recs[i].relent : recs[i].hs_dist);
  }
  return slope_fit(x, y);
}

// values at or below this are treated as zero
constexpr double kNumericalZero = 1e-9;

bool increasing_verdict(const std::vector<double>& s) {
  if (s.size() < 2) return false;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (!(s[i + 1] > 0.99 * s[i]) || !(s[i + 1] > kNumericalZero)) return false;
  return true;
}

CounterexampleScan counterexample_scan(const MixtureDensity& w, const std::vector<int>& n_grid, int cutoff,
                                       bool timing) {
  if (n_grid.empty()) fail(ErrorKind::InvalidArgument, "empty n grid");
  DiagonalState rho = mixture_diag(w, cutoff);
  NfoldOptions opts;
  opts.route = Route::CharPower;
  opts.cutoff = cutoff;
  opts.radial_char = mixture_radial_char(w);
  opts.exact_mean = mixture_mean(w);
  CounterexampleScan out;
  std::vector<Metric> which{Metric::Trace, Metric::Relent, Metric::Hs};
  auto t0 = std::chrono::steady_clock::now();
  nfold_sequence(rho, n_grid, opts, [&](int n, const State& s) {
    MetricSet m = gaussian_metrics(s, rho, which);
    auto t1 = std::chrono::steady_clock::now();
    long ms = timing ? static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()) : 0;
    t0 = t1;
    out.records.push_back(make_record(n, m, ms));
    out.scaled.push_back(w.kind == MixtureKind::Relent ? out.records.back().n_scaled
                                                       : out.records.back().sqrt_n_scaled);
  });
  out.verdict = increasing_verdict(out.scaled);
  return out;
}

std::vector<State> audit_states(std::uint64_t seed, int count, int cutoff) {
  if (count < 1) fail(ErrorKind::InvalidArgument, "count must be >= 1");
  if (cutoff < 1) fail(ErrorKind::InvalidArgument, "cutoff must be >= 1");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 0.3);
  std::vector<State> out;
  for (int i = 0; i < count; ++i) {
    std::vector<double> p(cutoff + 1);
    double s = 0.0;
    for (auto& v : p) s += (v = expo(rng));
    for (auto& v : p) v /= s;
    if (i % 2 == 0) {
      out.emplace_back(make_diagonal(std::move(p)));
      continue;
    }
    Eigen::VectorXcd psi(cutoff + 1);
    for (int k = 0; k <= cutoff; ++k) psi(k) = cd(normal(rng), normal(rng));
    psi.normalize();
    double eps = unif(rng);
    Matrix m = Matrix::Zero(cutoff + 1, cutoff + 1);
    for (int k = 0; k <= cutoff; ++k) m(k, k) = (1.0 - eps) * p[k];
    m += eps * psi * psi.adjoint();
    m = 0.5 * (m + m.adjoint()).eval();
    out.emplace_back(build_density(1, cutoff, m));
  }
  return out;
}

nlohmann::json bound_audit(std::uint64_t seed, int count, int cutoff, const std::optional<std::string>& state_spec) {
  std::vector<State> states;
  if (state_spec) {
    states.push_back(prepare_state(*state_spec, cutoff).state);
    count = 1;
  } else {
    states = audit_states(seed, count, cutoff);
  }
  // fixed reference and perturbation for the tau_alpha check
  ThermalSpec tau2 = ThermalSpec::from_nu({2.0});
  Polynomial ep{1, {}};
  ep.terms[{1, 0}] = cd(0.0, 0.1);
  ep.terms[{0, 1}] = cd(0.0, 0.1);
  OddPolynomial E(ep);
  const double alpha = 0.05;

  nlohmann::json failures = nlohmann::json::array(), entries = nlohmann::json::array();
  double worst = std::numeric_limits<double>::infinity();
  BoundConstants worst_constants;
  auto consider = [&](double margin, const BoundConstants& c) {
    if (margin < worst) {
      worst = margin;
      worst_constants = c;
    }
  };
  for (std::size_t i = 0; i < states.size(); ++i) {
    const State& s = states[i];
    nlohmann::json e;
    e["index"] = i;
    e["kind"] = std::holds_alternative<DiagonalState>(s) ? "diagonal" : "dense";
    NonGaussianity ng = non_gaussianity_upper(s);
    e["d_g"] = ng.d_g;
    e["d_g_bound"] = ng.bound;
    e["nu"] = ng.nu;
    consider(ng.bound - ng.d_g, ng.detail.constants);
    if (!ng.holds) failures.push_back({{"index", i}, {"check", "non_gaussianity_upper"}});
    RelentBound rb = relent_upper(s, tau2, E, alpha);
    e["relent_tau_alpha"] = rb.relent;
    e["relent_tau_alpha_bound"] = rb.bound;
    consider(rb.bound - rb.relent, rb.constants);
    if (!rb.holds) failures.push_back({{"index", i}, {"check", "relent_upper"}});
    entries.push_back(e);
  }
  nlohmann::json out;
  out["seed"] = seed;
  out["count"] = count;
  out["cutoff"] = cutoff;
  if (state_spec) out["state"] = *state_spec;
  out["failures"] = failures;
  out["worst_margin"] = worst;
  out["constants"] = constants_json(worst_constants);
  out["entries"] = entries;
  return out;
}

}  // namespace qclt
