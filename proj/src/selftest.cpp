#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qclt/entropy_bound.hpp"
#include "qclt/experiments.hpp"
#include "qclt/gaussian.hpp"
#include "qclt/io.hpp"
#include "qclt/kernels.hpp"

namespace qclt {

namespace {

struct Tracker {
  bool pass = true;
  double worst = 0.0;
  std::string where;
  void record(double violation, const std::string& w) {
    if (violation > worst) {
      worst = violation;
      where = w;
    }
  }
};

SelftestCheck finish(const std::string& name, const Tracker& t, double tol) {
  SelftestCheck c;
  c.name = name;
  c.pass = t.pass && t.worst <= tol;
  std::ostringstream os;
  os << "worst violation " << fmt_double(t.worst);
  if (!t.where.empty()) os << " at " << t.where;
  c.detail = os.str();
  return c;
}

std::vector<std::pair<std::string, State>> sample_states() {
  std::vector<std::pair<std::string, State>> out;
  out.emplace_back("fock:1", prepare_state("fock:1", 32).state);
  out.emplace_back("fock:3", prepare_state("fock:3", 32).state);
  out.emplace_back("thermal:nu=3", prepare_state("thermal:nu=3", 64).state);
  out.emplace_back("super:0,2", prepare_state("super:0,2", 16).state);
  out.emplace_back("super:0,3", prepare_state("super:0,3", 16).state);
  auto audit = audit_states(7, 12, 12);
  for (std::size_t i = 0; i < audit.size(); ++i) out.emplace_back("audit#" + std::to_string(i), audit[i]);
  return out;
}

// (2/pi) tr(rho D_alpha Pi D_alpha^dag)
double wigner_parity(const DensityOperator& rho, cd alpha) {
  int K = rho.cutoff();
  int big = K + 80;
  Matrix D = displacement_block(alpha, big);
  Eigen::VectorXd par(big + 1);
  for (int l = 0; l <= big; ++l) par(l) = l % 2 ? -1.0 : 1.0;
  Matrix top = D.topRows(K + 1);
  Matrix P = top * par.asDiagonal() * top.adjoint();
  cd tr = (rho.matrix() * P).trace();
  return 2.0 / std::numbers::pi * tr.real();
}

}  // namespace

std::vector<SelftestCheck> run_selftest(std::ostream* log) {
  std::vector<SelftestCheck> out;
  auto states = sample_states();
  auto report = [&](SelftestCheck c) {
    if (log) *log << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    out.push_back(std::move(c));
  };

  {
    Tracker t;
    const double ks[] = {0.5, 1.0, 2.0, 2.5, 3.0, 4.0};
    for (const auto& [name, s] : states)
      for (double k1 : ks)
        for (double k2 : ks) {
          if (!(k1 < k2)) continue;
          double m1 = moment(s, k1).value, m2 = moment(s, k2).value;
          t.record(m1 - std::pow(m2, k1 / k2) - 1e-9, name);
        }
    report(finish("moment_monotonicity", t, 0.0));
  }

  {
    Tracker t;
    for (const auto& [name, s] : states) {
      int K = state_cutoff(s);
      for (double sexp : {2.0, 3.0, 4.0}) {
        double M = moment(s, sexp).value;
        for (int n = 1; n <= K; ++n) {
          double kept = std::holds_alternative<DiagonalState>(s) ? trace_kept(std::get<DiagonalState>(s), n)
                                                                 : trace_kept(std::get<DensityOperator>(s), n);
          double lhs = 1.0 - kept;
          t.record(lhs - std::pow(n, -sexp / 2.0) * M - 1e-12, name);
        }
      }
    }
    report(finish("truncation_tail_bound", t, 0.0));
  }

  std::vector<std::pair<std::string, State>> convs;
  for (const auto& [name, s] : states) {
    if (auto* d = std::get_if<DiagonalState>(&s)) {
      convs.emplace_back(name + "^2", convolve_pair(*d, *d, 0.5, 2 * d->cutoff()));
    } else {
      const auto& rho = std::get<DensityOperator>(s);
      convs.emplace_back(name + "^2", convolve_pair(rho, rho, 0.5, 2 * rho.cutoff()));
    }
  }

  {
    Tracker t;
    for (const auto* set : {&states, &convs})
      for (const auto& [name, s] : *set) t.record(-uncertainty_check(covariance(s)) - 1e-9, name);
    report(finish("uncertainty", t, 0.0));
  }

  {
    Tracker t;
    for (const auto* set : {&states, &convs})
      for (const auto& [name, s] : *set)
        for (double r : {0.05, 0.2, 0.5, 1.0, 2.0, 4.0})
          for (int a = 0; a < 8; ++a) {
            cd z = std::polar(r, a * std::numbers::pi / 4.0);
            double v = std::abs(char_fn(s, z));
            if (!(v < 1.0)) t.record(v - 1.0 + 1e-300, name);
          }
    report(finish("char_modulus_below_one", t, 0.0));
  }

  {
    Tracker t;
    for (const auto& [name, s] : states) {
      State c = std::holds_alternative<DiagonalState>(s)
                    ? State(convolve_pair(std::get<DiagonalState>(s), std::get<DiagonalState>(s), 0.5,
                                          2 * state_cutoff(s)))
                    : State(convolve_pair(std::get<DensityOperator>(s), std::get<DensityOperator>(s), 0.5,
                                          2 * state_cutoff(s)));
      DensityOperator rho = std::holds_alternative<DiagonalState>(c) ? to_density(std::get<DiagonalState>(c))
                                                                      : std::get<DensityOperator>(c);
      for (double x = -3.0; x <= 3.0; x += 0.25)
        for (double y = -3.0; y <= 3.0; y += 0.25) t.record(-wigner_parity(rho, cd(x, y)) - 1e-7, name + "^2");
    }
    report(finish("wigner_positivity", t, 0.0));
  }

  {
    Tracker t;
    std::vector<std::pair<std::string, DensityOperator>> dense;
    for (const auto& [name, s] : states) {
      if (!first_moments(s).isZero(1e-12)) continue;
      DensityOperator d = std::holds_alternative<DiagonalState>(s) ? to_density(std::get<DiagonalState>(s))
                                                                   : std::get<DensityOperator>(s);
      if (d.cutoff() <= 16) dense.emplace_back(name, d);
    }
    for (std::size_t i = 0; i < dense.size(); ++i)
      for (std::size_t j = i; j < std::min(dense.size(), i + 3); ++j)
        for (double eta : {0.5, 0.3}) {
          const auto& a = dense[i].second;
          const auto& b = dense[j].second;
          DensityOperator c = convolve_pair(a, b, eta, a.cutoff() + b.cutoff());
          RMatrix expect = eta * covariance(a) + (1.0 - eta) * covariance(b);
          t.record((covariance(c) - expect).cwiseAbs().maxCoeff() - 1e-8, dense[i].first + "+" + dense[j].first);
        }
    report(finish("covariance_additivity", t, 0.0));
  }

  {
    Tracker t;
    for (const std::string spec : {"fock:1", "fock:2", "mixture:kind=relent,theta=0.5"}) {
      ScanConfig cfg;
      cfg.state_spec = spec;
      cfg.n_grid = {1, 2, 4, 8, 16};
      cfg.cutoff = spec.rfind("mixture", 0) == 0 ? 256 : 32;
      cfg.metrics = {Metric::Trace, Metric::Relent};
      cfg.timing = false;
      for (const auto& r : rate_scan(cfg))
        t.record(r.trace_dist * r.trace_dist / 2.0 - r.relent - 1e-9, spec + " n=" + std::to_string(r.n));
    }
    for (const auto& [name, s] : states) {
      if (!first_moments(s).isZero(1e-12)) continue;
      MetricSet m = gaussian_metrics(s, s, {Metric::Trace, Metric::Relent});
      t.record(m.trace_dist * m.trace_dist / 2.0 - m.relent - 1e-9, name);
    }
    report(finish("pinsker", t, 0.0));
  }

  {
    SelftestCheck c;
    c.name = "determinism";
    ScanConfig cfg;
    cfg.state_spec = "fock:1";
    cfg.n_grid = {1, 2, 4, 8, 16, 32};
    cfg.cutoff = 32;
    cfg.metrics = {Metric::Trace, Metric::Relent, Metric::Hs};
    cfg.timing = false;
    auto csv = [&] {
      std::ostringstream os;
      write_rates_csv(os, config_line(cfg), rate_scan(cfg));
      return os.str();
    };
    bool same_csv = csv() == csv();
    bool same_audit = bound_audit(42, 6, 8).dump() == bound_audit(42, 6, 8).dump();

    std::vector<double> u, w;
    for (int i = 0; i < 1000; ++i) {
      u.push_back(0.01 * i);
      w.push_back(std::exp(-0.003 * i));
    }
    auto table = kernels::bs_table_serial(0.3, 24);
    std::vector<double> p(25), q(25);
    for (int k = 0; k <= 24; ++k) {
      p[k] = std::pow(0.5, k + 1);
      q[k] = std::pow(0.3, k) * 0.7;
    }
    int saved = kernels::thread_count();
    kernels::set_thread_count(1);
    auto r1 = kernels::radial_invert_parallel(u, w, 64);
    auto b1 = kernels::bs_apply_diag_parallel(table, p, q, 24);
    kernels::set_thread_count(3);
    bool same_kernel = kernels::radial_invert_parallel(u, w, 64) == r1;
    bool same_bs = kernels::bs_apply_diag_parallel(table, p, q, 24) == b1;
    kernels::set_thread_count(saved);
    c.pass = same_csv && same_audit && same_kernel && same_bs;
    c.detail = std::string("csv ") + (same_csv ? "identical" : "differs") + ", audit " +
               (same_audit ? "identical" : "differs") + ", radial kernel " + (same_kernel ? "identical" : "differs") +
               ", beam-splitter kernel " + (same_bs ? "identical" : "differs");
    report(std::move(c));
  }
  return out;
}

}  // namespace qclt
