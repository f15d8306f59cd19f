#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qclt/edgeworth.hpp"
#include "qclt/experiments.hpp"
#include "qclt/io.hpp"
#include "qclt/kernels.hpp"

using namespace qclt;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitSelftest = 3;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path);
  f << text;
}

std::string multi_index_key(const MultiIndex& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qclt: quantum central limit experiments"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: QCLT_THREADS or all cores)");

  auto* rates = app.add_subcommand("rates", "convergence-rate scan of rho^n against its Gaussification");
  std::string state_spec = "fock:1", n_grid = "16:4096:x2", metrics = "trace,relent", route = "auto", out;
  int cutoff = 64;
  double radius = 8.0, step = 0.05;
  std::uint64_t seed = 0;
  bool no_timing = false;
  rates->add_option("--state", state_spec, "state spec")->required();
  rates->add_option("--n-grid", n_grid, "n grid, e.g. 16:4096:x2");
  rates->add_option("--metrics", metrics, "comma list of trace,relent,hs");
  rates->add_option("--route", route, "diagonal, char, oracle or auto");
  rates->add_option("--cutoff", cutoff, "Fock cutoff");
  rates->add_option("--grid-radius", radius, "lattice half-width for the char route");
  rates->add_option("--grid-step", step, "lattice step for the char route");
  rates->add_option("--seed", seed, "recorded in the config line");
  rates->add_flag("--no-timing", no_timing, "write wall_ms = 0");
  rates->add_option("--out", out, "CSV path (default stdout)");

  auto* cx = app.add_subcommand("counterexample", "growth scan for the heavy-tailed thermal mixtures");
  std::string cx_kind = "trace", cx_grid = "64:4096:x2", cx_out;
  double theta = 0.5;
  int cx_cutoff = 2048;
  bool cx_no_timing = false;
  cx->add_option("--kind", cx_kind, "trace or relent");
  cx->add_option("--theta", theta, "theta in (0,1)");
  cx->add_option("--n-grid", cx_grid, "n grid");
  cx->add_option("--cutoff", cx_cutoff, "Fock cutoff");
  cx->add_flag("--no-timing", cx_no_timing, "write wall_ms = 0");
  cx->add_option("--out", cx_out, "CSV path (default stdout)");

  auto* audit = app.add_subcommand("bound-audit", "entropy-bound audit on seeded random states");
  std::uint64_t audit_seed = 42;
  int count = 50, audit_cutoff = 16;
  std::string audit_out, audit_state;
  audit->add_option("--seed", audit_seed, "RNG seed");
  audit->add_option("--count", count, "number of states");
  audit->add_option("--cutoff", audit_cutoff, "Fock cutoff");
  audit->add_option("--state", audit_state, "audit a single state spec instead");
  audit->add_option("--out", audit_out, "JSON path (default stdout)");

  auto* edge = app.add_subcommand("edgeworth", "Weyl cumulants and Edgeworth polynomials");
  std::string edge_state;
  int order = 4, edge_cutoff = 32;
  edge->add_option("--state", edge_state, "state spec")->required();
  edge->add_option("--order", order, "cumulant order (<= 6)");
  edge->add_option("--cutoff", edge_cutoff, "Fock cutoff");

  auto* self = app.add_subcommand("selftest", "run the invariant suite");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) kernels::set_thread_count(threads);

  try {
    if (*rates) {
      ScanConfig cfg;
      cfg.state_spec = state_spec;
      cfg.n_grid = parse_n_grid(n_grid);
      cfg.metrics = parse_metrics(metrics);
      if (route != "auto") cfg.route = parse_route(route);
      cfg.cutoff = cutoff;
      cfg.grid_radius = radius;
      cfg.grid_step = step;
      cfg.seed = seed;
      cfg.timing = !no_timing;
      auto recs = rate_scan(cfg);
      std::ostringstream os;
      write_rates_csv(os, config_line(cfg), recs);
      write_output(out, os.str());
      if (!out.empty() && out != "-") write_output(out + ".gp", gnuplot_template(out));
    } else if (*cx) {
      MixtureKind kind = parse_mixture_kind(cx_kind);
      if (kind == MixtureKind::PointMass) fail(ErrorKind::InvalidArgument, "kind must be trace or relent");
      auto grid = parse_n_grid(cx_grid);
      auto scan = counterexample_scan(mixture_family(kind, theta), grid, cx_cutoff, !cx_no_timing);
      std::ostringstream os;
      std::string cfg = "counterexample kind=" + cx_kind + " theta=" + fmt_double(theta) + " n_grid=" + cx_grid +
                        " cutoff=" + std::to_string(cx_cutoff);
      write_rates_csv(os, cfg, scan.records);
      os << "# verdict: " << (scan.verdict ? "increasing" : "not increasing") << "\n";
      write_output(cx_out, os.str());
      if (!cx_out.empty() && cx_out != "-") write_output(cx_out + ".gp", gnuplot_template(cx_out, true));
    } else if (*audit) {
      std::optional<std::string> st;
      if (!audit_state.empty()) st = audit_state;
      auto j = bound_audit(audit_seed, count, audit_cutoff, st);
      write_output(audit_out, j.dump(2) + "\n");
    } else if (*edge) {
      PreparedState ps = prepare_state(edge_state, edge_cutoff);
      CumulantSet q = weyl_cumulants(ps.state, order);
      nlohmann::json j;
      j["state"] = edge_state;
      j["modes"] = q.modes;
      j["order"] = q.order;
      for (const auto& [a, v] : q.q) j["cumulants"][multi_index_key(a)] = {v.real(), v.imag()};
      if (q.modes == 1 && order >= 3) {
        auto polys = edgeworth_polynomials(q, order >= 4 ? 2 : 1);
        for (std::size_t r = 0; r < polys.size(); ++r)
          for (const auto& [a, v] : polys[r].terms)
            j["edgeworth"]["E" + std::to_string(r + 1)][multi_index_key(a)] = {v.real(), v.imag()};
      }
      std::cout << j.dump(2) << "\n";
    } else if (*self) {
      auto checks = run_selftest(&std::cout);
      bool ok = true;
      for (const auto& c : checks) ok = ok && c.pass;
      std::cout << (ok ? "selftest passed\n" : "selftest FAILED\n");
      return ok ? 0 : kExitSelftest;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_input_error() ? kExitInput : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
