#include <cmath>
#include <sstream>

#include "doctest.h"
#include "qclt/experiments.hpp"

using namespace qclt;
using doctest::Approx;

TEST_CASE("grid and metric parsing") {
  CHECK(parse_n_grid("16:128:x2") == std::vector<int>{16, 32, 64, 128});
  CHECK(parse_n_grid("16:64:+16") == std::vector<int>{16, 32, 48, 64});
  CHECK(parse_n_grid("4,8,32") == std::vector<int>{4, 8, 32});
  CHECK_THROWS_AS(parse_n_grid("8,4"), Error);
  CHECK_THROWS_AS(parse_n_grid("16:64:x1"), Error);
  CHECK_THROWS_AS(parse_n_grid("abc"), Error);
  CHECK(parse_metrics("trace,hs") == std::vector<Metric>{Metric::Trace, Metric::Hs});
  CHECK_THROWS_AS(parse_metrics(""), Error);
  CHECK_THROWS_AS(parse_metrics("bogus"), Error);
}

TEST_CASE("state specs") {
  CHECK(std::get<DiagonalState>(prepare_state("fock:2", 16).state).probs[2] == 1.0);
  PreparedState s = prepare_state("super:0,3", 16);
  CHECK(std::holds_alternative<DensityOperator>(s.state));
  CHECK(std::get<DensityOperator>(s.state).matrix()(0, 3).real() == Approx(0.5));
  PreparedState t = prepare_state("thermal:nu=4", 64);
  CHECK(std::get<DiagonalState>(t.state).probs[0] == Approx(0.4));
  PreparedState m = prepare_state("mixture:kind=trace,theta=0.5", 128);
  CHECK(m.mixture.has_value());
  CHECK(m.exact_mean == Approx(1.5));
  CHECK(static_cast<bool>(m.radial_char));
  CHECK_THROWS_AS(prepare_state("fock:99", 16), Error);
  CHECK_THROWS_AS(prepare_state("nonsense", 16), Error);
  CHECK_THROWS_AS(prepare_state("file:/nonexistent/path", 16), Error);
}

TEST_CASE("rate scan examples") {
  ScanConfig cfg;
  cfg.metrics = {Metric::Trace, Metric::Relent, Metric::Hs};
  cfg.n_grid = {1, 2, 8, 32};
  for (const char* spec : {"fock:0", "thermal:nu=4"}) {
    cfg.state_spec = spec;
    for (const auto& r : rate_scan(cfg)) {
      CHECK(std::abs(r.trace_dist) <= 1e-10);
      CHECK(std::abs(r.relent) <= 1e-10);
      CHECK(std::abs(r.hs_dist) <= 1e-10);
    }
  }
  cfg.state_spec = "fock:1";
  cfg.n_grid = {2};
  auto recs = rate_scan(cfg);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].trace_dist == Approx(0.75).epsilon(1e-10));
  CHECK(recs[0].relent == Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(recs[0].sqrt_n_scaled == Approx(0.75 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(recs[0].n_scaled == Approx(2.0 * std::log(2.0)).epsilon(1e-12));

  cfg.route = Route::CharPower;
  auto viachar = rate_scan(cfg);
  CHECK(viachar[0].trace_dist == Approx(0.75).epsilon(1e-6));

  cfg.route.reset();
  cfg.metrics = {Metric::Trace};
  CHECK(std::isnan(rate_scan(cfg)[0].relent));
}

TEST_CASE("pinsker in every record") {
  ScanConfig cfg;
  cfg.n_grid = parse_n_grid("1:64:x2");
  for (const char* spec : {"fock:1", "fock:2", "super:0,2"}) {
    cfg.state_spec = spec;
    cfg.cutoff = std::string(spec) == "fock:2" ? 64 : 32;
    for (const auto& r : rate_scan(cfg)) {
      CHECK(r.relent >= r.trace_dist * r.trace_dist / 2.0 - 1e-9);
      CHECK(r.trace_dist >= -1e-9);
      CHECK(r.relent >= -1e-9);
    }
  }
}

TEST_CASE("csv output is deterministic") {
  ScanConfig cfg;
  cfg.n_grid = {2, 4, 8};
  cfg.timing = false;
  auto once = [&] {
    std::ostringstream os;
    write_rates_csv(os, config_line(cfg), rate_scan(cfg));
    return os.str();
  };
  std::string a = once();
  CHECK(a == once());
  CHECK(a.rfind("# config:", 0) == 0);
  CHECK(a.find("n,trace_dist,relent,hs_dist,sqrt_n_scaled,n_scaled,wall_ms") != std::string::npos);
  CHECK(gnuplot_template("r.csv").find("r.csv") != std::string::npos);
}

TEST_CASE("slope fit") {
  std::vector<double> x, y1, y2;
  for (int n = 16; n <= 4096; n *= 2) {
    x.push_back(n);
    y1.push_back(3.0 / n);
    y2.push_back(0.7 / std::sqrt(n));
  }
  CHECK(slope_fit(x, y1).slope == Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(slope_fit(x, y1).stderr_) < 1e-12);
  CHECK(slope_fit(x, y2).slope == Approx(-0.5).epsilon(1e-12));
  CHECK(slope_fit(x, y1).intercept == Approx(std::log(3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(slope_fit({1, 2, 3}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(slope_fit({1, 2, 3, 4}, {1, 0.0, 3, 4}), Error);

  std::vector<RateScanRecord> recs;
  for (double n : x) {
    RateScanRecord r;
    r.n = static_cast<int>(n);
    r.relent = 2.0 / (n * n);
    r.trace_dist = 1.0 / n;
    recs.push_back(r);
  }
  CHECK(slope_fit(recs, Metric::Relent).slope == Approx(-2.0).epsilon(1e-12));
  CHECK(slope_fit(recs, Metric::Trace, 2, 7).slope == Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("counterexample verdict") {
  CHECK(increasing_verdict({1.0, 1.2, 1.195, 1.5}));
  CHECK_FALSE(increasing_verdict({1.0, 1.2, 1.1}));
  CHECK_FALSE(increasing_verdict({0.0, 0.0, 0.0}));
  CounterexampleScan ctrl = counterexample_scan(point_mass(1.0), {64, 128, 256, 512}, 256, false);
  for (double v : ctrl.scaled) CHECK(std::abs(v) <= 1e-10);
  CHECK_FALSE(ctrl.verdict);
}

TEST_CASE("bound audit") {
  auto a = bound_audit(42, 6, 12);
  CHECK(a.dump() == bound_audit(42, 6, 12).dump());
  CHECK(a["failures"].empty());
  CHECK(a["entries"].size() == 6);
  auto th = bound_audit(1, 1, 16, std::string("thermal:nu=3"));
  REQUIRE(th["entries"].size() == 1);
  CHECK(std::abs(th["entries"][0]["d_g"].get<double>()) <= 1e-10);
  CHECK(th["failures"].empty());
  auto st = audit_states(3, 4, 10);
  CHECK(st.size() == 4);
  CHECK(std::holds_alternative<DiagonalState>(st[0]));
  CHECK(std::holds_alternative<DensityOperator>(st[1]));
}
