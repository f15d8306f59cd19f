#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qclt/convolution.hpp"
#include "qclt/counterexamples.hpp"
#include "qclt/fock.hpp"

#include "json.hpp"

namespace qclt {

struct PreparedState {
  std::string label;
  State state = DiagonalState{};
  RadialChar radial_char;    // set for mixtures
  double exact_mean = -1.0;  // set for mixtures
  std::optional<MixtureDensity> mixture;
};

// fock:K | super:a,b | thermal:nu=V | thermal:beta=B | mixture:kind=K,theta=T | file:PATH
PreparedState prepare_state(const std::string& spec, int cutoff);

// "16:4096:x2" (geometric), "16:64:+16" (arithmetic) or "4,8,32"
std::vector<int> parse_n_grid(const std::string& s);

enum class Metric { Trace, Relent, Hs };
std::vector<Metric> parse_metrics(const std::string& s);

struct ScanConfig {
  std::string state_spec = "fock:1";
  std::vector<int> n_grid;
  std::vector<Metric> metrics{Metric::Trace, Metric::Relent};
  std::optional<Route> route;  // default: diagonal for diagonal states, char otherwise
  int cutoff = 64;
  double grid_radius = 8.0;
  double grid_step = 0.05;
  std::uint64_t seed = 0;
  bool timing = true;  // false writes wall_ms = 0 for byte-stable output
};

struct RateScanRecord {
  int n = 0;
  double trace_dist = 0.0;  // NaN when not requested
  double relent = 0.0;
  double hs_dist = 0.0;
  double sqrt_n_scaled = 0.0;
  double n_scaled = 0.0;
  long wall_ms = 0;
};

// metrics of rho^n against the Gaussification of the input
struct MetricSet {
  double trace_dist = 0.0, relent = 0.0, hs_dist = 0.0;
};
MetricSet gaussian_metrics(const State& conv, const State& input, const std::vector<Metric>& which);

std::vector<RateScanRecord> rate_scan(const ScanConfig& cfg);
std::string config_line(const ScanConfig& cfg);
void write_rates_csv(std::ostream& os, const std::string& config, const std::vector<RateScanRecord>& recs);
std::string gnuplot_template(const std::string& csv_path, bool counterexample = false);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;
};
// OLS of ln y on ln x; DegenerateFit for fewer than 4 points or y <= 1e-14
SlopeFit slope_fit(const std::vector<double>& x, const std::vector<double>& y);
SlopeFit slope_fit(const std::vector<RateScanRecord>& recs, Metric m, std::size_t first = 0,
                   std::size_t last = static_cast<std::size_t>(-1));

struct CounterexampleScan {
  std::vector<RateScanRecord> records;
  std::vector<double> scaled;  // sqrt(n) trace or n relent
  bool verdict = false;
};
// strictly increasing within 1%: s[i+1] > 0.99 s[i] and s[i+1] > 1e-9
bool increasing_verdict(const std::vector<double>& s);
CounterexampleScan counterexample_scan(const MixtureDensity& w, const std::vector<int>& n_grid, int cutoff,
                                       bool timing = true);

// seeded random single-mode states: even indices Dirichlet diagonals,
// odd indices diagonal mixtures with a random pure component
std::vector<State> audit_states(std::uint64_t seed, int count, int cutoff);
nlohmann::json bound_audit(std::uint64_t seed, int count, int cutoff,
                           const std::optional<std::string>& state_spec = std::nullopt);

struct SelftestCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};
std::vector<SelftestCheck> run_selftest(std::ostream* log = nullptr);

}  // namespace qclt
