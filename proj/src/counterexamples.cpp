#include "qclt/counterexamples.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "qclt/convolution.hpp"
#include "qclt/special.hpp"

namespace qclt {

namespace {

constexpr double kSmax = 16777216.0;  // 2^24

// plateau [1/2, 1] and dyadic tail panels [2^j, 2^{j+1}] up to kSmax
const QuadRule& plateau_rule() {
  static const QuadRule r = gauss_legendre(0.5, 1.0, 8, 32);
  return r;
}

const QuadRule& tail_rule() {
  static const QuadRule r = [] {
    QuadRule q;
    for (double lo = 1.0; lo < kSmax; lo *= 2.0) append(q, gauss_legendre(lo, 2.0 * lo, 2, 32));
    return q;
  }();
  return r;
}

double log_tau_weight(double s, int k) {
  double s2 = 4.0 * s * s;
  double lq = std::log1p(-2.0 / (s2 + 1.0));
  return std::log(2.0 / (s2 + 1.0)) + (k > 0 ? k * lq : 0.0);
}

// x^nu Gamma(-nu, x) for nu in (0, 2) \ {1}
double scaled_upper_gamma(double nu, double x) {
  if (x <= 0.0) return 1.0 / nu;
  if (x > 2.0) {
    // continued fraction for Gamma(a, x), a = -nu
    double a = -nu;
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 10000; ++i) {
      double an = -i * (i - a);
      b += 2.0;
      d = an * d + b;
      if (std::abs(d) < tiny) d = tiny;
      c = b + an / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x) * h;
  }
  double g = boost::math::tgamma(2.0 - nu, x);
  double ex = std::exp(-x);
  g = (g - std::pow(x, 1.0 - nu) * ex) / (1.0 - nu);
  g = (g - std::pow(x, -nu) * ex) / (-nu);
  return std::pow(x, nu) * g;
}

}  // namespace

double MixtureDensity::operator()(double s) const {
  if (kind == MixtureKind::PointMass) return 0.0;
  if (s < 0.5) return 0.0;
  if (s < 1.0) return plateau;
  return a * (tail_exponent - 1.0) * std::pow(s, -tail_exponent);
}

MixtureKind parse_mixture_kind(const std::string& s) {
  if (s == "trace") return MixtureKind::Trace;
  if (s == "relent") return MixtureKind::Relent;
  if (s == "point") return MixtureKind::PointMass;
  fail(ErrorKind::ParseError, "unknown mixture kind '" + s + "'");
}

std::string mixture_kind_name(MixtureKind k) {
  switch (k) {
    case MixtureKind::Trace: return "trace";
    case MixtureKind::Relent: return "relent";
    case MixtureKind::PointMass: return "point";
  }
  return "?";
}

double beta_s(double s) {
  double s2 = 4.0 * s * s;
  return std::log((s2 + 1.0) / (s2 - 1.0));
}

double s_n(double s, int n) { return std::sqrt(1.0 + (s * s - 1.0) / n); }

double tau_s_weight(double s, int k) { return std::exp(log_tau_weight(s, k)); }

MixtureDensity plateau_solve(double p, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) fail(ErrorKind::InvalidArgument, "theta must lie in (0,1)");
  if (!(p > 3.0)) fail(ErrorKind::NoValidDensity, "tail exponent must exceed 3 for a finite second moment");
  // c0/2 + a = 1, (7/24) c0 + a (p-1)/(p-3) = 1
  double i2 = (p - 1.0) / (p - 3.0);
  double det = 0.5 * i2 - 7.0 / 24.0;
  double c0 = (i2 - 1.0) / det;
  double a = (0.5 - 7.0 / 24.0) / det;
  if (!(c0 >= 0.0) || !(a > 0.0)) fail(ErrorKind::NoValidDensity, "plateau ansatz gives a negative weight");
  MixtureDensity w;
  w.theta = theta;
  w.tail_exponent = p;
  w.plateau = c0;
  w.a = a;
  return w;
}

MixtureDensity mixture_family(MixtureKind kind, double theta) {
  if (kind == MixtureKind::PointMass) return point_mass(1.0);
  MixtureDensity w = plateau_solve(kind == MixtureKind::Trace ? 4.0 - theta : 5.0 - theta, theta);
  w.kind = kind;
  return w;
}

MixtureDensity point_mass(double s) {
  if (!(s >= 0.5)) fail(ErrorKind::InvalidArgument, "point mass must sit at s >= 1/2");
  MixtureDensity w;
  w.kind = MixtureKind::PointMass;
  w.point = s;
  return w;
}

std::optional<double> w_moment(const MixtureDensity& w, double kappa) {
  if (w.kind == MixtureKind::PointMass) return std::pow(w.point, kappa);
  double p = w.tail_exponent;
  if (kappa >= p - 1.0) return std::nullopt;
  double plateau = w.plateau * (1.0 - std::pow(0.5, kappa + 1.0)) / (kappa + 1.0);
  return plateau + w.a * (p - 1.0) / (p - 1.0 - kappa);
}

double mixture_mean(const MixtureDensity& w) {
  if (w.kind == MixtureKind::PointMass) return (4.0 * w.point * w.point - 1.0) / 2.0;
  return (4.0 * *w_moment(w, 2.0) - 1.0) / 2.0;
}

DiagonalState mixture_diag(const MixtureDensity& w, int cutoff) {
  if (cutoff < 1) fail(ErrorKind::InvalidArgument, "cutoff must be >= 1");
  std::vector<double> p(cutoff + 1, 0.0);
  if (w.kind == MixtureKind::PointMass) {
    for (int k = 0; k <= cutoff; ++k) p[k] = tau_s_weight(w.point, k);
  } else {
    auto add = [&](const QuadRule& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        double s = r.x[i], ws = r.w[i] * w(s);
        if (ws == 0.0) continue;
        double s2 = 4.0 * s * s;
        double l0 = std::log(2.0 / (s2 + 1.0)), lq = std::log1p(-2.0 / (s2 + 1.0));
        for (int k = 0; k <= cutoff; ++k) {
          double lw = l0 + k * lq;
          if (lw < -745.0) break;
          p[k] += ws * std::exp(lw);
        }
      }
    };
    add(plateau_rule());
    add(tail_rule());
    // beyond kSmax the geometric factor is 1 to within 1e-14
    double pp = w.tail_exponent;
    double rem = w.a * (pp - 1.0) / (2.0 * (pp + 1.0)) * std::pow(kSmax, -(pp + 1.0));
    for (int k = 0; k <= cutoff; ++k) p[k] += rem;
  }
  double kept = 0.0, first = 0.0;
  for (int k = 0; k <= cutoff; ++k) {
    if (p[k] < -1e-15) fail(ErrorKind::QuadratureDivergence, "negative mixture weight");
    p[k] = std::max(p[k], 0.0);
    kept += p[k];
    first += k * p[k];
  }
  double tail = std::max(0.0, 1.0 - kept);
  double tail_first = std::max(0.0, mixture_mean(w) - first);
  if (tail > 0.0) tail_first = std::max(tail_first, (cutoff + 1.0) * tail);
  return make_diagonal(std::move(p), tail, tail_first);
}

double mixture_char(const MixtureDensity& w, double r) {
  double u = r * r;
  if (w.kind == MixtureKind::PointMass) return std::exp(-2.0 * w.point * w.point * u);
  double acc = 0.0;
  const QuadRule& pr = plateau_rule();
  for (std::size_t i = 0; i < pr.size(); ++i) acc += pr.w[i] * std::exp(-2.0 * pr.x[i] * pr.x[i] * u);
  acc *= w.plateau;
  double p = w.tail_exponent;
  double nu = 0.5 * (p - 1.0);
  acc += w.a * (p - 1.0) * 0.5 * scaled_upper_gamma(nu, 2.0 * u);
  return acc;
}

RadialChar mixture_radial_char(const MixtureDensity& w) {
  return [w](double r) { return mixture_char(w, r); };
}

std::vector<double> lemma72_reference(const MixtureDensity& w, int n, int cutoff) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "n must be >= 1");
  std::vector<double> ref(cutoff + 1);
  for (int k = 0; k <= cutoff; ++k) ref[k] = tau_s_weight(1.0, k);
  if (w.kind == MixtureKind::PointMass) {
    double sn = s_n(w.point, n);
    for (int k = 0; k <= cutoff; ++k) ref[k] += n * (tau_s_weight(sn, k) - tau_s_weight(1.0, k));
    return ref;
  }
  std::vector<double> acc(cutoff + 1, 0.0);
  auto add = [&](const QuadRule& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      double s = r.x[i], ws = r.w[i] * w(s);
      if (ws == 0.0) continue;
      double sn = s_n(s, n);
      for (int k = 0; k <= cutoff; ++k) acc[k] += ws * (tau_s_weight(sn, k) - ref[k]);
    }
  };
  add(plateau_rule());
  add(tail_rule());
  for (int k = 0; k <= cutoff; ++k) {
    if (!std::isfinite(acc[k])) fail(ErrorKind::QuadratureDivergence, "reference integral is not finite");
    ref[k] += n * acc[k];
  }
  return ref;
}

Lemma72Result lemma72_residual(const MixtureDensity& w, int n, int cutoff, int kmax) {
  Lemma72Result out;
  out.reference = lemma72_reference(w, n, cutoff);
  DiagonalState rho = mixture_diag(w, cutoff);
  NfoldOptions opts;
  opts.route = Route::CharPower;
  opts.cutoff = cutoff;
  opts.radial_char = mixture_radial_char(w);
  opts.exact_mean = mixture_mean(w);
  State conv = n == 1 ? State(rho) : nfold_symmetric(rho, n, opts);
  const auto& d = std::get<DiagonalState>(conv);
  int top = kmax < 0 ? cutoff : std::min(kmax, cutoff);
  for (int k = 0; k <= top; ++k) out.residual = std::max(out.residual, std::abs(d.probs[k] - out.reference[k]));
  return out;
}

double h_eval(double t) {
  double a = std::abs(t);
  if (a <= 1e-3) {
    double t4 = a * a * a * a;
    return 5.0 / 720.0 * t4 - t4 * a * a / 5760.0;
  }
  double half = std::sin(0.5 * a);
  return (std::sin(a) / a - 0.5) - 2.0 * half * half / (a * a) + a * a / 8.0;
}

double h_threshold_search(double step, double t_max) {
  auto steps = static_cast<long>(std::llround(t_max / step));
  for (long i = steps; i >= 0; --i) {
    double t = i * step;
    if (h_eval(t) < t * t / 16.0) return (i + 1) * step;
  }
  return 0.0;
}

}  // namespace qclt
