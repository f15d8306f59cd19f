#include "qclt/special.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "qclt/errors.hpp"

namespace qclt {

namespace {

template <int N>
void add_panel(QuadRule& q, double a, double b) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& xs = G::abscissa();
  const auto& ws = G::weights();
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == 0.0) {
      q.x.push_back(c);
      q.w.push_back(h * ws[i]);
      continue;
    }
    q.x.push_back(c - h * xs[i]);
    q.w.push_back(h * ws[i]);
    q.x.push_back(c + h * xs[i]);
    q.w.push_back(h * ws[i]);
  }
}

}  // namespace

QuadRule gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) fail(ErrorKind::InvalidArgument, "panels must be >= 1");
  QuadRule q;
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h, hi = (p + 1 == panels) ? b : a + (p + 1) * h;
    switch (order) {
      case 16: add_panel<16>(q, lo, hi); break;
      case 32: add_panel<32>(q, lo, hi); break;
      case 64: add_panel<64>(q, lo, hi); break;
      default: fail(ErrorKind::InvalidArgument, "unsupported Gauss-Legendre order");
    }
  }
  return q;
}

void append(QuadRule& dst, const QuadRule& src) {
  dst.x.insert(dst.x.end(), src.x.begin(), src.x.end());
  dst.w.insert(dst.w.end(), src.w.begin(), src.w.end());
}

void scaled_laguerre(double u, int K, double* out) {
  // three-term recurrence on L_j with a running log scale
  double logscale = -0.5 * u;
  double scale = std::exp(logscale);
  auto emit = [&](double v) {
    if (logscale > -700.0) return v * scale;
    if (v == 0.0) return 0.0;
    return std::copysign(std::exp(logscale + std::log(std::abs(v))), v);
  };
  double prev = 1.0, cur = 1.0 - u;
  out[0] = emit(1.0);
  if (K >= 1) out[1] = emit(cur);
  for (int j = 1; j < K; ++j) {
    double next = ((2.0 * j + 1.0 - u) * cur - j * prev) / (j + 1.0);
    prev = cur;
    cur = next;
    if (std::abs(cur) > 1e200) {
      prev *= 1e-200;
      cur *= 1e-200;
      logscale += 200.0 * std::log(10.0);
      scale = std::exp(logscale);
    }
    out[j + 1] = emit(cur);
  }
}

std::vector<double> scaled_laguerre(double u, int K) {
  std::vector<double> v(K + 1);
  scaled_laguerre(u, K, v.data());
  return v;
}

}  // namespace qclt
