#include <charconv>
#include <fstream>
#include <sstream>

#include "qclt/io.hpp"

namespace qclt {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_density(std::ostream& os, const DensityOperator& rho) {
  os << rho.modes() << ' ' << rho.cutoff() << '\n';
  const Matrix& m = rho.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << i << ' ' << j << ' ' << fmt_double(m(i, j).real()) << ' ' << fmt_double(m(i, j).imag())
         << '\n';
}

namespace {

double parse_double(const std::string& tok) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    fail(ErrorKind::ParseError, "bad number '" + tok + "'");
  return v;
}

long parse_long(const std::string& tok) {
  long v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    fail(ErrorKind::ParseError, "bad integer '" + tok + "'");
  return v;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

bool next_content_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

DensityOperator read_density(std::istream& is) {
  std::string line;
  if (!next_content_line(is, line)) fail(ErrorKind::ParseError, "missing header");
  auto h = tokens(line);
  if (h.size() != 2) fail(ErrorKind::ParseError, "density header must be 'm K'");
  long m = parse_long(h[0]), K = parse_long(h[1]);
  if (m < 1 || K < 0) fail(ErrorKind::ParseError, "bad header values");
  auto basis = make_basis(static_cast<int>(m), static_cast<int>(K));
  auto n = static_cast<long>(basis->size());
  Matrix mat = Matrix::Zero(n, n);
  while (next_content_line(is, line)) {
    auto t = tokens(line);
    if (t.size() != 4) fail(ErrorKind::ParseError, "entry line must be 'i j re im'");
    long i = parse_long(t[0]), j = parse_long(t[1]);
    if (i < 0 || j < 0 || i >= n || j >= n) fail(ErrorKind::ParseError, "index out of range");
    mat(i, j) = cd(parse_double(t[2]), parse_double(t[3]));
  }
  double tr = mat.trace().real();
  return DensityOperator(basis, mat, tr < 1.0 ? 1.0 - tr : 0.0);
}

void write_diagonal(std::ostream& os, const DiagonalState& d) {
  os << d.cutoff() << '\n';
  for (std::size_t k = 0; k < d.probs.size(); ++k) os << k << ' ' << fmt_double(d.probs[k]) << '\n';
}

DiagonalState read_diagonal(std::istream& is) {
  std::string line;
  if (!next_content_line(is, line)) fail(ErrorKind::ParseError, "missing header");
  auto h = tokens(line);
  if (h.size() != 1) fail(ErrorKind::ParseError, "diagonal header must be 'K'");
  long K = parse_long(h[0]);
  if (K < 0) fail(ErrorKind::ParseError, "negative cutoff");
  std::vector<double> p(K + 1, 0.0);
  while (next_content_line(is, line)) {
    auto t = tokens(line);
    if (t.size() != 2) fail(ErrorKind::ParseError, "entry line must be 'k p_k'");
    long k = parse_long(t[0]);
    if (k < 0 || k > K) fail(ErrorKind::ParseError, "level out of range");
    p[k] = parse_double(t[1]);
  }
  double s = 0.0;
  for (double v : p) s += v;
  double tail = s < 1.0 ? 1.0 - s : 0.0;
  return make_diagonal(std::move(p), tail, tail * (K + 1));
}

State read_state_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path);
  std::string line;
  std::streampos start = f.tellg();
  if (!next_content_line(f, line)) fail(ErrorKind::ParseError, "empty state file " + path);
  auto h = tokens(line);
  f.clear();
  f.seekg(start);
  if (h.size() == 2) return read_density(f);
  if (h.size() == 1) return read_diagonal(f);
  fail(ErrorKind::ParseError, "unrecognised header in " + path);
}

void write_state_file(const std::string& path, const State& s) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::IoError, "cannot write " + path);
  if (auto* d = std::get_if<DiagonalState>(&s))
    write_diagonal(f, *d);
  else
    write_density(f, std::get<DensityOperator>(s));
}

}  // namespace qclt
