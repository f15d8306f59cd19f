#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qclt/fock.hpp"

// Hot loops with a plain serial reference and an OpenMP version. The
// parallel versions reduce over fixed-size chunks in index order, so their
// output does not depend on the thread count.
namespace qclt::kernels {

constexpr std::size_t kChunk = 256;

// honours QCLT_THREADS on first call
int thread_count();
void set_thread_count(int n);

// p_j = sum_i c_i exp(-u_i/2) L_j(u_i), j = 0..K
std::vector<double> radial_invert_serial(std::span<const double> u, std::span<const double> c, int K);
std::vector<double> radial_invert_parallel(std::span<const double> u, std::span<const double> c, int K);

// T = sum_i c_i D(-z_i) restricted to levels 0..K
Matrix lattice_invert_serial(std::span<const cd> z, std::span<const cd> c, int K);
Matrix lattice_invert_parallel(std::span<const cd> z, std::span<const cd> c, int K);

std::vector<cd> sample_serial(const std::function<cd(cd)>& f, std::span<const cd> z);
std::vector<cd> sample_parallel(const std::function<cd(cd)>& f, std::span<const cd> z);

// <j, N-j| U_eta |k, l>, N = k + l, for all k, l <= K and j <= N
class BsTable {
 public:
  BsTable() = default;
  BsTable(double eta, int K);
  double eta() const { return eta_; }
  int cutoff() const { return K_; }
  double amp(int j, int k, int l) const {
    return (j < 0 || j > k + l) ? 0.0 : data_[offset_[k * (K_ + 1) + l] + j];
  }
  const double* sector(int k, int l) const { return data_.data() + offset_[k * (K_ + 1) + l]; }
  double* sector(int k, int l) { return data_.data() + offset_[k * (K_ + 1) + l]; }

 private:
  double eta_ = 0.5;
  int K_ = 0;
  std::vector<std::size_t> offset_;
  std::vector<double> data_;
};

BsTable bs_table_serial(double eta, int K);
BsTable bs_table_parallel(double eta, int K);

// r_j = sum_{k,l} p_k q_l amp(j,k,l)^2, j = 0..Kout
std::vector<double> bs_apply_diag_serial(const BsTable& t, std::span<const double> p,
                                         std::span<const double> q, int Kout);
std::vector<double> bs_apply_diag_parallel(const BsTable& t, std::span<const double> p,
                                           std::span<const double> q, int Kout);

// dense single-mode: tr_2 U (rho x sigma) U^dag on levels 0..Kout
Matrix bs_apply_dense_serial(const BsTable& t, const Matrix& rho, const Matrix& sigma, int Kout);
Matrix bs_apply_dense_parallel(const BsTable& t, const Matrix& rho, const Matrix& sigma, int Kout);

}  // namespace qclt::kernels
