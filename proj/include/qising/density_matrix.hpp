#pragma once

// Dense 2^N x 2^N density matrix for the exact evolution mode (N <= 12).

#include <complex>
#include <cstdint>
#include <vector>

#include "qising/common.hpp"
#include "qising/config_space.hpp"

namespace qising {

inline constexpr int kMaxExactSites = 12;

class DensityMatrix {
 public:
  using Complex = std::complex<double>;

  explicit DensityMatrix(int n_sites);

  // Uniform mixture of all zero-magnetization configurations.
  static DensityMatrix initial_zero_magnetization(const ChainGeometry& g);
  static DensityMatrix pure_basis_state(int n_sites, std::uint32_t config);

  int n_sites() const { return n_sites_; }
  std::size_t dim() const { return dim_; }

  Complex& operator()(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
  Complex operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }
  const std::vector<Complex>& data() const { return a_; }
  std::vector<Complex>& data() { return a_; }

  double trace_real() const;
  double hermiticity_deviation() const;  // max |rho_ij - conj(rho_ji)|
  double min_diagonal() const;
  double max_imag() const;
  double max_offdiagonal() const;
  void scale(double factor);
  void zero_offdiagonals();

  // Trace within kDensityTol of 1, Hermitian, diagonal >= -1e-12.
  bool is_valid(std::string* why = nullptr) const;

 private:
  int n_sites_;
  std::size_t dim_;
  std::vector<Complex> a_;
};

}  // namespace qising
