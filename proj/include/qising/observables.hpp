#pragma once

// Scalar observables over exact density matrices, the Hamming-triple
// classification of matrix elements, and time-series utilities.

#include <optional>
#include <string>
#include <vector>

#include "qising/config_space.hpp"
#include "qising/density_matrix.hpp"

namespace qising {

// L1 coherence: sum of |rho_ij| over i != j.
double coherence(const DensityMatrix& rho);

// tr(rho^2), in [1/2^N, 1].
double purity(const DensityMatrix& rho);

// <D_W> = sum_j n_D(j) rho_jj.
double domain_wall_expectation(const DensityMatrix& rho, const ChainGeometry& g);

// rho_00 + rho_dd with d = all-spins-down; the two uniform configurations
// span the equilibrium subspace.
double equilibrium_probability(const DensityMatrix& rho);

// Matrix elements rho_ij classified by the triple
// (a, b, c) = (d_H(i, i_d), d_H(j, i_d), d_H(i, j)) with i_d = all spins down.
class HammingClassGrid {
 public:
  HammingClassGrid(int n_sites, int c_max);

  int n_sites() const { return n_; }
  int c_max() const { return c_max_; }
  double mean_abs(int c, int a, int b) const;
  double mean_real(int c, int a, int b) const;
  std::uint64_t population(int c, int a, int b) const;
  std::uint64_t total_population() const;

  void accumulate(int c, int a, int b, double abs_val, double real_val);

  // max |mean_abs(a,b) - mean_abs(N-b,N-a)| over the class-c grid; zero for
  // patterns symmetric about the (0,N)-(N,0) off-diagonal.
  double antidiagonal_asymmetry(int c) const;

 private:
  std::size_t idx(int c, int a, int b) const;
  int n_, c_max_, side_;
  std::vector<double> sum_abs_, sum_real_;
  std::vector<std::uint64_t> count_;
};

HammingClassGrid hamming_classify(const DensityMatrix& rho, int c_max = 3);

struct TimeSeries {
  std::vector<double> times;    // MCS units, strictly increasing
  std::vector<double> values;
  std::vector<double> stderrs;  // empty in exact mode
  std::string observable;
  std::string variant;
  int n_sites = 0;
  std::string mode;

  void push(double t, double v) {
    times.push_back(t);
    values.push_back(v);
  }
  void push(double t, double v, double se) {
    push(t, v);
    stderrs.push_back(se);
  }
  void validate() const;
};

// First crossing of 1/2, linearly interpolated between adjacent samples;
// empty when the series never reaches 1/2.
std::optional<double> half_time(const TimeSeries& peq_series);

}  // namespace qising
