#include "qising/observables.hpp"

#include <bit>
#include <cmath>

namespace qising {

double coherence(const DensityMatrix& rho) {
  const std::size_t dim = rho.dim();
  double sum = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const auto* row = rho.data().data() + i * dim;
    for (std::size_t j = 0; j < dim; ++j)
      if (j != i) sum += std::abs(row[j]);
  }
  return sum;
}

double purity(const DensityMatrix& rho) {
  // tr(rho^2) = sum_ij rho_ij rho_ji = sum_ij |rho_ij|^2 for Hermitian rho.
  double sum = 0.0;
  for (const auto& z : rho.data()) sum += std::norm(z);
  return sum;
}

double domain_wall_expectation(const DensityMatrix& rho, const ChainGeometry& g) {
  if (g.n_sites != rho.n_sites())
    throw UsageError("domain_wall_expectation: geometry mismatch");
  const std::size_t dim = rho.dim();
  double sum = 0.0;
  for (std::size_t i = 0; i < dim; ++i)
    sum += domain_wall_count_bits(static_cast<std::uint32_t>(i), g.n_sites) *
           rho(i, i).real();
  return sum;
}

double equilibrium_probability(const DensityMatrix& rho) {
  const std::size_t dim = rho.dim();
  return rho(0, 0).real() + rho(dim - 1, dim - 1).real();
}

HammingClassGrid::HammingClassGrid(int n_sites, int c_max)
    : n_(n_sites), c_max_(c_max), side_(n_sites + 1) {
  if (c_max < 0 || c_max > n_sites) throw UsageError("c_max must be in [0, N]");
  const std::size_t cells =
      static_cast<std::size_t>(c_max_ + 1) * static_cast<std::size_t>(side_) *
      static_cast<std::size_t>(side_);
  sum_abs_.assign(cells, 0.0);
  sum_real_.assign(cells, 0.0);
  count_.assign(cells, 0);
}

std::size_t HammingClassGrid::idx(int c, int a, int b) const {
  if (c < 0 || c > c_max_ || a < 0 || a > n_ || b < 0 || b > n_)
    throw UsageError("hamming class index out of range");
  return (static_cast<std::size_t>(c) * static_cast<std::size_t>(side_) +
          static_cast<std::size_t>(a)) *
             static_cast<std::size_t>(side_) +
         static_cast<std::size_t>(b);
}

double HammingClassGrid::mean_abs(int c, int a, int b) const {
  const std::size_t k = idx(c, a, b);
  return count_[k] ? sum_abs_[k] / static_cast<double>(count_[k]) : 0.0;
}

double HammingClassGrid::mean_real(int c, int a, int b) const {
  const std::size_t k = idx(c, a, b);
  return count_[k] ? sum_real_[k] / static_cast<double>(count_[k]) : 0.0;
}

std::uint64_t HammingClassGrid::population(int c, int a, int b) const {
  return count_[idx(c, a, b)];
}

std::uint64_t HammingClassGrid::total_population() const {
  std::uint64_t total = 0;
  for (std::uint64_t c : count_) total += c;
  return total;
}

void HammingClassGrid::accumulate(int c, int a, int b, double abs_val,
                                  double real_val) {
  const std::size_t k = idx(c, a, b);
  sum_abs_[k] += abs_val;
  sum_real_[k] += real_val;
  count_[k] += 1;
}

double HammingClassGrid::antidiagonal_asymmetry(int c) const {
  double dev = 0.0;
  for (int a = 0; a <= n_; ++a)
    for (int b = 0; b <= n_; ++b)
      dev = std::max(dev, std::abs(mean_abs(c, a, b) - mean_abs(c, n_ - b, n_ - a)));
  return dev;
}

HammingClassGrid hamming_classify(const DensityMatrix& rho, int c_max) {
  const int n = rho.n_sites();
  HammingClassGrid grid(n, c_max);
  const std::size_t dim = rho.dim();
  const std::uint32_t all_down = static_cast<std::uint32_t>(dim - 1);
  for (std::size_t i = 0; i < dim; ++i) {
    const int a = std::popcount(static_cast<std::uint32_t>(i) ^ all_down);
    const auto* row = rho.data().data() + i * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      const int c = std::popcount(static_cast<std::uint32_t>(i ^ j));
      if (c > c_max) continue;
      const int b = std::popcount(static_cast<std::uint32_t>(j) ^ all_down);
      grid.accumulate(c, a, b, std::abs(row[j]), row[j].real());
    }
  }
  return grid;
}

void TimeSeries::validate() const {
  if (times.size() != values.size())
    throw UsageError("time series: times/values size mismatch");
  if (!stderrs.empty() && stderrs.size() != values.size())
    throw UsageError("time series: stderr size mismatch");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw UsageError("time series: times must be strictly increasing");
}

std::optional<double> half_time(const TimeSeries& s) {
  s.validate();
  if (s.values.empty()) return std::nullopt;
  if (s.values.front() >= 0.5) return s.times.front();
  for (std::size_t i = 1; i < s.values.size(); ++i) {
    if (s.values[i] >= 0.5) {
      const double v0 = s.values[i - 1], v1 = s.values[i];
      const double t0 = s.times[i - 1], t1 = s.times[i];
      if (v1 == v0) return t1;
      return t0 + (0.5 - v0) / (v1 - v0) * (t1 - t0);
    }
  }
  return std::nullopt;
}

}  // namespace qising
