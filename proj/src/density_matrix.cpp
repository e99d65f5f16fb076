#include "qising/density_matrix.hpp"

#include <cmath>

namespace qising {

DensityMatrix::DensityMatrix(int n_sites) : n_sites_(n_sites) {
  if (n_sites < 1) throw UsageError("density matrix needs at least one site");
  if (n_sites > kMaxExactSites)
    throw UsageError("exact mode refused: N=" + std::to_string(n_sites) +
                     " needs " + std::to_string((std::size_t{1} << (2 * n_sites)) * 16) +
                     " bytes per matrix; limit is N=" + std::to_string(kMaxExactSites));
  dim_ = std::size_t{1} << n_sites;
  a_.assign(dim_ * dim_, Complex{0.0, 0.0});
}

DensityMatrix DensityMatrix::initial_zero_magnetization(const ChainGeometry& g) {
  DensityMatrix rho(g.n_sites);
  const auto ensemble = zero_magnetization_ensemble(g);
  const double w = 1.0 / static_cast<double>(ensemble.size());
  for (const SpinConfig& c : ensemble) rho(c.bits, c.bits) = w;
  return rho;
}

DensityMatrix DensityMatrix::pure_basis_state(int n_sites, std::uint32_t config) {
  DensityMatrix rho(n_sites);
  if (config >> n_sites) throw UsageError("basis config out of range");
  rho(config, config) = 1.0;
  return rho;
}

double DensityMatrix::trace_real() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += a_[i * dim_ + i].real();
  return t;
}

double DensityMatrix::hermiticity_deviation() const {
  double dev = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j)
      dev = std::max(dev, std::abs(a_[i * dim_ + j] - std::conj(a_[j * dim_ + i])));
  return dev;
}

double DensityMatrix::min_diagonal() const {
  double m = a_[0].real();
  for (std::size_t i = 0; i < dim_; ++i) m = std::min(m, a_[i * dim_ + i].real());
  return m;
}

double DensityMatrix::max_imag() const {
  double m = 0.0;
  for (const Complex& z : a_) m = std::max(m, std::abs(z.imag()));
  return m;
}

double DensityMatrix::max_offdiagonal() const {
  double m = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j)
      if (i != j) m = std::max(m, std::abs(a_[i * dim_ + j]));
  return m;
}

void DensityMatrix::scale(double factor) {
  for (Complex& z : a_) z *= factor;
}

void DensityMatrix::zero_offdiagonals() {
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j)
      if (i != j) a_[i * dim_ + j] = 0.0;
}

bool DensityMatrix::is_valid(std::string* why) const {
  const double tr = trace_real();
  if (std::abs(tr - 1.0) > kDensityTol) {
    if (why) *why = "trace deviates: " + std::to_string(tr);
    return false;
  }
  if (hermiticity_deviation() > kDensityTol) {
    if (why) *why = "not Hermitian";
    return false;
  }
  if (min_diagonal() < -1e-12) {
    if (why) *why = "negative diagonal entry";
    return false;
  }
  return true;
}

}  // namespace qising
