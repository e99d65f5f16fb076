#include "qising/config_space.hpp"

#include <bit>

namespace qising {

int hamming_distance(const SpinConfig& a, const SpinConfig& b) {
  if (a.n_sites != b.n_sites)
    throw UsageError("hamming_distance: configs have different site counts");
  return std::popcount(a.bits ^ b.bits);
}

int domain_wall_count_bits(std::uint32_t bits, int n_sites) {
  // XOR with the cyclic left-rotation by one site marks every wall once.
  const std::uint32_t mask = (n_sites == 31) ? 0x7FFFFFFFu : ((1u << n_sites) - 1u);
  const std::uint32_t rot = ((bits << 1) | (bits >> (n_sites - 1))) & mask;
  return std::popcount(bits ^ rot);
}

int domain_wall_count(const SpinConfig& c, const ChainGeometry& g) {
  if (c.n_sites != g.n_sites)
    throw UsageError("domain_wall_count: config does not match geometry");
  return domain_wall_count_bits(c.bits, g.n_sites);
}

int magnetization(const SpinConfig& c) {
  return c.n_sites - 2 * std::popcount(c.bits);
}

std::uint64_t binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) r = r * static_cast<std::uint64_t>(n - i) / (i + 1);
  return r;
}

std::vector<SpinConfig> zero_magnetization_ensemble(const ChainGeometry& g) {
  const int n = g.n_sites;
  if (n % 2 != 0)
    throw UsageError("zero-magnetization ensemble requires an even chain length");
  std::vector<SpinConfig> out;
  out.reserve(binomial_coefficient(n, n / 2));
  // Gosper's hack walks the fixed-popcount patterns in ascending order.
  const std::uint32_t limit = 1u << n;
  std::uint32_t v = (1u << (n / 2)) - 1u;
  while (v < limit) {
    out.emplace_back(v, n);
    const std::uint32_t t = v | (v - 1u);
    v = (t + 1u) | (((~t & (t + 1u)) - 1u) >> (std::countr_zero(v) + 1));
    if (v == 0) break;
  }
  return out;
}

SpinConfig sample_zero_magnetization(const ChainGeometry& g, Rng& rng) {
  const int n = g.n_sites;
  if (n % 2 != 0)
    throw UsageError("zero-magnetization sampling requires an even chain length");
  // Partial Fisher-Yates: pick N/2 distinct positions for the down spins.
  std::uint32_t pos[32];
  for (int i = 0; i < n; ++i) pos[i] = static_cast<std::uint32_t>(i);
  std::uint32_t bits = 0;
  for (int i = 0; i < n / 2; ++i) {
    const std::uint32_t j = i + rng.bounded(static_cast<std::uint32_t>(n - i));
    std::swap(pos[i], pos[j]);
    bits |= 1u << pos[i];
  }
  return SpinConfig(bits, n);
}

SpinConfig sample_zero_magnetization(const ChainGeometry& g, std::uint64_t seed) {
  Rng rng(seed);
  return sample_zero_magnetization(g, rng);
}

}  // namespace qising
