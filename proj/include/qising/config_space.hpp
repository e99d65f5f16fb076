#pragma once

// Bit-level spin configurations for a periodic chain of N two-state spins.
// Bit q holds spin s_q (0 = up, 1 = down); the configuration index is the
// binary number s_{N-1} ... s_0.

#include <cstdint>
#include <vector>

#include "qising/common.hpp"
#include "qising/rng.hpp"

namespace qising {

struct ChainGeometry {
  int n_sites = 0;  // periodic boundary; site q's neighbors are (q±1) mod N

  explicit ChainGeometry(int n) : n_sites(n) {
    if (n < 1 || n > 31) throw UsageError("chain length must be in [1,31]");
  }
};

struct SpinConfig {
  std::uint32_t bits = 0;
  int n_sites = 0;

  SpinConfig() = default;
  SpinConfig(std::uint32_t bits, int n_sites) : bits(bits), n_sites(n_sites) {
    if (n_sites < 1 || n_sites > 31) throw UsageError("config size out of range");
    if (bits >> n_sites) throw UsageError("config has bits above site count");
  }
  bool operator==(const SpinConfig&) const = default;
};

int hamming_distance(const SpinConfig& a, const SpinConfig& b);

// Number of adjacent anti-aligned pairs, including the wrap-around pair.
int domain_wall_count(const SpinConfig& c, const ChainGeometry& g);
int domain_wall_count_bits(std::uint32_t bits, int n_sites);

// (#up - #down) = N - 2*popcount.
int magnetization(const SpinConfig& c);

// All C(N, N/2) configurations with exactly N/2 down spins, in ascending
// bit-pattern order. Requires N even.
std::vector<SpinConfig> zero_magnetization_ensemble(const ChainGeometry& g);

// Uniform draw from the zero-magnetization set.
SpinConfig sample_zero_magnetization(const ChainGeometry& g, Rng& rng);
SpinConfig sample_zero_magnetization(const ChainGeometry& g, std::uint64_t seed);

std::uint64_t binomial_coefficient(int n, int k);

}  // namespace qising
