#pragma once

// Exact evolution of the full-chain density matrix under the uniform site
// mixture of local Kraus channels, plus the classical (dephased) baseline.

#include <functional>
#include <utility>
#include <vector>

#include "qising/channels.hpp"
#include "qising/density_matrix.hpp"

namespace qising {

enum class EvolutionMode { Quantum, ClassicalBaseline };

const char* to_string(EvolutionMode m);

struct EvolutionConfig {
  int n_sites = 0;
  XVariant variant = XVariant::S0;
  EvolutionMode mode = EvolutionMode::Quantum;
  int n_mcs = 1;
  std::vector<int> snapshot_schedule;  // MCS indices, sorted, within [0, n_mcs]

  void validate() const;
};

// rho' = K1_q rho K1_q' + K2_q rho K2_q' with the pair acting on sites
// (q-1, q, q+1) mod N; never materializes a 2^N x 2^N operator.
DensityMatrix apply_local_channel(const DensityMatrix& rho, int site,
                                  const KrausPair& k);

// One elemental step: rho' = (1/N) sum_q Lambda_q(rho).
DensityMatrix apply_uniform_mixture_step(const DensityMatrix& rho,
                                         const KrausPair& k);

// Elemental mixture step followed by a complete projective measurement
// (all off-diagonals zeroed).
DensityMatrix classical_baseline_step(const DensityMatrix& rho,
                                      const KrausPair& k);

// Runs n_mcs Monte Carlo steps (N elemental steps each) and calls the
// observer with deep-copied snapshots at the scheduled MCS indices.
// Trace drift beyond 1e-10 renormalizes with a warning; beyond 1e-8 aborts.
using SnapshotObserver = std::function<void(int t_mcs, const DensityMatrix&)>;

void run_mcs(const DensityMatrix& rho0, const KrausPair& k, int n_mcs,
             const std::vector<int>& schedule, EvolutionMode mode,
             const SnapshotObserver& observer);

std::vector<std::pair<int, DensityMatrix>> run_mcs(
    const DensityMatrix& rho0, const KrausPair& k, int n_mcs,
    const std::vector<int>& schedule,
    EvolutionMode mode = EvolutionMode::Quantum);

}  // namespace qising
