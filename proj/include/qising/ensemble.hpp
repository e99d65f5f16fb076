#pragma once

// Trajectory ensembles: deterministic per-trajectory streams, snapshot
// collection, and ensemble estimators for the chain observables.

#include <cstdint>
#include <functional>
#include <vector>

#include "qising/config_space.hpp"
#include "qising/observables.hpp"
#include "qising/trajectory.hpp"

namespace qising {

struct EnsembleConfig {
  int n_traj = 1;
  std::uint64_t seed = 0;
  int n_mcs = 1;
  std::vector<double> snapshot_times_mcs;  // sorted; elemental resolution
  double prune_epsilon = 1e-16;            // squared-modulus threshold
  std::size_t coherence_budget_bytes = std::size_t{2} << 30;
  StateRepr repr = StateRepr::Sparse;

  void validate(const ChainGeometry& g) const;
};

struct EnsembleSnapshots {
  int n_sites = 0;
  std::vector<double> times_mcs;
  // states[time_index][trajectory_index]
  std::vector<std::vector<TrajectoryState>> states;
  StepCounters counters;
};

// Runs n_traj independent trajectories; trajectory m uses the stream
// (seed, m), its initial configuration drawn from the zero-magnetization
// ensemble. Deterministic for fixed config regardless of thread count.
EnsembleSnapshots run_ensemble(const EnsembleConfig& cfg, XVariant variant,
                               const ChainGeometry& g);

// Streaming variant: states are delivered per snapshot time in trajectory
// order and then discarded. sink(time_index, trajectory_index, state).
using EnsembleSink =
    std::function<void(std::size_t, std::size_t, const TrajectoryState&)>;
void run_ensemble_visit(const EnsembleConfig& cfg, XVariant variant,
                        const ChainGeometry& g, const EnsembleSink& sink,
                        StepCounters* counters = nullptr);

enum class DiagonalObservable { EquilibriumProbability, DomainWalls };

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// (1/M) sum_m <psi_m|O|psi_m> with the sample standard error.
Estimate estimate_diagonal_observable(const std::vector<TrajectoryState>& states,
                                      DiagonalObservable op,
                                      const ChainGeometry& g);

// Accumulates rho = (1/M) sum |psi><psi| over the upper triangle (i <= j).
// Dense below kDenseAccumulatorMaxSites, otherwise open-addressing hash;
// refuses with BudgetError when the hash would exceed the byte budget.
inline constexpr int kDenseAccumulatorMaxSites = 12;

class RhoAccumulator {
 public:
  RhoAccumulator(int n_sites, std::size_t budget_bytes);

  void add(const TrajectoryState& psi);
  std::size_t n_added() const { return n_added_; }

  double coherence() const;  // sum_{i != j} |rho_ij|
  double purity() const;     // sum_{ij} |rho_ij|^2
  void merge(const RhoAccumulator& other);

 private:
  static constexpr std::uint64_t kEmptyKey = ~std::uint64_t{0};
  struct Slot {
    std::uint64_t key;
    std::complex<double> val;
  };
  void hash_insert(std::uint64_t key, std::complex<double> v);
  void grow();

  int n_;
  bool dense_;
  std::size_t budget_bytes_;
  std::size_t n_added_ = 0;
  std::vector<std::complex<double>> dense_data_;
  std::vector<Slot> slots_;
  std::size_t used_ = 0;
};

double estimate_coherence(const std::vector<TrajectoryState>& states,
                          std::size_t budget_bytes = std::size_t{2} << 30);
double estimate_purity(const std::vector<TrajectoryState>& states,
                       std::size_t budget_bytes = std::size_t{2} << 30);

// All requested estimates for one run, computed stream-side so that large
// ensembles never hold every state in memory. Coherence/purity standard
// errors come from batch means over kEstimatorBatches trajectory batches.
inline constexpr int kEstimatorBatches = 10;

struct EnsembleSeriesRequest {
  bool equilibrium_probability = false;
  bool domain_walls = false;
  bool coherence = false;
  bool purity = false;
};

struct EnsembleSeries {
  TimeSeries peq, domain_walls, coherence, purity;
  StepCounters counters;
  std::vector<std::size_t> mean_support;  // per snapshot time
};

EnsembleSeries run_ensemble_series(const EnsembleConfig& cfg, XVariant variant,
                                   const ChainGeometry& g,
                                   const EnsembleSeriesRequest& req);

}  // namespace qising
