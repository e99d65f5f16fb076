#pragma once

// Stochastic wavefunction unraveling of the local two-operator channel:
// one elemental step draws a site, computes both branch weights exactly and
// keeps one branch, renormalized.

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "qising/channels.hpp"
#include "qising/config_space.hpp"
#include "qising/rng.hpp"

namespace qising {

inline constexpr int kMaxTrajectorySites = 24;
inline constexpr int kMaxDenseTrajectorySites = 14;

enum class StateRepr { Sparse, Dense };

// Pure state over spin configurations. The sparse backend stores a sorted
// (config, amplitude) list; the dense backend a full 2^N array. Both iterate
// entries in ascending config order so estimators agree between them.
class TrajectoryState {
 public:
  using Complex = std::complex<double>;
  using Entry = std::pair<std::uint32_t, Complex>;

  static TrajectoryState basis_state(int n_sites, std::uint32_t config,
                                     StateRepr repr = StateRepr::Sparse);

  int n_sites() const { return n_; }
  StateRepr repr() const { return repr_; }
  std::size_t support_size() const;  // entries with nonzero amplitude
  double norm2() const;
  Complex amplitude(std::uint32_t config) const;

  template <class F>
  void for_each(F&& f) const {  // f(config, amplitude), ascending config
    if (repr_ == StateRepr::Sparse) {
      for (const Entry& e : sparse_) f(e.first, e.second);
    } else {
      for (std::uint32_t c = 0; c < dense_.size(); ++c)
        if (dense_[c] != Complex{}) f(c, dense_[c]);
    }
  }

  // Engine access.
  std::vector<Entry>& sparse_entries() { return sparse_; }
  std::vector<Complex>& dense_entries() { return dense_; }
  const std::vector<Entry>& sparse_entries() const { return sparse_; }
  const std::vector<Complex>& dense_entries() const { return dense_; }

 private:
  int n_ = 0;
  StateRepr repr_ = StateRepr::Sparse;
  std::vector<Entry> sparse_;
  std::vector<Complex> dense_;
};

// Column-sparse form of a Kraus pair for state application.
struct LocalKraus {
  struct Term {
    int out;      // local output index
    double coeff;
  };
  std::array<std::vector<Term>, 8> k1_cols, k2_cols;
  static LocalKraus from(const KrausPair& k);
};

struct StepCounters {
  std::uint64_t prune_events = 0;
  std::uint64_t branch1 = 0;
  std::uint64_t branch2 = 0;
  std::size_t max_support = 0;
};

// Scratch buffers reused across steps.
struct StepScratch {
  std::vector<TrajectoryState::Entry> branch_sparse[2];
  std::vector<TrajectoryState::Complex> branch_dense[2];
};

// One elemental step at the given site; returns the chosen branch (1 or 2).
// Throws std::runtime_error if both branch weights vanish.
int trajectory_elemental_step_at(TrajectoryState& psi, const LocalKraus& k,
                                 int site, double u_branch, double prune_epsilon,
                                 StepScratch& scratch, StepCounters& counters);

// Draws the site uniformly and the branch from rng (two draws per step).
int trajectory_elemental_step(TrajectoryState& psi, const LocalKraus& k, Rng& rng,
                              double prune_epsilon, StepScratch& scratch,
                              StepCounters& counters);

}  // namespace qising
