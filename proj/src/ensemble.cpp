#include "qising/ensemble.hpp"

#include <algorithm>
#include <cmath>

namespace qising {

namespace {
constexpr std::size_t kChunk = 64;  // fixed so results do not depend on threads

std::vector<std::size_t> schedule_steps(const std::vector<double>& times_mcs,
                                        int n_sites, int n_mcs) {
  std::vector<std::size_t> steps;
  steps.reserve(times_mcs.size());
  for (double t : times_mcs) {
    if (t < 0.0 || t > static_cast<double>(n_mcs))
      throw UsageError("snapshot time outside [0, n_mcs]");
    steps.push_back(static_cast<std::size_t>(
        std::llround(t * static_cast<double>(n_sites))));
  }
  if (!std::is_sorted(steps.begin(), steps.end()))
    throw UsageError("snapshot times must be sorted");
  return steps;
}
}  // namespace

void EnsembleConfig::validate(const ChainGeometry& g) const {
  if (g.n_sites < 4 || g.n_sites % 2 != 0)
    throw UsageError("dynamics runs need an even chain length N >= 4");
  if (g.n_sites > kMaxTrajectorySites)
    throw UsageError("trajectory mode supports N <= " +
                     std::to_string(kMaxTrajectorySites));
  if (repr == StateRepr::Dense && g.n_sites > kMaxDenseTrajectorySites)
    throw UsageError("dense trajectory states limited to N <= " +
                     std::to_string(kMaxDenseTrajectorySites));
  if (n_traj < 1) throw UsageError("need at least one trajectory");
  if (n_mcs < 0) throw UsageError("n_mcs must be >= 0");
  if (prune_epsilon < 0.0 || prune_epsilon > 1e-8)
    throw UsageError("prune_epsilon must lie in [0, 1e-8]");
  schedule_steps(snapshot_times_mcs, g.n_sites, n_mcs);
}

void run_ensemble_visit(const EnsembleConfig& cfg, XVariant variant,
                        const ChainGeometry& g, const EnsembleSink& sink,
                        StepCounters* counters_out) {
  cfg.validate(g);
  const int n = g.n_sites;
  const auto steps = schedule_steps(cfg.snapshot_times_mcs, n, cfg.n_mcs);
  const LocalKraus kraus = LocalKraus::from(build_kraus(build_x_matrix(variant)));
  const std::size_t m_total = static_cast<std::size_t>(cfg.n_traj);

  StepCounters totals;
  std::vector<std::vector<TrajectoryState>> chunk_states;  // [local][time]
  std::vector<StepCounters> chunk_counters;

  for (std::size_t chunk_begin = 0; chunk_begin < m_total; chunk_begin += kChunk) {
    const std::size_t chunk_len = std::min(kChunk, m_total - chunk_begin);
    chunk_states.assign(chunk_len, {});
    chunk_counters.assign(chunk_len, {});

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t li = 0; li < static_cast<std::int64_t>(chunk_len); ++li) {
      const std::size_t m = chunk_begin + static_cast<std::size_t>(li);
      Rng rng = Rng::for_stream(cfg.seed, m);
      const SpinConfig init = sample_zero_magnetization(g, rng);
      TrajectoryState psi = TrajectoryState::basis_state(n, init.bits, cfg.repr);
      StepScratch scratch;
      StepCounters& counters = chunk_counters[static_cast<std::size_t>(li)];
      auto& snaps = chunk_states[static_cast<std::size_t>(li)];
      snaps.reserve(steps.size());

      std::size_t next = 0;
      while (next < steps.size() && steps[next] == 0) {
        snaps.push_back(psi);
        ++next;
      }
      const std::size_t last_step = steps.empty() ? 0 : steps.back();
      for (std::size_t step = 1; step <= last_step; ++step) {
        trajectory_elemental_step(psi, kraus, rng, cfg.prune_epsilon, scratch,
                                  counters);
        while (next < steps.size() && steps[next] == step) {
          snaps.push_back(psi);
          ++next;
        }
      }
    }

    for (std::size_t li = 0; li < chunk_len; ++li) {
      for (std::size_t ti = 0; ti < steps.size(); ++ti)
        sink(ti, chunk_begin + li, chunk_states[li][ti]);
      totals.prune_events += chunk_counters[li].prune_events;
      totals.branch1 += chunk_counters[li].branch1;
      totals.branch2 += chunk_counters[li].branch2;
      totals.max_support = std::max(totals.max_support, chunk_counters[li].max_support);
    }
  }
  if (counters_out) *counters_out = totals;
}

EnsembleSnapshots run_ensemble(const EnsembleConfig& cfg, XVariant variant,
                               const ChainGeometry& g) {
  EnsembleSnapshots out;
  out.n_sites = g.n_sites;
  out.times_mcs = cfg.snapshot_times_mcs;
  out.states.assign(cfg.snapshot_times_mcs.size(), {});
  for (auto& v : out.states) v.resize(static_cast<std::size_t>(cfg.n_traj));
  run_ensemble_visit(
      cfg, variant, g,
      [&](std::size_t ti, std::size_t m, const TrajectoryState& s) {
        out.states[ti][m] = s;
      },
      &out.counters);
  return out;
}

Estimate estimate_diagonal_observable(const std::vector<TrajectoryState>& states,
                                      DiagonalObservable op,
                                      const ChainGeometry& g) {
  if (states.empty()) throw UsageError("estimator needs a non-empty snapshot");
  const int n = g.n_sites;
  const std::uint32_t all_down = (n == 31) ? 0x7FFFFFFFu : ((1u << n) - 1u);
  const std::size_t m_total = states.size();
  double sum = 0.0, sum_sq = 0.0;
  for (const TrajectoryState& psi : states) {
    double v = 0.0;
    psi.for_each([&](std::uint32_t cfg, std::complex<double> a) {
      const double w = std::norm(a);
      switch (op) {
        case DiagonalObservable::EquilibriumProbability:
          if (cfg == 0u || cfg == all_down) v += w;
          break;
        case DiagonalObservable::DomainWalls:
          v += w * domain_wall_count_bits(cfg, n);
          break;
      }
    });
    sum += v;
    sum_sq += v * v;
  }
  Estimate e;
  e.value = sum / static_cast<double>(m_total);
  if (m_total > 1) {
    const double var =
        std::max(0.0, (sum_sq - sum * sum / static_cast<double>(m_total)) /
                          static_cast<double>(m_total - 1));
    e.std_error = std::sqrt(var / static_cast<double>(m_total));
  }
  return e;
}

RhoAccumulator::RhoAccumulator(int n_sites, std::size_t budget_bytes)
    : n_(n_sites), budget_bytes_(budget_bytes) {
  dense_ = n_sites <= kDenseAccumulatorMaxSites;
  if (dense_) {
    const std::size_t dim = std::size_t{1} << n_;
    const std::size_t bytes = dim * dim * sizeof(std::complex<double>);
    if (bytes > budget_bytes_)
      throw BudgetError("coherence accumulation needs " + std::to_string(bytes) +
                            " bytes (budget " + std::to_string(budget_bytes_) + ")",
                        bytes);
    dense_data_.assign(dim * dim, {});
  } else {
    slots_.assign(1 << 20, Slot{kEmptyKey, {}});
  }
}

namespace {
std::uint64_t mix_key(std::uint64_t k) {
  std::uint64_t z = k + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace

void RhoAccumulator::grow() {
  const std::size_t new_cap = slots_.size() * 2;
  const std::size_t bytes = new_cap * sizeof(Slot);
  if (bytes > budget_bytes_)
    throw BudgetError(
        "coherence accumulation exceeded its memory budget; requires at least " +
            std::to_string(bytes) + " bytes",
        bytes);
  std::vector<Slot> old;
  old.swap(slots_);
  slots_.assign(new_cap, Slot{kEmptyKey, {}});
  used_ = 0;
  for (const Slot& s : old)
    if (s.key != kEmptyKey) hash_insert(s.key, s.val);
}

void RhoAccumulator::hash_insert(std::uint64_t key, std::complex<double> v) {
  if ((used_ + 1) * 10 >= slots_.size() * 7) grow();
  const std::size_t mask = slots_.size() - 1;
  std::size_t pos = mix_key(key) & mask;
  while (true) {
    Slot& s = slots_[pos];
    if (s.key == key) {
      s.val += v;
      return;
    }
    if (s.key == kEmptyKey) {
      s.key = key;
      s.val = v;
      ++used_;
      return;
    }
    pos = (pos + 1) & mask;
  }
}

void RhoAccumulator::add(const TrajectoryState& psi) {
  if (psi.n_sites() != n_) throw UsageError("accumulator/state size mismatch");
  ++n_added_;
  // Collect the support once, then accumulate the upper triangle of the
  // outer product |psi><psi|.
  thread_local std::vector<TrajectoryState::Entry> entries;
  entries.clear();
  psi.for_each([&](std::uint32_t c, std::complex<double> a) {
    entries.push_back({c, a});
  });
  if (dense_) {
    const std::size_t dim = std::size_t{1} << n_;
    for (std::size_t ii = 0; ii < entries.size(); ++ii) {
      const auto [ci, ai] = entries[ii];
      for (std::size_t jj = ii; jj < entries.size(); ++jj) {
        const auto [cj, aj] = entries[jj];
        dense_data_[static_cast<std::size_t>(ci) * dim + cj] += ai * std::conj(aj);
      }
    }
  } else {
    for (std::size_t ii = 0; ii < entries.size(); ++ii) {
      const auto [ci, ai] = entries[ii];
      for (std::size_t jj = ii; jj < entries.size(); ++jj) {
        const auto [cj, aj] = entries[jj];
        hash_insert((static_cast<std::uint64_t>(ci) << 32) | cj,
                    ai * std::conj(aj));
      }
    }
  }
}

double RhoAccumulator::coherence() const {
  if (n_added_ == 0) throw UsageError("coherence of an empty accumulation");
  double sum = 0.0;
  if (dense_) {
    const std::size_t dim = std::size_t{1} << n_;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i + 1; j < dim; ++j)
        sum += std::abs(dense_data_[i * dim + j]);
  } else {
    std::vector<std::pair<std::uint64_t, double>> mags;
    mags.reserve(used_);
    for (const Slot& s : slots_)
      if (s.key != kEmptyKey) mags.push_back({s.key, std::abs(s.val)});
    std::sort(mags.begin(), mags.end());
    for (const auto& [key, mag] : mags)
      if ((key >> 32) != (key & 0xFFFFFFFFULL)) sum += mag;
  }
  return 2.0 * sum / static_cast<double>(n_added_);
}

double RhoAccumulator::purity() const {
  if (n_added_ == 0) throw UsageError("purity of an empty accumulation");
  double diag = 0.0, off = 0.0;
  if (dense_) {
    const std::size_t dim = std::size_t{1} << n_;
    for (std::size_t i = 0; i < dim; ++i) {
      diag += std::norm(dense_data_[i * dim + i]);
      for (std::size_t j = i + 1; j < dim; ++j)
        off += std::norm(dense_data_[i * dim + j]);
    }
  } else {
    std::vector<std::pair<std::uint64_t, double>> mags;
    mags.reserve(used_);
    for (const Slot& s : slots_)
      if (s.key != kEmptyKey) mags.push_back({s.key, std::norm(s.val)});
    std::sort(mags.begin(), mags.end());
    for (const auto& [key, m2] : mags) {
      if ((key >> 32) == (key & 0xFFFFFFFFULL))
        diag += m2;
      else
        off += m2;
    }
  }
  const double m = static_cast<double>(n_added_);
  return (diag + 2.0 * off) / (m * m);
}

void RhoAccumulator::merge(const RhoAccumulator& other) {
  if (other.n_ != n_ || other.dense_ != dense_)
    throw UsageError("cannot merge mismatched accumulators");
  n_added_ += other.n_added_;
  if (dense_) {
    for (std::size_t i = 0; i < dense_data_.size(); ++i)
      dense_data_[i] += other.dense_data_[i];
  } else {
    std::vector<Slot> sorted;
    sorted.reserve(other.used_);
    for (const Slot& s : other.slots_)
      if (s.key != kEmptyKey) sorted.push_back(s);
    std::sort(sorted.begin(), sorted.end(),
              [](const Slot& a, const Slot& b) { return a.key < b.key; });
    for (const Slot& s : sorted) hash_insert(s.key, s.val);
  }
}

double estimate_coherence(const std::vector<TrajectoryState>& states,
                          std::size_t budget_bytes) {
  if (states.empty()) throw UsageError("estimator needs a non-empty snapshot");
  RhoAccumulator acc(states.front().n_sites(), budget_bytes);
  for (const TrajectoryState& s : states) acc.add(s);
  return acc.coherence();
}

double estimate_purity(const std::vector<TrajectoryState>& states,
                       std::size_t budget_bytes) {
  if (states.empty()) throw UsageError("estimator needs a non-empty snapshot");
  RhoAccumulator acc(states.front().n_sites(), budget_bytes);
  for (const TrajectoryState& s : states) acc.add(s);
  return acc.purity();
}

EnsembleSeries run_ensemble_series(const EnsembleConfig& cfg, XVariant variant,
                                   const ChainGeometry& g,
                                   const EnsembleSeriesRequest& req) {
  EnsembleSnapshots snaps = run_ensemble(cfg, variant, g);
  EnsembleSeries out;
  out.counters = snaps.counters;

  auto init_series = [&](TimeSeries& s, const char* name) {
    s.observable = name;
    s.variant = to_string(variant);
    s.n_sites = g.n_sites;
    s.mode = "trajectory";
  };
  init_series(out.peq, "peq");
  init_series(out.domain_walls, "domains");
  init_series(out.coherence, "coherence");
  init_series(out.purity, "purity");

  const std::size_t m_total = static_cast<std::size_t>(cfg.n_traj);
  const int n_batches =
      static_cast<int>(std::min<std::size_t>(kEstimatorBatches, m_total));

  for (std::size_t ti = 0; ti < snaps.times_mcs.size(); ++ti) {
    const double t = snaps.times_mcs[ti];
    const auto& states = snaps.states[ti];

    std::size_t support = 0;
    for (const auto& s : states) support += s.support_size();
    out.mean_support.push_back(support / states.size());

    if (req.equilibrium_probability) {
      const Estimate e = estimate_diagonal_observable(
          states, DiagonalObservable::EquilibriumProbability, g);
      out.peq.push(t, e.value, e.std_error);
    }
    if (req.domain_walls) {
      const Estimate e =
          estimate_diagonal_observable(states, DiagonalObservable::DomainWalls, g);
      out.domain_walls.push(t, e.value, e.std_error);
    }
    if (req.coherence || req.purity) {
      RhoAccumulator total(g.n_sites, cfg.coherence_budget_bytes);
      std::vector<double> batch_coh, batch_pur;
      for (int b = 0; b < n_batches; ++b) {
        const std::size_t lo = m_total * static_cast<std::size_t>(b) /
                               static_cast<std::size_t>(n_batches);
        const std::size_t hi = m_total * static_cast<std::size_t>(b + 1) /
                               static_cast<std::size_t>(n_batches);
        RhoAccumulator batch(g.n_sites, cfg.coherence_budget_bytes);
        for (std::size_t m = lo; m < hi; ++m) batch.add(states[m]);
        if (batch.n_added() > 0) {
          batch_coh.push_back(batch.coherence());
          batch_pur.push_back(batch.purity());
        }
        total.merge(batch);
      }
      auto batch_sd = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::sqrt(ss / static_cast<double>(v.size() - 1) /
                         static_cast<double>(v.size()));
      };
      if (req.coherence)
        out.coherence.push(t, total.coherence(), batch_sd(batch_coh));
      if (req.purity) out.purity.push(t, total.purity(), batch_sd(batch_pur));
    }
  }
  return out;
}

}  // namespace qising
