#include "qising/exact.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <iostream>

namespace qising {

const char* to_string(EvolutionMode m) {
  return m == EvolutionMode::Quantum ? "quantum" : "classical-baseline";
}

void EvolutionConfig::validate() const {
  if (n_sites < 4 || n_sites % 2 != 0)
    throw UsageError("dynamics runs need an even chain length N >= 4");
  if (n_sites > kMaxExactSites)
    throw UsageError("exact mode refused for N > " + std::to_string(kMaxExactSites));
  if (n_mcs < 1) throw UsageError("n_mcs must be >= 1");
  if (!std::is_sorted(snapshot_schedule.begin(), snapshot_schedule.end()))
    throw UsageError("snapshot schedule must be sorted");
  for (int t : snapshot_schedule)
    if (t < 0 || t > n_mcs) throw UsageError("snapshot index outside [0, n_mcs]");
}

namespace {

// Bit layout of one site's three-spin neighborhood within a chain index.
struct LocalSite {
  std::uint32_t mask = 0;
  std::array<std::uint32_t, 8> off{};
  std::vector<std::uint32_t> bases;  // all indices with the three bits clear
};

LocalSite make_local_site(int n, int q) {
  LocalSite L;
  const int left = (q + n - 1) % n;
  const int right = (q + 1) % n;
  for (std::uint32_t m = 0; m < 8; ++m) {
    const std::uint32_t b2 = (m >> 2) & 1u, b1 = (m >> 1) & 1u, b0 = m & 1u;
    L.off[m] = (b2 << left) | (b1 << q) | (b0 << right);
  }
  L.mask = L.off[7];
  const std::uint32_t dim = 1u << n;
  L.bases.reserve(dim >> 3);
  for (std::uint32_t i = 0; i < dim; ++i)
    if ((i & L.mask) == 0) L.bases.push_back(i);
  return L;
}

// Row-sparse view of an 8x8 operator.
struct SparseOp {
  struct Term {
    int b;
    double c;
  };
  std::array<std::vector<Term>, 8> rows;

  static SparseOp from(const Mat8& m) {
    SparseOp s;
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        if (m(a, b) != 0.0) s.rows[static_cast<std::size_t>(a)].push_back({b, m(a, b)});
    return s;
  }
};

// tmp = K rho, with K acting on the row-side three-spin subspace.
template <class T>
void kraus_rows(const SparseOp& K, const LocalSite& L, const std::vector<T>& in,
                std::vector<T>& tmp, std::size_t dim) {
#pragma omp parallel for schedule(static)
  for (std::int64_t bi = 0; bi < static_cast<std::int64_t>(L.bases.size()); ++bi) {
    const std::uint32_t base = L.bases[static_cast<std::size_t>(bi)];
    for (int a = 0; a < 8; ++a) {
      T* out = tmp.data() + static_cast<std::size_t>(base + L.off[static_cast<std::size_t>(a)]) * dim;
      const auto& terms = K.rows[static_cast<std::size_t>(a)];
      if (terms.empty()) {
        std::fill(out, out + dim, T{});
        continue;
      }
      {
        const T* src = in.data() + static_cast<std::size_t>(base + L.off[static_cast<std::size_t>(terms[0].b)]) * dim;
        const double c = terms[0].c;
        for (std::size_t j = 0; j < dim; ++j) out[j] = c * src[j];
      }
      for (std::size_t t = 1; t < terms.size(); ++t) {
        const T* src = in.data() + static_cast<std::size_t>(base + L.off[static_cast<std::size_t>(terms[t].b)]) * dim;
        const double c = terms[t].c;
        for (std::size_t j = 0; j < dim; ++j) out[j] += c * src[j];
      }
    }
  }
}

// acc += weight * tmp K^T, with K acting on the column-side subspace.
template <class T>
void kraus_cols_accumulate(const SparseOp& K, const LocalSite& L,
                           const std::vector<T>& tmp, std::vector<T>& acc,
                           std::size_t dim, double weight) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(dim); ++i) {
    const T* brow = tmp.data() + static_cast<std::size_t>(i) * dim;
    T* arow = acc.data() + static_cast<std::size_t>(i) * dim;
    for (int a = 0; a < 8; ++a) {
      for (const auto& term : K.rows[static_cast<std::size_t>(a)]) {
        const double wc = weight * term.c;
        const std::uint32_t oa = L.off[static_cast<std::size_t>(a)];
        const std::uint32_t ob = L.off[static_cast<std::size_t>(term.b)];
        for (const std::uint32_t base : L.bases) arow[base + oa] += wc * brow[base + ob];
      }
    }
  }
}

template <class T>
struct Engine {
  int n;
  std::size_t dim;
  SparseOp k1, k2;
  std::vector<LocalSite> sites;
  std::vector<T> cur, tmp, acc;

  Engine(int n_sites, const KrausPair& k)
      : n(n_sites),
        dim(std::size_t{1} << n_sites),
        k1(SparseOp::from(k.k1)),
        k2(SparseOp::from(k.k2)) {
    sites.reserve(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) sites.push_back(make_local_site(n, q));
    tmp.assign(dim * dim, T{});
    acc.assign(dim * dim, T{});
  }

  void site_channel_accumulate(int q, double weight) {
    const LocalSite& L = sites[static_cast<std::size_t>(q)];
    kraus_rows(k1, L, cur, tmp, dim);
    kraus_cols_accumulate(k1, L, tmp, acc, dim, weight);
    kraus_rows(k2, L, cur, tmp, dim);
    kraus_cols_accumulate(k2, L, tmp, acc, dim, weight);
  }

  void elemental_step(bool dephase) {
    std::fill(acc.begin(), acc.end(), T{});
    const double w = 1.0 / static_cast<double>(n);
    for (int q = 0; q < n; ++q) site_channel_accumulate(q, w);
    if (dephase) {
      for (std::size_t i = 0; i < dim; ++i) {
        T d = acc[i * dim + i];
        std::fill(acc.begin() + static_cast<std::ptrdiff_t>(i * dim),
                  acc.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim), T{});
        acc[i * dim + i] = d;
      }
    }
    cur.swap(acc);
  }
};

template <class T>
void load(std::vector<T>& dst, const DensityMatrix& rho);

template <>
void load<double>(std::vector<double>& dst, const DensityMatrix& rho) {
  dst.resize(rho.dim() * rho.dim());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = rho.data()[i].real();
}

template <>
void load<std::complex<double>>(std::vector<std::complex<double>>& dst,
                                const DensityMatrix& rho) {
  dst = rho.data();
}

template <class T>
void store(DensityMatrix& rho, const std::vector<T>& src) {
  for (std::size_t i = 0; i < src.size(); ++i) rho.data()[i] = src[i];
}

// Diagonal-only evolution used when the classical baseline acts on a
// diagonal state: the diagonal follows the mixture of classical transition
// matrices exactly, at 2^N cost instead of 4^N.
struct DiagonalEngine {
  int n;
  std::size_t dim;
  std::vector<LocalSite> sites;
  std::array<std::vector<std::pair<int, double>>, 8> t_cols;
  std::vector<double> cur, nxt;

  DiagonalEngine(int n_sites, const TransitionMatrix3S& t)
      : n(n_sites), dim(std::size_t{1} << n_sites) {
    for (int q = 0; q < n; ++q) sites.push_back(make_local_site(n, q));
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 8; ++i)
        if (t.entries(i, j) != 0.0)
          t_cols[static_cast<std::size_t>(j)].push_back({i, t.entries(i, j)});
    nxt.assign(dim, 0.0);
  }

  void elemental_step() {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    const double w = 1.0 / static_cast<double>(n);
    for (int q = 0; q < n; ++q) {
      const LocalSite& L = sites[static_cast<std::size_t>(q)];
      for (const std::uint32_t base : L.bases) {
        for (std::uint32_t a = 0; a < 8; ++a) {
          const double p = cur[base + L.off[a]];
          if (p == 0.0) continue;
          for (const auto& [i, tij] : t_cols[a]) {
            nxt[base + L.off[static_cast<std::size_t>(i)]] += w * tij * p;
          }
        }
      }
    }
    cur.swap(nxt);
  }
};

template <class T>
void run_mcs_engine(Engine<T>& eng, const DensityMatrix& rho0, int n_mcs,
                    const std::vector<int>& schedule, bool dephase,
                    const SnapshotObserver& observer) {
  load(eng.cur, rho0);
  std::size_t next_snap = 0;
  auto maybe_emit = [&](int t) {
    while (next_snap < schedule.size() && schedule[next_snap] == t) {
      DensityMatrix snap(rho0.n_sites());
      store(snap, eng.cur);
      observer(t, snap);
      ++next_snap;
    }
  };
  maybe_emit(0);
  for (int t = 1; t <= n_mcs; ++t) {
    for (int e = 0; e < eng.n; ++e) eng.elemental_step(dephase);
    double tr = 0.0;
    for (std::size_t i = 0; i < eng.dim; ++i) tr += std::real(eng.cur[i * eng.dim + i]);
    const double drift = std::abs(tr - 1.0);
    if (drift > 1e-8)
      throw std::runtime_error("exact evolution: trace drifted by " +
                               std::to_string(drift) + " at t=" + std::to_string(t));
    if (drift > kDensityTol) {
      std::cerr << "[qising] warning: renormalizing trace drift " << drift
                << " at t=" << t << " MCS\n";
      const double inv = 1.0 / tr;
      for (T& v : eng.cur) v *= inv;
    }
    maybe_emit(t);
  }
}

}  // namespace

DensityMatrix apply_local_channel(const DensityMatrix& rho, int site,
                                  const KrausPair& k) {
  const int n = rho.n_sites();
  if (site < 0 || site >= n) throw UsageError("site index out of range");
  if (n < 3) throw UsageError("local channel needs at least three sites");
  const std::size_t dim = rho.dim();
  const LocalSite L = make_local_site(n, site);
  const SparseOp k1 = SparseOp::from(k.k1), k2 = SparseOp::from(k.k2);
  std::vector<std::complex<double>> tmp(dim * dim), acc(dim * dim);
  kraus_rows(k1, L, rho.data(), tmp, dim);
  kraus_cols_accumulate(k1, L, tmp, acc, dim, 1.0);
  kraus_rows(k2, L, rho.data(), tmp, dim);
  kraus_cols_accumulate(k2, L, tmp, acc, dim, 1.0);
  DensityMatrix out(n);
  out.data() = std::move(acc);
  return out;
}

DensityMatrix apply_uniform_mixture_step(const DensityMatrix& rho,
                                         const KrausPair& k) {
  const int n = rho.n_sites();
  if (n < 3) throw UsageError("mixture step needs at least three sites");
  Engine<std::complex<double>> eng(n, k);
  eng.cur = rho.data();
  eng.elemental_step(false);
  DensityMatrix out(n);
  store(out, eng.cur);
  return out;
}

DensityMatrix classical_baseline_step(const DensityMatrix& rho,
                                      const KrausPair& k) {
  DensityMatrix out = apply_uniform_mixture_step(rho, k);
  out.zero_offdiagonals();
  return out;
}

void run_mcs(const DensityMatrix& rho0, const KrausPair& k, int n_mcs,
             const std::vector<int>& schedule, EvolutionMode mode,
             const SnapshotObserver& observer) {
  if (n_mcs < 0) throw UsageError("n_mcs must be >= 0");
  if (!std::is_sorted(schedule.begin(), schedule.end()))
    throw UsageError("snapshot schedule must be sorted");
  for (int t : schedule)
    if (t < 0 || t > n_mcs) throw UsageError("snapshot index outside [0, n_mcs]");
  const int n = rho0.n_sites();
  if (n < 3) throw UsageError("dynamics needs at least three sites");

  if (mode == EvolutionMode::ClassicalBaseline && rho0.max_offdiagonal() == 0.0 &&
      rho0.max_imag() == 0.0) {
    // Dephasing after every elemental step keeps the state diagonal, so the
    // diagonal Markov evolution is exact here.
    DiagonalEngine eng(n, build_classical_transition());
    eng.cur.assign(eng.dim, 0.0);
    for (std::size_t i = 0; i < eng.dim; ++i)
      eng.cur[i] = rho0.data()[i * eng.dim + i].real();
    std::size_t next_snap = 0;
    auto maybe_emit = [&](int t) {
      while (next_snap < schedule.size() && schedule[next_snap] == t) {
        DensityMatrix snap(n);
        for (std::size_t i = 0; i < eng.dim; ++i) snap(i, i) = eng.cur[i];
        observer(t, snap);
        ++next_snap;
      }
    };
    maybe_emit(0);
    for (int t = 1; t <= n_mcs; ++t) {
      for (int e = 0; e < n; ++e) eng.elemental_step();
      maybe_emit(t);
    }
    return;
  }

  const bool dephase = (mode == EvolutionMode::ClassicalBaseline);
  if (rho0.max_imag() == 0.0) {
    // Real Kraus operators keep a real state real; run in real arithmetic.
    Engine<double> eng(n, k);
    run_mcs_engine(eng, rho0, n_mcs, schedule, dephase, observer);
  } else {
    Engine<std::complex<double>> eng(n, k);
    run_mcs_engine(eng, rho0, n_mcs, schedule, dephase, observer);
  }
}

std::vector<std::pair<int, DensityMatrix>> run_mcs(const DensityMatrix& rho0,
                                                   const KrausPair& k, int n_mcs,
                                                   const std::vector<int>& schedule,
                                                   EvolutionMode mode) {
  std::vector<std::pair<int, DensityMatrix>> out;
  run_mcs(rho0, k, n_mcs, schedule, mode,
          [&](int t, const DensityMatrix& rho) { out.emplace_back(t, rho); });
  return out;
}

}  // namespace qising
