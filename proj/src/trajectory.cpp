#include "qising/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qising {

TrajectoryState TrajectoryState::basis_state(int n_sites, std::uint32_t config,
                                             StateRepr repr) {
  if (n_sites < 3 || n_sites > kMaxTrajectorySites)
    throw UsageError("trajectory mode supports 3 <= N <= " +
                     std::to_string(kMaxTrajectorySites));
  if (repr == StateRepr::Dense && n_sites > kMaxDenseTrajectorySites)
    throw UsageError("dense trajectory states limited to N <= " +
                     std::to_string(kMaxDenseTrajectorySites));
  if (config >> n_sites) throw UsageError("basis config out of range");
  TrajectoryState s;
  s.n_ = n_sites;
  s.repr_ = repr;
  if (repr == StateRepr::Sparse) {
    s.sparse_.push_back({config, Complex{1.0, 0.0}});
  } else {
    s.dense_.assign(std::size_t{1} << n_sites, Complex{});
    s.dense_[config] = Complex{1.0, 0.0};
  }
  return s;
}

std::size_t TrajectoryState::support_size() const {
  if (repr_ == StateRepr::Sparse) return sparse_.size();
  std::size_t n = 0;
  for (const Complex& z : dense_)
    if (z != Complex{}) ++n;
  return n;
}

double TrajectoryState::norm2() const {
  double s = 0.0;
  for_each([&](std::uint32_t, Complex a) { s += std::norm(a); });
  return s;
}

TrajectoryState::Complex TrajectoryState::amplitude(std::uint32_t config) const {
  if (repr_ == StateRepr::Dense) return dense_[config];
  auto it = std::lower_bound(
      sparse_.begin(), sparse_.end(), config,
      [](const Entry& e, std::uint32_t c) { return e.first < c; });
  return (it != sparse_.end() && it->first == config) ? it->second : Complex{};
}

LocalKraus LocalKraus::from(const KrausPair& k) {
  LocalKraus lk;
  for (int col = 0; col < 8; ++col)
    for (int row = 0; row < 8; ++row) {
      if (k.k1(row, col) != 0.0)
        lk.k1_cols[static_cast<std::size_t>(col)].push_back({row, k.k1(row, col)});
      if (k.k2(row, col) != 0.0)
        lk.k2_cols[static_cast<std::size_t>(col)].push_back({row, k.k2(row, col)});
    }
  return lk;
}

namespace {

struct SiteBits {
  int left, mid, right;  // bit positions of sites (q-1, q, q+1) mod N
  std::uint32_t mask;
  std::array<std::uint32_t, 8> off;

  std::uint32_t local_index(std::uint32_t config) const {
    return (((config >> left) & 1u) << 2) | (((config >> mid) & 1u) << 1) |
           ((config >> right) & 1u);
  }
};

SiteBits site_bits(int n, int q) {
  SiteBits s;
  s.left = (q + n - 1) % n;
  s.mid = q;
  s.right = (q + 1) % n;
  for (std::uint32_t m = 0; m < 8; ++m) {
    const std::uint32_t b2 = (m >> 2) & 1u, b1 = (m >> 1) & 1u, b0 = m & 1u;
    s.off[m] = (b2 << s.left) | (b1 << s.mid) | (b0 << s.right);
  }
  s.mask = s.off[7];
  return s;
}

using Entry = TrajectoryState::Entry;
using Complex = TrajectoryState::Complex;

// Apply one Kraus operator to a sparse state; returns the branch weight.
double apply_sparse(const std::array<std::vector<LocalKraus::Term>, 8>& cols,
                    const SiteBits& sb, const std::vector<Entry>& in,
                    std::vector<Entry>& out) {
  out.clear();
  for (const Entry& e : in) {
    const std::uint32_t base = e.first & ~sb.mask;
    const auto& terms = cols[sb.local_index(e.first)];
    for (const auto& t : terms)
      out.push_back({base | sb.off[static_cast<std::size_t>(t.out)],
                     t.coeff * e.second});
  }
  std::sort(out.begin(), out.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  std::size_t w = 0;
  for (std::size_t r = 0; r < out.size(); ++r) {
    if (w > 0 && out[w - 1].first == out[r].first)
      out[w - 1].second += out[r].second;
    else
      out[w++] = out[r];
  }
  out.resize(w);
  double n2 = 0.0;
  for (const Entry& e : out) n2 += std::norm(e.second);
  return n2;
}

double apply_dense(const std::array<std::vector<LocalKraus::Term>, 8>& cols,
                   const SiteBits& sb, const std::vector<Complex>& in,
                   std::vector<Complex>& out) {
  out.assign(in.size(), Complex{});
  for (std::uint32_t c = 0; c < in.size(); ++c) {
    if (in[c] == Complex{}) continue;
    const std::uint32_t base = c & ~sb.mask;
    for (const auto& t : cols[sb.local_index(c)])
      out[base | sb.off[static_cast<std::size_t>(t.out)]] += t.coeff * in[c];
  }
  double n2 = 0.0;
  for (const Complex& z : out) n2 += std::norm(z);
  return n2;
}

}  // namespace

int trajectory_elemental_step_at(TrajectoryState& psi, const LocalKraus& k,
                                 int site, double u_branch, double prune_epsilon,
                                 StepScratch& scratch, StepCounters& counters) {
  const int n = psi.n_sites();
  if (site < 0 || site >= n) throw UsageError("site index out of range");
  const SiteBits sb = site_bits(n, site);

  double p1, p2;
  if (psi.repr() == StateRepr::Sparse) {
    p1 = apply_sparse(k.k1_cols, sb, psi.sparse_entries(), scratch.branch_sparse[0]);
    p2 = apply_sparse(k.k2_cols, sb, psi.sparse_entries(), scratch.branch_sparse[1]);
  } else {
    p1 = apply_dense(k.k1_cols, sb, psi.dense_entries(), scratch.branch_dense[0]);
    p2 = apply_dense(k.k2_cols, sb, psi.dense_entries(), scratch.branch_dense[1]);
  }
  if (p1 < 1e-14 && p2 < 1e-14)
    throw std::runtime_error(
        "trajectory step: both branch weights vanish (channel not CPTP?)");

  const int branch = (u_branch * (p1 + p2) < p1) ? 1 : 2;
  (branch == 1 ? counters.branch1 : counters.branch2) += 1;
  const double psel = (branch == 1) ? p1 : p2;
  const double inv = 1.0 / std::sqrt(psel);

  double norm2_after = 0.0;
  if (psi.repr() == StateRepr::Sparse) {
    auto& chosen = scratch.branch_sparse[static_cast<std::size_t>(branch - 1)];
    auto& dst = psi.sparse_entries();
    dst.clear();
    for (const Entry& e : chosen) {
      const Complex a = e.second * inv;
      if (prune_epsilon > 0.0 && std::norm(a) < prune_epsilon) {
        counters.prune_events += 1;
        continue;
      }
      dst.push_back({e.first, a});
      norm2_after += std::norm(a);
    }
  } else {
    auto& chosen = scratch.branch_dense[static_cast<std::size_t>(branch - 1)];
    auto& dst = psi.dense_entries();
    dst.swap(chosen);
    for (Complex& z : dst) {
      if (z == Complex{}) continue;
      z *= inv;
      if (prune_epsilon > 0.0 && std::norm(z) < prune_epsilon) {
        z = Complex{};
        counters.prune_events += 1;
        continue;
      }
      norm2_after += std::norm(z);
    }
  }
  if (norm2_after <= 0.0)
    throw std::runtime_error("trajectory step: state vanished after pruning");
  const double renorm = 1.0 / std::sqrt(norm2_after);
  if (psi.repr() == StateRepr::Sparse) {
    for (Entry& e : psi.sparse_entries()) e.second *= renorm;
  } else {
    for (Complex& z : psi.dense_entries())
      if (z != Complex{}) z *= renorm;
  }
  counters.max_support = std::max(counters.max_support, psi.support_size());
  return branch;
}

int trajectory_elemental_step(TrajectoryState& psi, const LocalKraus& k, Rng& rng,
                              double prune_epsilon, StepScratch& scratch,
                              StepCounters& counters) {
  const int site =
      static_cast<int>(rng.bounded(static_cast<std::uint32_t>(psi.n_sites())));
  const double u = rng.uniform01();
  return trajectory_elemental_step_at(psi, k, site, u, prune_epsilon, scratch,
                                      counters);
}

}  // namespace qising
