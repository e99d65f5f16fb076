#include "qising/channels.hpp"

#include <cmath>

namespace qising {

const char* to_string(XVariant v) {
  switch (v) {
    case XVariant::H0: return "H0";
    case XVariant::H1: return "H1";
    case XVariant::H2: return "H2";
    case XVariant::S2: return "S2";
    case XVariant::S1: return "S1";
    case XVariant::S0: return "S0";
    case XVariant::Custom: return "custom";
  }
  return "?";
}

XVariant x_variant_from_string(const std::string& name) {
  for (XVariant v : kAllVariants)
    if (name == to_string(v)) return v;
  throw UsageError("unknown variant '" + name + "' (expected H0,H1,H2,S2,S1,S0)");
}

TransitionMatrix3S build_classical_transition() {
  // Columns are input states |s_{q-1} s_q s_{q+1}>. Aligned neighbors copy
  // the left neighbor into s_q; opposed neighbors randomize s_q 50/50.
  TransitionMatrix3S t;
  Mat8& m = t.entries;
  m(0, 0) = 1.0;
  m(0, 2) = 1.0;
  m(1, 1) = 0.5;
  m(3, 1) = 0.5;
  m(1, 3) = 0.5;
  m(3, 3) = 0.5;
  m(4, 4) = 0.5;
  m(6, 4) = 0.5;
  m(4, 6) = 0.5;
  m(6, 6) = 0.5;
  m(7, 5) = 1.0;
  m(7, 7) = 1.0;
  return t;
}

Mat4 kron2(const std::array<double, 4>& lhs, const std::array<double, 4>& rhs) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          out(2 * i + k, 2 * j + l) = lhs[static_cast<std::size_t>(2 * i + j)] *
                                      rhs[static_cast<std::size_t>(2 * k + l)];
  return out;
}

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
// Row-major 2x2 single-spin gates.
constexpr std::array<double, 4> kId = {1.0, 0.0, 0.0, 1.0};
constexpr std::array<double, 4> kSigmaX = {0.0, 1.0, 1.0, 0.0};
constexpr std::array<double, 4> kHadamard = {kInvSqrt2, kInvSqrt2, kInvSqrt2,
                                             -kInvSqrt2};
// S = sigma_x * H; maps |0> -> |+>, |1> -> -|->.
constexpr std::array<double, 4> kSGate = {kInvSqrt2, -kInvSqrt2, kInvSqrt2,
                                          kInvSqrt2};
}  // namespace

XMatrix build_x_matrix(XVariant variant) {
  XMatrix x;
  x.variant = variant;
  switch (variant) {
    case XVariant::H0: x.entries = kron2(kId, kHadamard); break;
    case XVariant::S0: x.entries = kron2(kId, kSGate); break;
    case XVariant::H1: x.entries = kron2(kSigmaX, kHadamard); break;
    case XVariant::H2: x.entries = kron2(kHadamard, kHadamard); break;
    case XVariant::S2: x.entries = kron2(kSGate, kSGate); break;
    case XVariant::S1: x.entries = kron2(kSigmaX, kSGate); break;
    case XVariant::Custom:
      throw UsageError("build_x_matrix: custom variant needs explicit entries");
  }
  return x;
}

XMatrix custom_x_matrix(const Mat4& entries) {
  XMatrix x;
  x.entries = entries;
  x.variant = XVariant::Custom;
  return x;
}

KrausPair build_kraus(const XMatrix& x) {
  KrausPair k;
  k.k1(0, 0) = 1.0;
  k.k1(7, 7) = 1.0;
  k.k2(0, 2) = 1.0;
  k.k2(7, 5) = 1.0;
  const Mat4& X = x.entries;
  // K1 carries the diagonal blocks of X, K2 the anti-diagonal blocks;
  // block row/col 0 of X sits on states {1,3}, block 1 on {4,6}.
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      k.k1(kXBasisMap[static_cast<std::size_t>(r)],
           kXBasisMap[static_cast<std::size_t>(c)]) = X(r, c);
      k.k1(kXBasisMap[static_cast<std::size_t>(2 + r)],
           kXBasisMap[static_cast<std::size_t>(2 + c)]) = X(2 + r, 2 + c);
      k.k2(kXBasisMap[static_cast<std::size_t>(r)],
           kXBasisMap[static_cast<std::size_t>(c)]) = X(2 + r, c);
      k.k2(kXBasisMap[static_cast<std::size_t>(2 + r)],
           kXBasisMap[static_cast<std::size_t>(2 + c)]) = X(r, 2 + c);
    }
  }
  return k;
}

CheckResult verify_completeness(const std::vector<Mat8>& ops) {
  double dev = 0.0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      double s = 0.0;
      for (const Mat8& k : ops)
        for (int r = 0; r < 8; ++r) s += k(r, i) * k(r, j);
      const double want = (i == j) ? 1.0 : 0.0;
      dev = std::max(dev, std::abs(s - want));
    }
  }
  return {dev <= kChannelTol, dev};
}

CheckResult verify_cptp(const KrausPair& k) {
  return verify_completeness({k.k1, k.k2});
}

CheckResult verify_extension_ops(const std::vector<Mat8>& ops,
                                 const TransitionMatrix3S& t) {
  double dev = 0.0;
  for (int j = 0; j < 8; ++j) {
    for (int i = 0; i < 8; ++i) {
      double p = 0.0;
      for (const Mat8& k : ops) p += k(i, j) * k(i, j);
      dev = std::max(dev, std::abs(p - t.entries(i, j)));
    }
  }
  return {dev <= kChannelTol, dev};
}

CheckResult verify_extension(const KrausPair& k, const TransitionMatrix3S& t) {
  const CheckResult cptp = verify_cptp(k);
  if (!cptp.ok)
    throw UsageError("verify_extension: Kraus pair is not CPTP (deviation " +
                     std::to_string(cptp.max_deviation) + ")");
  return verify_extension_ops({k.k1, k.k2}, t);
}

std::array<double, 8> extension_relation_residuals(const XMatrix& x) {
  const Mat4& X = x.entries;
  std::array<double, 8> res{};
  for (int c = 0; c < 4; ++c) {
    res[static_cast<std::size_t>(2 * c)] =
        X(0, c) * X(0, c) + X(2, c) * X(2, c) - 0.5;
    res[static_cast<std::size_t>(2 * c + 1)] =
        X(1, c) * X(1, c) + X(3, c) * X(3, c) - 0.5;
  }
  return res;
}

ClassicalKrausSet build_classical_kraus(const TransitionMatrix3S& t) {
  ClassicalKrausSet set;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double p = t.entries(i, j);
      if (p < 0.0)
        throw UsageError("build_classical_kraus: negative transition entry");
      if (p > 0.0) set.operators.push_back({i, j, std::sqrt(p)});
    }
  }
  return set;
}

std::vector<Mat8> ClassicalKrausSet::as_matrices() const {
  std::vector<Mat8> out;
  out.reserve(operators.size());
  for (const RankOne& op : operators) {
    Mat8 m;
    m(op.row, op.col) = op.weight;
    out.push_back(m);
  }
  return out;
}

Rho8 apply_kraus_pair(const KrausPair& k, const Rho8& rho) {
  Rho8 out{};
  for (const Mat8* km : {&k.k1, &k.k2}) {
    const Mat8& K = *km;
    Rho8 tmp{};  // K * rho
    for (int i = 0; i < 8; ++i)
      for (int l = 0; l < 8; ++l) {
        if (K(i, l) == 0.0) continue;
        for (int j = 0; j < 8; ++j)
          tmp[static_cast<std::size_t>(8 * i + j)] +=
              K(i, l) * rho[static_cast<std::size_t>(8 * l + j)];
      }
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        for (int l = 0; l < 8; ++l)
          out[static_cast<std::size_t>(8 * i + j)] +=
              tmp[static_cast<std::size_t>(8 * i + l)] * K(j, l);
  }
  return out;
}

Rho8 apply_classical_kraus(const ClassicalKrausSet& ops, const Rho8& rho) {
  // sqrt(Tij)|i><j| rho sqrt(Tij)|j><i| = Tij rho_jj |i><i|
  Rho8 out{};
  for (const ClassicalKrausSet::RankOne& op : ops.operators)
    out[static_cast<std::size_t>(8 * op.row + op.row)] +=
        op.weight * op.weight * rho[static_cast<std::size_t>(8 * op.col + op.col)];
  return out;
}

}  // namespace qising
