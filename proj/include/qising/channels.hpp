#pragma once

// Local channels for the three-spin neighborhood: the classical Glauber
// transition matrix, its incoherent Kraus embedding, and the two-operator
// quantum extensions built from an embedded 4x4 matrix X.
//
// Three-spin basis: |s_{q-1} s_q s_{q+1}> read as a binary number, i.e.
// index = 4*s_{q-1} + 2*s_q + s_{q+1}, ordered |000>, |001>, ..., |111>.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "qising/common.hpp"

namespace qising {

struct Mat4 {
  std::array<double, 16> a{};
  double& operator()(int r, int c) { return a[static_cast<std::size_t>(4 * r + c)]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(4 * r + c)]; }
};

struct Mat8 {
  std::array<double, 64> a{};
  double& operator()(int r, int c) { return a[static_cast<std::size_t>(8 * r + c)]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(8 * r + c)]; }
};

using Rho8 = std::array<std::complex<double>, 64>;  // 8x8 density matrix, row-major

enum class XVariant { H0, H1, H2, S2, S1, S0, Custom };

const char* to_string(XVariant v);
XVariant x_variant_from_string(const std::string& name);  // throws UsageError
inline constexpr std::array<XVariant, 6> kAllVariants = {
    XVariant::H0, XVariant::H1, XVariant::H2,
    XVariant::S2, XVariant::S1, XVariant::S0};

struct TransitionMatrix3S {
  Mat8 entries;
};

struct XMatrix {
  Mat4 entries;
  XVariant variant = XVariant::Custom;
};

struct KrausPair {
  Mat8 k1, k2;
};

// X block rows/columns 1..4 live on three-spin basis states {1,3,4,6}
// (|001>, |011>, |100>, |110>); the remaining states carry fixed entries.
inline constexpr std::array<int, 4> kXBasisMap = {1, 3, 4, 6};

// The zero-temperature Glauber rule as an 8x8 column-stochastic matrix.
TransitionMatrix3S build_classical_transition();

// Single-spin gates used to assemble the variants. H*H = 1, S = sigma_x * H.
Mat4 kron2(const std::array<double, 4>& lhs, const std::array<double, 4>& rhs);
XMatrix build_x_matrix(XVariant variant);  // throws UsageError on Custom
XMatrix custom_x_matrix(const Mat4& entries);

// Populate the Kraus pair from X. Fixed entries: K1(0,0)=K1(7,7)=1,
// K2(0,2)=K2(7,5)=1; the X blocks fill the {1,3} and {4,6} subspaces.
KrausPair build_kraus(const XMatrix& x);

struct CheckResult {
  bool ok = false;
  double max_deviation = 0.0;
};

// max |K1'K1 + K2'K2 - 1| against kChannelTol.
CheckResult verify_cptp(const KrausPair& k);

// Kraus-set completeness for an arbitrary operator list.
CheckResult verify_completeness(const std::vector<Mat8>& ops);

// P o Lambda o P == Lambda_T on the three-spin space: for every basis column
// j the induced jump probabilities sum(|K_alpha(i,j)|^2) must reproduce T.
// Requires verify_cptp(k).ok, else UsageError.
CheckResult verify_extension(const KrausPair& k, const TransitionMatrix3S& t);
CheckResult verify_extension_ops(const std::vector<Mat8>& ops,
                                 const TransitionMatrix3S& t);

// The eight |X_{1c}|^2+|X_{3c}|^2 and |X_{2c}|^2+|X_{4c}|^2 sums minus 1/2,
// c = 1..4; all vanish for a valid quantum extension.
std::array<double, 8> extension_relation_residuals(const XMatrix& x);

// Rank-one operators sqrt(T_ij) |i><j|, one per nonzero entry of T.
struct ClassicalKrausSet {
  struct RankOne {
    int row = 0, col = 0;
    double weight = 0.0;  // sqrt(T_ij)
  };
  std::vector<RankOne> operators;
  std::vector<Mat8> as_matrices() const;
};

ClassicalKrausSet build_classical_kraus(const TransitionMatrix3S& t);

// Apply a channel to an 8x8 density matrix (used by verifiers and tests).
Rho8 apply_kraus_pair(const KrausPair& k, const Rho8& rho);
Rho8 apply_classical_kraus(const ClassicalKrausSet& ops, const Rho8& rho);

}  // namespace qising
