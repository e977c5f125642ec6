#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "mdlab/normal_tail.hpp"
#include "mdlab/sequence.hpp"

namespace mdlab {

/// Moment functionals and proof constants for one (sequence, x, r, delta).
struct TheoryQuantities {
  double x = 0.0;
  double r = 1.0;
  double delta = 1.0;

  double bn2 = 0.0;       // sum of E X_j^2
  double lnr = 0.0;       // sum of E |X_j|^{2+r}
  double dnr = 0.0;       // B_n / L_{n,r}^{1/(2+r)}
  double delta_nx = 0.0;  // truncated Lyapunov-type functional at level B_n/x
  std::uint64_t n0 = 0;   // 0 when no start index qualifies
  bool n0_applicable = false;
  double gamma = 0.0;
  double epsilon = 0.0;
  std::uint64_t m = 0;  // floor(x^2/2)

  bool a0_ok = false;
  bool bor_ok = false;
  bool range_ok = false;

  double x_over_dnr() const { return x / dnr; }
};

/// Requires x > 0 and 0 < r <= 1. `a0_constant` is the absolute constant A
/// in the a0 regime test, which is not known explicitly; 1 by default.
TheoryQuantities compute_quantities(const SequenceSpec& seq, double x, double r, double delta,
                                    double a0_constant = 1.0);

/// max{k : sum_{j>=k} E X_j^2 >= 192 B_n^2 max(log x, 1) / x^2}, or 0 if the
/// set is empty.
std::uint64_t compute_n0(const SequenceSpec& seq, double x);

double compute_delta_nx(const SequenceSpec& seq, double x);

/// min(delta, 1) / 72.
double proof_gamma(double delta);

/// max(2 Delta^{2/9}, gamma x^{-1/2}, gamma x^{-delta/10}).
double proof_epsilon(double delta_nx, double x, double delta);

struct Ad2Check {
  bool ok = false;
  std::uint64_t worst_k = 1;
  double lhs = 0.0;     // max_k of the tail moment ratio
  double rhs = 0.0;     // tau L^{r/(2+r)} / d^delta
  double margin = 0.0;  // lhs / rhs
};

Ad2Check check_ad2(const SequenceSpec& seq, double r, double delta, double tau);

/// Tail condition on the indices after n0. `applicable` is false when n0 is
/// 0 (empty defining set) or n; `holds` is still evaluated over j > n0
/// whenever that range is non-empty.
struct A2Check {
  bool applicable = false;
  bool holds = false;
  std::uint64_t n0 = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

A2Check check_a2(const SequenceSpec& seq, double x, double delta);

/// Greedy block partition with per-block variance capacity eps^3 B_n^2/(2x^2).
struct BlockPartition {
  std::vector<std::uint64_t> ends;  // k_1 < ... < k_T = n
  std::uint64_t blocks = 0;         // T
  double capacity = 0.0;
  bool degenerate = false;     // some element alone exceeds the capacity
  bool a1_premise = false;     // x^2 max E X_k^2 <= eps^3 B_n^2 / 4
  double count_bound = 0.0;    // 4x^2/eps^3 + 1
  bool bound_ok = true;        // T <= count_bound (checked when a1_premise)
  bool min_mass_ok = true;     // blocks before the last carry >= eps^3 B_n^2/(4x^2)
};

/// Requires x >= 2 and 0 < epsilon.
BlockPartition build_blocks(const SequenceSpec& seq, double x, double epsilon);

/// x^{-min(1/4, delta/20)} + Delta^{1/9}; requires x >= 2. The constant in
/// front is left to the caller.
double error_envelope(double x, double delta_nx, double delta);

/// Terms of the truncation-mass chain
///   sum_k P(|X_k| >= eps B_n/x) <= eps^{-3} Delta <= eps^{3/2}/16.
struct TruncationMass {
  double mass = 0.0;
  double middle = 0.0;
  double upper = 0.0;
  bool holds() const { return mass <= middle && middle <= upper; }
};

TruncationMass truncation_mass(const SequenceSpec& seq, double x, double epsilon, double delta_nx);

nlohmann::json to_json(const TheoryQuantities& q);

}  // namespace mdlab
