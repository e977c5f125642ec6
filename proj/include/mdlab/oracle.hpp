#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "mdlab/sequence.hpp"

namespace mdlab {

enum class OracleMethod { enumeration, lattice_dp };

/// Exact P(max_{k<=n} S_k >= x V_n) and P(S_n >= x V_n).
struct ExactResult {
  double p_max = 0.0;
  double p_sum = 0.0;
  std::uint64_t n = 0;
  double x = 0.0;
  OracleMethod method = OracleMethod::enumeration;
};

/// Largest number of paths enumerate_exact will visit.
inline constexpr std::uint64_t kEnumerationBudget = std::uint64_t{1} << 24;
/// Largest n accepted by the lattice DP.
inline constexpr std::uint64_t kLatticeMaxN = 100000;

/// Self-normalized barrier test S >= x sqrt(v2), evaluated without a square
/// root so that exact lattice ties are decided exactly. Requires x >= 0.
inline bool crosses(double s, double v2, double x) { return s >= 0.0 && s * s >= (x * x) * v2; }

/// Sum over every path of a finite-support schedule. Requires x >= 0 and at
/// most kEnumerationBudget paths.
ExactResult enumerate_exact(const SequenceSpec& seq, double x);

/// Rademacher(+-scale) walk, absorbing-barrier DP for the max event and the
/// terminal-sum event. The barrier is the smallest lattice point >= x sqrt(n)
/// (in units of scale), so an exact hit counts.
ExactResult lattice_dp(std::uint64_t n, double x, double scale = 1.0);
double lattice_dp_max(std::uint64_t n, double x, double scale = 1.0);
double lattice_dp_sum(std::uint64_t n, double x, double scale = 1.0);

/// Smallest integer m >= 0 with m^2 >= x^2 n, i.e. the lattice barrier.
std::int64_t lattice_barrier(std::uint64_t n, double x);

std::string to_string(OracleMethod m);
nlohmann::json to_json(const ExactResult& r);

}  // namespace mdlab
