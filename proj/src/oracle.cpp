#include "mdlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mdlab/errors.hpp"
#include "mdlab/exact_sum.hpp"

namespace mdlab {

namespace {

void require_x(double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("x must be finite and >= 0");
}

struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

struct Enumerator {
  // atoms[j] holds (value, log prob) of increment j.
  std::vector<std::vector<std::pair<double, double>>> atoms;
  double x = 0.0;
  ExactSum p_max;
  ExactSum p_sum;

  void walk(std::size_t depth, double s, double max_s, double v2, double log_p) {
    if (depth == atoms.size()) {
      const double p = std::exp(log_p);
      if (crosses(max_s, v2, x)) p_max.add(p);
      if (crosses(s, v2, x)) p_sum.add(p);
      return;
    }
    for (const auto& [v, lp] : atoms[depth]) {
      const double next = s + v;
      walk(depth + 1, next, std::max(max_s, next), v2 + v * v, log_p + lp);
    }
  }
};

}  // namespace

ExactResult enumerate_exact(const SequenceSpec& seq, double x) {
  require_x(x);
  if (!seq.dist().finite_support())
    throw NumericError("enumeration needs a finite-support law; use simulate for " + seq.dist().name());
  const auto base = seq.dist().atoms();
  const double paths = std::pow(static_cast<double>(base.size()), static_cast<double>(seq.n()));
  if (paths > static_cast<double>(kEnumerationBudget))
    throw NumericError("enumeration budget exceeded (" + std::to_string(base.size()) + "^" + std::to_string(seq.n()) +
                       " paths > 2^24); use lattice_dp for Rademacher walks or simulate");

  // Work in units of the largest atom, so that tie decisions do not depend
  // on the overall scale of the schedule.
  double unit = 0.0;
  for (std::uint64_t j = 1; j <= seq.n(); ++j)
    for (const auto& a : base) unit = std::max(unit, std::abs(a.value * seq.scale(j)));

  Enumerator e;
  e.x = x;
  e.atoms.resize(seq.n());
  for (std::uint64_t j = 1; j <= seq.n(); ++j)
    for (const auto& [v, p] : base) e.atoms[j - 1].emplace_back(v * seq.scale(j) / unit, std::log(p));
  e.walk(0, 0.0, -std::numeric_limits<double>::infinity(), 0.0, 0.0);

  ExactResult r;
  r.p_max = e.p_max.value();
  r.p_sum = e.p_sum.value();
  r.n = seq.n();
  r.x = x;
  r.method = OracleMethod::enumeration;
  return r;
}

std::int64_t lattice_barrier(std::uint64_t n, double x) {
  require_x(x);
  const double target = (x * x) * static_cast<double>(n);
  auto m = static_cast<std::int64_t>(std::ceil(std::sqrt(target)));
  while (m > 0 && static_cast<double>(m - 1) * static_cast<double>(m - 1) >= target) --m;
  while (static_cast<double>(m) * static_cast<double>(m) < target) ++m;
  return m;
}

ExactResult lattice_dp(std::uint64_t n, double x, double scale) {
  require_x(x);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("scale must be positive");
  if (n == 0) throw ConfigError("n must be >= 1");
  if (n > kLatticeMaxN) throw NumericError("lattice_dp supports n <= 100000");

  ExactResult r;
  r.n = n;
  r.x = x;
  r.method = OracleMethod::lattice_dp;
  const std::int64_t m = lattice_barrier(n, x);
  const auto nn = static_cast<std::int64_t>(n);
  if (m > nn) return r;  // the barrier is beyond the largest partial sum

  // State s in [-n, n] lives at index s + n.
  const std::size_t width = 2 * n + 3;
  std::vector<double> live(width, 0.0), next(width, 0.0);
  std::vector<double> free_walk(width, 0.0), free_next(width, 0.0);
  auto at = [nn](std::int64_t s) { return static_cast<std::size_t>(s + nn + 1); };
  live[at(0)] = 1.0;
  free_walk[at(0)] = 1.0;

  Kahan absorbed;
  for (std::int64_t t = 1; t <= nn; ++t) {
    const std::int64_t lo = -t;
    const std::int64_t hi = std::min(t, std::max<std::int64_t>(m, 1));
    for (std::int64_t s = lo; s <= hi; s += 2) next[at(s)] = 0.5 * (live[at(s - 1)] + live[at(s + 1)]);
    for (std::int64_t s = lo; s <= t; s += 2) free_next[at(s)] = 0.5 * (free_walk[at(s - 1)] + free_walk[at(s + 1)]);
    // Each buffer only ever holds one parity class, so entries of the
    // other class stay zero. Absorb everything at or above m.
    for (std::int64_t s = std::max(m, lo); s <= hi; ++s) {
      absorbed.add(next[at(s)]);
      next[at(s)] = 0.0;
    }
    live.swap(next);
    free_walk.swap(free_next);
  }
  r.p_max = absorbed.sum;

  Kahan tail;
  for (std::int64_t s = nn; s >= m; --s) tail.add(free_walk[at(s)]);
  r.p_sum = tail.sum;
  return r;
}

double lattice_dp_max(std::uint64_t n, double x, double scale) { return lattice_dp(n, x, scale).p_max; }
double lattice_dp_sum(std::uint64_t n, double x, double scale) { return lattice_dp(n, x, scale).p_sum; }

std::string to_string(OracleMethod m) { return m == OracleMethod::enumeration ? "enumeration" : "lattice_dp"; }

nlohmann::json to_json(const ExactResult& r) {
  return {{"p_max", r.p_max}, {"p_sum", r.p_sum}, {"n", r.n}, {"x", r.x}, {"method", to_string(r.method)}};
}

}  // namespace mdlab
