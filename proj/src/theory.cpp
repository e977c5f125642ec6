#include "mdlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdlab/errors.hpp"

namespace mdlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// E|X_j|^p 1{...} for X_j = s * Y.
double scaled_moment(const DistributionSpec& d, double s, double p, double cut, Side side) {
  return std::pow(s, p) * d.moment({p, cut / s, side});
}

// sum_j E|X_j|^p 1{...}.
double total_moment(const SequenceSpec& seq, double p, double cut, Side side) {
  if (seq.iid()) return static_cast<double>(seq.n()) * seq.dist().moment({p, cut, side});
  long double acc = 0.0L;
  if (std::isinf(cut) && side == Side::below) {
    for (std::uint64_t j = 1; j <= seq.n(); ++j) acc += std::pow(seq.scale(j), p);
    return static_cast<double>(acc * seq.dist().moment({p, kInf, Side::below}));
  }
  for (std::uint64_t j = 1; j <= seq.n(); ++j) acc += scaled_moment(seq.dist(), seq.scale(j), p, cut, side);
  return static_cast<double>(acc);
}

// Per-index moments, only materialized for non-iid schedules. Untruncated
// moments factor as s^p E|Y|^p, so the base moment is computed once.
std::vector<double> index_moments(const SequenceSpec& seq, double p, double cut, Side side) {
  std::vector<double> out(seq.n());
  if (std::isinf(cut) && side == Side::below) {
    const double base = seq.dist().moment({p, kInf, Side::below});
    for (std::uint64_t j = 1; j <= seq.n(); ++j) out[j - 1] = std::pow(seq.scale(j), p) * base;
    return out;
  }
  for (std::uint64_t j = 1; j <= seq.n(); ++j) out[j - 1] = scaled_moment(seq.dist(), seq.scale(j), p, cut, side);
  return out;
}

// suffix[k-1] = sum_{j>=k} v_j, with suffix[n] = 0.
std::vector<double> suffix_sums(const std::vector<double>& v) {
  std::vector<double> s(v.size() + 1, 0.0);
  long double acc = 0.0L;
  for (std::size_t i = v.size(); i-- > 0;) {
    acc += v[i];
    s[i] = static_cast<double>(acc);
  }
  return s;
}

void require_x_positive(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("x must be positive and finite");
}

}  // namespace

double compute_delta_nx(const SequenceSpec& seq, double x) {
  require_x_positive(x);
  const double bn2 = total_moment(seq, 2.0, kInf, Side::below);
  const double bn = std::sqrt(bn2);
  const double cut = bn / x;
  const double above2 = total_moment(seq, 2.0, cut, Side::above);
  const double below3 = total_moment(seq, 3.0, cut, Side::below);
  const double t = x / bn;
  return t * t * above2 + t * t * t * below3;
}

std::uint64_t compute_n0(const SequenceSpec& seq, double x) {
  require_x_positive(x);
  const std::uint64_t n = seq.n();
  const double log_term = std::max(std::log(x), 1.0);
  if (seq.iid()) {
    const double v = seq.dist().variance();
    const double bn2 = static_cast<double>(n) * v;
    const double threshold = 192.0 * bn2 * log_term / (x * x);
    auto qualifies = [&](std::uint64_t k) { return static_cast<double>(n - k + 1) * v >= threshold; };
    // Largest k with (n - k + 1) v >= threshold; refine the closed-form guess
    // against the predicate itself.
    const double guess = std::floor(static_cast<double>(n) + 1.0 - threshold / v);
    if (!(guess >= 1.0)) return qualifies(1) ? 1 : 0;
    auto k = static_cast<std::uint64_t>(std::min(guess, static_cast<double>(n)));
    while (k < n && qualifies(k + 1)) ++k;
    while (k >= 1 && !qualifies(k)) --k;
    return k;
  }
  const auto suffix = suffix_sums(index_moments(seq, 2.0, kInf, Side::below));
  const double threshold = 192.0 * suffix[0] * log_term / (x * x);
  for (std::uint64_t k = n; k >= 1; --k)
    if (suffix[k - 1] >= threshold) return k;
  return 0;
}

double proof_gamma(double delta) { return std::min(delta, 1.0) / 72.0; }

double proof_epsilon(double delta_nx, double x, double delta) {
  const double g = proof_gamma(delta);
  return std::max({2.0 * std::pow(delta_nx, 2.0 / 9.0), g / std::sqrt(x), g * std::pow(x, -delta / 10.0)});
}

TheoryQuantities compute_quantities(const SequenceSpec& seq, double x, double r, double delta, double a0_constant) {
  require_x_positive(x);
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("r must lie in (0, 1]");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(a0_constant > 0.0)) throw ConfigError("a0 constant must be positive");

  TheoryQuantities q;
  q.x = x;
  q.r = r;
  q.delta = delta;
  q.bn2 = total_moment(seq, 2.0, kInf, Side::below);
  q.lnr = total_moment(seq, 2.0 + r, kInf, Side::below);
  if (!(q.bn2 > 0.0) || !(q.lnr > 0.0)) throw NumericError("degenerate sequence: zero second moment");
  q.dnr = std::sqrt(q.bn2) / std::pow(q.lnr, 1.0 / (2.0 + r));
  q.delta_nx = compute_delta_nx(seq, x);
  q.n0 = compute_n0(seq, x);
  q.n0_applicable = q.n0 != 0;
  q.gamma = proof_gamma(delta);
  q.epsilon = proof_epsilon(q.delta_nx, x, delta);
  q.m = static_cast<std::uint64_t>(std::floor(x * x / 2.0));
  q.bor_ok = q.epsilon <= std::min(1.0 / 24.0, delta / 72.0);
  q.a0_ok = q.delta_nx <= std::min(std::pow(delta, 4.5), 1.0) / a0_constant;
  q.range_ok = x <= std::sqrt(q.bn2);
  return q;
}

Ad2Check check_ad2(const SequenceSpec& seq, double r, double delta, double tau) {
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("r must lie in (0, 1]");
  if (!(delta > 0.0) || !(tau > 0.0)) throw ConfigError("delta and tau must be positive");
  Ad2Check c;
  const double lnr = total_moment(seq, 2.0 + r, kInf, Side::below);
  const double bn2 = total_moment(seq, 2.0, kInf, Side::below);
  const double dnr = std::sqrt(bn2) / std::pow(lnr, 1.0 / (2.0 + r));
  c.rhs = tau * std::pow(lnr, r / (2.0 + r)) / std::pow(dnr, delta);
  if (seq.iid()) {
    // Every suffix ratio is the same single-increment ratio.
    c.lhs = seq.dist().abs_moment(2.0 + r) / seq.dist().variance();
    c.worst_k = 1;
  } else {
    const auto hi = suffix_sums(index_moments(seq, 2.0 + r, kInf, Side::below));
    const auto lo = suffix_sums(index_moments(seq, 2.0, kInf, Side::below));
    c.lhs = -kInf;
    for (std::uint64_t k = 1; k <= seq.n(); ++k) {
      const double ratio = hi[k - 1] / lo[k - 1];
      if (ratio > c.lhs) {
        c.lhs = ratio;
        c.worst_k = k;
      }
    }
  }
  c.ok = c.lhs <= c.rhs;
  c.margin = c.lhs / c.rhs;
  return c;
}

A2Check check_a2(const SequenceSpec& seq, double x, double delta) {
  require_x_positive(x);
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  A2Check c;
  const std::uint64_t n = seq.n();
  c.n0 = compute_n0(seq, x);
  c.applicable = c.n0 != 0 && c.n0 != n;
  const double bn = std::sqrt(total_moment(seq, 2.0, kInf, Side::below));
  const double cut = bn / x;
  c.rhs = bn / std::pow(x, 1.0 + delta);
  if (c.n0 == n) {
    c.lhs = std::numeric_limits<double>::quiet_NaN();
    c.holds = false;
    return c;
  }
  const double count = static_cast<double>(n - c.n0);
  double num = 0.0, den = 0.0;
  if (seq.iid()) {
    num = count * seq.dist().moment({3.0, cut, Side::below});
    den = count * seq.dist().variance();
  } else {
    long double a = 0.0L, b = 0.0L;
    for (std::uint64_t j = c.n0 + 1; j <= n; ++j) {
      a += scaled_moment(seq.dist(), seq.scale(j), 3.0, cut, Side::below);
      b += seq.scale(j) * seq.scale(j) * seq.dist().variance();
    }
    num = static_cast<double>(a);
    den = static_cast<double>(b);
  }
  c.lhs = num / den;
  c.holds = c.lhs <= c.rhs;
  return c;
}

BlockPartition build_blocks(const SequenceSpec& seq, double x, double epsilon) {
  if (!(x >= 2.0)) throw ConfigError("build_blocks requires x >= 2");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const std::uint64_t n = seq.n();
  std::vector<double> var;
  if (seq.iid())
    var.assign(n, seq.dist().variance());
  else
    var = index_moments(seq, 2.0, kInf, Side::below);

  long double total = 0.0L;
  double max_var = 0.0;
  for (double v : var) {
    total += v;
    max_var = std::max(max_var, v);
  }
  const double bn2 = seq.iid() ? static_cast<double>(n) * var.front() : static_cast<double>(total);
  const double eps3 = epsilon * epsilon * epsilon;

  BlockPartition p;
  p.capacity = eps3 * bn2 / (2.0 * x * x);
  p.a1_premise = x * x * max_var <= eps3 * bn2 / 4.0;
  p.count_bound = 4.0 * x * x / eps3 + 1.0;
  const double min_mass = eps3 * bn2 / (4.0 * x * x);

  std::uint64_t start = 0;  // k_{i-1}
  while (start < n) {
    std::uint64_t k = start;
    double mass = 0.0;
    while (k < n && mass + var[k] <= p.capacity) {
      mass += var[k];
      ++k;
    }
    if (k == start) {
      p.degenerate = true;
      mass = var[k];
      ++k;
    }
    if (k < n && mass < min_mass) p.min_mass_ok = false;
    p.ends.push_back(k);
    start = k;
  }
  p.blocks = p.ends.size();
  if (p.a1_premise) p.bound_ok = static_cast<double>(p.blocks) <= p.count_bound;
  return p;
}

double error_envelope(double x, double delta_nx, double delta) {
  if (!(x >= 2.0)) throw ConfigError("envelope requires x >= 2");
  if (!(delta_nx >= 0.0) || !(delta > 0.0)) throw ConfigError("envelope requires Delta >= 0 and delta > 0");
  return std::pow(x, -std::min(0.25, delta / 20.0)) + std::pow(delta_nx, 1.0 / 9.0);
}

TruncationMass truncation_mass(const SequenceSpec& seq, double x, double epsilon, double delta_nx) {
  require_x_positive(x);
  const double bn = std::sqrt(total_moment(seq, 2.0, kInf, Side::below));
  const double level = epsilon * bn / x;
  TruncationMass t;
  if (seq.iid()) {
    t.mass = static_cast<double>(seq.n()) * seq.dist().abs_tail_prob(level);
  } else {
    long double acc = 0.0L;
    for (std::uint64_t j = 1; j <= seq.n(); ++j) acc += seq.dist().abs_tail_prob(level / seq.scale(j));
    t.mass = static_cast<double>(acc);
  }
  t.middle = delta_nx / (epsilon * epsilon * epsilon);
  t.upper = std::pow(epsilon, 1.5) / 16.0;
  return t;
}

nlohmann::json to_json(const TheoryQuantities& q) {
  return {{"bn2", q.bn2},       {"lnr", q.lnr},         {"dnr", q.dnr},       {"delta_nx", q.delta_nx},
          {"n0", q.n0},         {"gamma", q.gamma},     {"epsilon", q.epsilon}, {"m", q.m},
          {"a0_ok", q.a0_ok},   {"bor_ok", q.bor_ok},   {"range_ok", q.range_ok},
          {"n0_applicable", q.n0_applicable},           {"x_over_dnr", q.x_over_dnr()}};
}

}  // namespace mdlab
