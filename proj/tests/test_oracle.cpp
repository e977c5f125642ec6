#include <doctest.h>

#include <cmath>
#include <vector>

#include "mdlab/errors.hpp"
#include "mdlab/normal_tail.hpp"
#include "mdlab/oracle.hpp"

using namespace mdlab;

namespace {

// Binomial probabilities for a simple symmetric walk: P(S_n = s).
struct WalkLaw {
  std::uint64_t n;
  std::vector<long double> log_binom;  // log C(n, k)

  explicit WalkLaw(std::uint64_t n_) : n(n_), log_binom(n_ + 1) {
    for (std::uint64_t k = 0; k <= n; ++k)
      log_binom[k] = std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
                     std::lgamma(static_cast<long double>(n - k) + 1);
  }

  long double point(std::int64_t s) const {
    const auto nn = static_cast<std::int64_t>(n);
    if (s < -nn || s > nn || ((s + nn) & 1)) return 0.0L;
    const auto k = static_cast<std::uint64_t>((s + nn) / 2);
    return std::exp(log_binom[k] - static_cast<long double>(n) * std::log(2.0L));
  }

  long double at_least(std::int64_t m) const {
    long double acc = 0.0L;
    for (auto s = static_cast<std::int64_t>(n); s >= m; --s) acc += point(s);
    return acc;
  }
};

// Barrier in units of the step, found by integer search in long double.
std::int64_t barrier(std::uint64_t n, double x) {
  const long double target = static_cast<long double>(x) * x * static_cast<long double>(n);
  std::int64_t m = 0;
  while (static_cast<long double>(m) * m < target) ++m;
  return m;
}

}  // namespace

TEST_CASE("four-step walk at x = 1") {
  const auto e = enumerate_exact(SequenceSpec(Rademacher{1.0}, 4), 1.0);
  CHECK(e.p_max == 0.375);
  CHECK(e.p_sum == 5.0 / 16.0);
  CHECK(e.method == OracleMethod::enumeration);
  const auto d = lattice_dp(4, 1.0);
  CHECK(d.p_max == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(d.p_sum == doctest::Approx(5.0 / 16.0).epsilon(1e-15));
  CHECK(d.method == OracleMethod::lattice_dp);
}

TEST_CASE("enumeration and lattice DP agree for n <= 20") {
  for (std::uint64_t n = 1; n <= 20; ++n)
    for (double x : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      const auto e = enumerate_exact(SequenceSpec(Rademacher{1.0}, n), x);
      const auto d = lattice_dp(n, x);
      CAPTURE(n);
      CAPTURE(x);
      CHECK(std::abs(e.p_max - d.p_max) <= 1e-12);
      CHECK(std::abs(e.p_sum - d.p_sum) <= 1e-12);
    }
}

TEST_CASE("lattice DP matches the reflection identity") {
  // For a barrier m >= 1: P(max S_k >= m) = 2 P(S_n >= m) - P(S_n = m).
  for (std::uint64_t n : {1ull, 2ull, 9ull, 50ull, 257ull, 1000ull, 4096ull})
    for (double x : {0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
      const auto m = barrier(n, x);
      if (m < 1) continue;
      const WalkLaw law(n);
      const long double tail = law.at_least(m);
      const long double expect_max = 2.0L * tail - law.point(m);
      const auto d = lattice_dp(n, x);
      CAPTURE(n);
      CAPTURE(x);
      CHECK(lattice_barrier(n, x) == m);
      CHECK(d.p_sum == doctest::Approx(static_cast<double>(tail)).epsilon(1e-11));
      CHECK(d.p_max == doctest::Approx(static_cast<double>(expect_max)).epsilon(1e-11));
    }
}

TEST_CASE("barrier ties count as crossings") {
  CHECK(lattice_barrier(4, 1.0) == 2);
  CHECK(lattice_barrier(16, 1.5) == 6);
  CHECK(lattice_barrier(16384, 1.5) == 192);
  CHECK(lattice_barrier(17, 1.0) == 5);
  CHECK(crosses(2.0, 4.0, 1.0));
  CHECK_FALSE(crosses(-2.0, 4.0, 0.0));
  CHECK(crosses(0.0, 4.0, 0.0));
  CHECK_FALSE(crosses(-1e-300, 4.0, 0.0));
}

TEST_CASE("barrier beyond the longest path gives zero") {
  for (std::uint64_t n : {1ull, 4ull, 25ull, 100ull}) {
    const double x = std::sqrt(static_cast<double>(n)) * 1.01;
    const auto d = lattice_dp(n, x);
    CHECK(d.p_max == 0.0);
    CHECK(d.p_sum == 0.0);
    if (n <= 20) {
      const auto e = enumerate_exact(SequenceSpec(Rademacher{1.0}, n), x);
      CHECK(e.p_max == 0.0);
      CHECK(e.p_sum == 0.0);
    }
  }
}

TEST_CASE("x = 0 probabilities") {
  for (std::uint64_t n : {2ull, 6ull, 10ull, 100ull, 1000ull}) {
    const auto d = lattice_dp(n, 0.0);
    const WalkLaw law(n);
    CHECK(d.p_max >= 0.5);
    CHECK(d.p_sum == doctest::Approx(static_cast<double>((1.0L + law.point(0)) / 2.0L)).epsilon(1e-12));
  }
  for (const auto& dist : {DistributionSpec(TwoPoint{2.0, 1.0}), DistributionSpec(Rademacher{3.0})}) {
    const auto e = enumerate_exact(SequenceSpec(dist, 10), 0.0);
    CHECK(e.p_max >= e.p_sum);
    if (dist.name() == "rademacher") CHECK(e.p_max >= 0.5);
  }
}

TEST_CASE("results do not depend on the step scale") {
  for (double c : {1e-3, 0.1, 1.0, 7.0, 1e3})
    for (std::uint64_t n : {4ull, 9ull, 16ull})
      for (double x : {0.5, 1.0, 1.5}) {
        const auto base_e = enumerate_exact(SequenceSpec(Rademacher{1.0}, n), x);
        const auto e = enumerate_exact(SequenceSpec(Rademacher{c}, n), x);
        CHECK(e.p_max == base_e.p_max);
        CHECK(e.p_sum == base_e.p_sum);
        const auto base_d = lattice_dp(n, x);
        const auto d = lattice_dp(n, x, c);
        CHECK(d.p_max == base_d.p_max);
        CHECK(d.p_sum == base_d.p_sum);
      }
  // a rescaled explicit schedule as well
  const SequenceSpec two(TwoPoint{2.0, 1.0}, 10);
  for (double c : {1e-3, 1e3}) {
    const auto a = enumerate_exact(two, 0.7);
    const auto b = enumerate_exact(two.rescaled(c), 0.7);
    CHECK(a.p_max == b.p_max);
    CHECK(a.p_sum == b.p_sum);
  }
}

TEST_CASE("containment and monotonicity in x") {
  for (const auto& seq : {SequenceSpec(Rademacher{1.0}, 12), SequenceSpec(TwoPoint{2.0, 1.0}, 10),
                          SequenceSpec(TwoPoint{0.5, 3.0}, std::vector<double>{1, 2, 3, 1, 2, 3, 1, 2})}) {
    double prev_max = 2.0, prev_sum = 2.0;
    for (double x = 0.0; x <= 4.0; x += 0.125) {
      const auto e = enumerate_exact(seq, x);
      CHECK(0.0 <= e.p_sum);
      CHECK(e.p_sum <= e.p_max);
      CHECK(e.p_max <= 1.0);
      CHECK(e.p_max <= prev_max);
      CHECK(e.p_sum <= prev_sum);
      prev_max = e.p_max;
      prev_sum = e.p_sum;
    }
  }
  double prev = 2.0;
  for (double x = 0.0; x <= 3.0; x += 0.05) {
    const auto d = lattice_dp(500, x);
    CHECK(d.p_sum <= d.p_max);
    CHECK(d.p_max <= prev);
    prev = d.p_max;
  }
}

TEST_CASE("enumeration of a skewed two-point law against direct counting") {
  // TwoPoint(2,1): value +2 w.p. 1/3, -1 w.p. 2/3. For n = 3 list the 8 paths.
  const SequenceSpec seq(TwoPoint{2.0, 1.0}, 3);
  const double x = 0.5;
  double p_max = 0.0, p_sum = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    double s = 0.0, v2 = 0.0, mx = -1e300, p = 1.0;
    for (int j = 0; j < 3; ++j) {
      const bool up = (mask >> j) & 1;
      const double v = up ? 2.0 : -1.0;
      p *= up ? 1.0 / 3.0 : 2.0 / 3.0;
      s += v;
      v2 += v * v;
      mx = std::max(mx, s);
    }
    if (mx >= x * std::sqrt(v2)) p_max += p;
    if (s >= x * std::sqrt(v2)) p_sum += p;
  }
  const auto e = enumerate_exact(seq, x);
  CHECK(e.p_max == doctest::Approx(p_max).epsilon(1e-14));
  CHECK(e.p_sum == doctest::Approx(p_sum).epsilon(1e-14));
}

TEST_CASE("ratios at n = 16384, x = 1.5") {
  const auto d = lattice_dp(16384, 1.5);
  const double tail = normal_tail(1.5);
  CHECK(d.p_max / (2.0 * tail) >= 0.95);
  CHECK(d.p_max / (2.0 * tail) <= 1.05);
  CHECK(d.p_sum / tail >= 0.97);
  CHECK(d.p_sum / tail <= 1.03);
}

TEST_CASE("oracle errors") {
  CHECK_THROWS_AS(enumerate_exact(SequenceSpec(Rademacher{1.0}, 25), 1.0), NumericError);
  CHECK_THROWS_AS(enumerate_exact(SequenceSpec(Uniform{1.0}, 3), 1.0), NumericError);
  CHECK_THROWS_AS(lattice_dp(kLatticeMaxN + 1, 1.0), NumericError);
  CHECK_THROWS_AS(lattice_dp(10, -1.0), ConfigError);
  CHECK_THROWS_AS(lattice_dp(10, 1.0, 0.0), ConfigError);
  CHECK_NOTHROW(enumerate_exact(SequenceSpec(Rademacher{1.0}, 24), 1.0));
}

TEST_CASE("result JSON") {
  const auto j = to_json(lattice_dp(4, 1.0));
  CHECK(j["p_max"].get<double>() == doctest::Approx(0.375));
  CHECK(j["method"] == "lattice_dp");
  CHECK(j["n"] == 4);
}
