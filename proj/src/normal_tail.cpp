#include "mdlab/normal_tail.hpp"

#include <cmath>
#include <numbers>

#include "mdlab/errors.hpp"

namespace mdlab {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

// exp(-x^2/2) with x^2 split into an exactly representable head and a
// small tail.
double gauss_factor(double x) {
  const double head = std::trunc(x * 16.0) / 16.0;
  const double tail = (x - head) * (x + head);
  return std::exp(-0.5 * head * head) * std::exp(-0.5 * tail);
}

// Mills ratio R(x) = (1 - Phi(x)) / phi(x) for x > 8 via the continued
// fraction 1/(x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz.
double mills_ratio(double x) {
  constexpr double kTiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    d = x + k * d;
    d = d == 0.0 ? kTiny : 1.0 / d;
    c = x + k / c;
    if (c == 0.0) c = kTiny;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return 1.0 / f;
}

double upper_tail(double x) {
  if (x <= 8.0) return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0);
  return kInvSqrt2Pi * gauss_factor(x) * mills_ratio(x);
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * gauss_factor(std::abs(x)); }

double normal_tail(double x) {
  if (!(std::abs(x) <= 40.0)) throw ConfigError("normal_tail: |x| must be <= 40");
  if (x >= 0.0) return upper_tail(x);
  if (x >= -8.0) return 0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0);
  return 1.0 - upper_tail(-x);
}

}  // namespace mdlab
