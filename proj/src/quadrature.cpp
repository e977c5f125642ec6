#include "mdlab/quadrature.hpp"

#include <algorithm>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mdlab::quad {

namespace {
constexpr unsigned kMaxDepth = 15;
constexpr double kRelTol = 1e-12;
}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, kMaxDepth, kRelTol, &err);
}

double integrate_dyadic(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  if (std::isinf(b)) {
    const double split = std::max(a, 1.0);
    return integrate_dyadic(f, a, split) + integrate(f, split, b);
  }
  double total = 0.0;
  double lo = a;
  double edge = 1.0;
  while (edge <= lo) edge *= 2.0;
  while (lo < b) {
    const double hi = std::min(edge, b);
    total += integrate(f, lo, hi);
    lo = hi;
    edge *= 2.0;
  }
  return total;
}

}  // namespace mdlab::quad
