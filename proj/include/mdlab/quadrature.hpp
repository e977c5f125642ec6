#pragma once

#include <cmath>
#include <functional>

namespace mdlab::quad {

/// Adaptive Gauss-Kronrod integral of f over [a, b]; b may be +inf.
/// Targets an absolute error well below 1e-10 for the O(1) integrands used
/// by the moment code.
double integrate(const std::function<double(double)>& f, double a, double b);

/// Integral over [a, b] split at a, 1, 2, 4, ... so that slowly decaying
/// integrands over long ranges are resolved segment by segment.
double integrate_dyadic(const std::function<double(double)>& f, double a, double b);

}  // namespace mdlab::quad
