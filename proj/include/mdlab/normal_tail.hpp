#pragma once

namespace mdlab {

/// 1 - Phi(x) for x in [-40, 40] with relative error below 1e-12.
///
/// Uses erfc for |x| <= 8 and the Mills-ratio continued fraction beyond,
/// with the Gaussian factor split as in Cody's algorithm so that the
/// exponent x^2/2 is formed without rounding loss.
double normal_tail(double x);

/// Standard normal density.
double normal_pdf(double x);

}  // namespace mdlab
