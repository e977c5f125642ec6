#include "mdlab/exact_sum.hpp"

#include <cmath>
#include <stdexcept>

namespace mdlab {

void ExactSum::add(double v) {
  if (v == 0.0) return;
  if (!std::isfinite(v)) throw std::domain_error("ExactSum::add: non-finite value");
  int e = 0;
  const double f = std::frexp(v, &e);
  const auto mant = static_cast<std::int64_t>(std::ldexp(f, 53));  // |mant| < 2^53
  const int pos = e - 53 - kLowExponent;
  const bool negative = mant < 0;
  unsigned __int128 wide = static_cast<unsigned __int128>(negative ? -mant : mant) << (pos % kLimbBits);
  int limb = pos / kLimbBits;
  while (wide != 0) {
    const auto digit = static_cast<std::int64_t>(static_cast<std::uint64_t>(wide) & 0xffffffffu);
    limbs_[limb] += negative ? -digit : digit;
    wide >>= kLimbBits;
    ++limb;
  }
  if (++pending_ >= kNormalizeEvery) normalize();
}

void ExactSum::merge(const ExactSum& other) {
  ExactSum rhs = other;
  rhs.normalize();
  normalize();
  for (int i = 0; i < kLimbs; ++i) limbs_[i] += rhs.limbs_[i];
  normalize();
}

void ExactSum::normalize() {
  std::int64_t carry = 0;
  for (int i = 0; i < kLimbs - 1; ++i) {
    const std::int64_t v = limbs_[i] + carry;
    carry = v >> kLimbBits;  // arithmetic shift: floor division
    limbs_[i] = v - (carry << kLimbBits);
  }
  limbs_[kLimbs - 1] += carry;
  pending_ = 0;
}

double ExactSum::value() const {
  ExactSum c = *this;
  c.normalize();
  long double acc = 0.0L;
  for (int i = kLimbs - 1; i >= 0; --i) {
    if (c.limbs_[i] != 0)
      acc += std::ldexp(static_cast<long double>(c.limbs_[i]), kLowExponent + i * kLimbBits);
  }
  return static_cast<double>(acc);
}

bool ExactSum::is_zero() const {
  ExactSum c = *this;
  c.normalize();
  for (auto l : c.limbs_)
    if (l != 0) return false;
  return true;
}

bool operator==(const ExactSum& a, const ExactSum& b) {
  ExactSum x = a, y = b;
  x.normalize();
  y.normalize();
  return x.limbs_ == y.limbs_;
}

}  // namespace mdlab
