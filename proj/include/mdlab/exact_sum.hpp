#pragma once

#include <array>
#include <cstdint>

namespace mdlab {

/// Exact accumulator for finite doubles.
///
/// Values are stored as a fixed-point integer spanning the whole double
/// range, so the represented sum does not depend on the order of additions
/// or merges. value() rounds the canonical representation, which makes the
/// result a pure function of the exact sum.
class ExactSum {
 public:
  ExactSum() { limbs_.fill(0); }

  void add(double v);
  void merge(const ExactSum& other);
  double value() const;
  bool is_zero() const;

  friend bool operator==(const ExactSum& a, const ExactSum& b);

 private:
  static constexpr int kLimbBits = 32;
  static constexpr int kLimbs = 72;
  static constexpr int kLowExponent = -1152;  // weight of bit 0 of limb 0
  static constexpr std::uint32_t kNormalizeEvery = 1u << 29;

  void normalize();

  std::array<std::int64_t, kLimbs> limbs_;
  std::uint32_t pending_ = 0;
};

}  // namespace mdlab
