#pragma once

#include <array>
#include <cstdint>

namespace mdlab {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Stateless: the output is a pure function of
/// (key, counter).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// Random stream for one simulated path, addressed by (seed, chunk, path).
///
/// Draw i of a path is a pure function of (seed, chunk, path, i), so results
/// never depend on which worker evaluates the chunk.
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t chunk, std::uint32_t path) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        chunk_(chunk),
        path_(path) {}

  std::uint64_t next_u64() noexcept {
    if (used_ >= 2) refill();
    const std::uint64_t v = (std::uint64_t{block_[2 * used_]} << 32) | block_[2 * used_ + 1];
    ++used_;
    return v;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  std::uint32_t blocks_used() const noexcept { return step_; }

 private:
  void refill() noexcept {
    block_ = Philox4x32::generate(
        {step_, path_, static_cast<std::uint32_t>(chunk_), static_cast<std::uint32_t>(chunk_ >> 32)}, key_);
    ++step_;
    used_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t chunk_;
  std::uint32_t path_;
  std::uint32_t step_ = 0;
  Philox4x32::Counter block_{};
  int used_ = 2;
};

/// SplitMix64 finalizer; used to derive per-row seeds from a sweep seed.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace mdlab
