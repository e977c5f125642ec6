#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdlab/distributions.hpp"
#include "mdlab/exact_sum.hpp"
#include "mdlab/sequence.hpp"

namespace mdlab {

enum class Method { naive, tilted };
enum class Event { max, sum };

std::string to_string(Method m);
std::string to_string(Event e);
Method method_from_string(const std::string& s);

/// Paths per chunk. Chunk c covers global paths [c * kChunkPaths, ...) and
/// draws from streams keyed by (seed, c, path-in-chunk).
inline constexpr std::uint32_t kChunkPaths = 1u << 16;

/// Tail probability estimate backed by exact sufficient statistics, so that
/// merging is associative and commutative bit for bit.
class TailEstimate {
 public:
  TailEstimate(Method method, Event event, std::uint64_t seed, std::uint64_t problem_key)
      : method_(method), event_(event), seed_(seed), problem_key_(problem_key) {}

  /// Identity element for merge().
  static TailEstimate empty(Method method, Event event, std::uint64_t problem_key = 0) {
    TailEstimate e(method, event, 0, problem_key);
    e.mixed_seed_ = true;
    return e;
  }

  /// Records one path: `hit` is the event indicator, `weight` the likelihood
  /// ratio (1 for naive sampling).
  void record(bool hit, double weight) {
    ++n_samples_;
    if (!hit) return;
    ++hits_;
    if (method_ == Method::tilted) {
      sum_w_.add(weight);
      sum_w2_.add(weight * weight);
    }
  }

  double p_hat() const;
  /// naive: sqrt(p(1-p)/N); tilted: sqrt(sample variance of w 1{hit} / N).
  double std_error() const;

  std::uint64_t n_samples() const noexcept { return n_samples_; }
  std::uint64_t hits() const noexcept { return hits_; }
  Method method() const noexcept { return method_; }
  Event event() const noexcept { return event_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// True when the estimate pools runs with different seeds.
  bool mixed_seed() const noexcept { return mixed_seed_; }
  std::uint64_t problem_key() const noexcept { return problem_key_; }

  friend TailEstimate merge(const TailEstimate& a, const TailEstimate& b);
  friend bool operator==(const TailEstimate& a, const TailEstimate& b);

 private:
  Method method_;
  Event event_;
  std::uint64_t seed_;
  std::uint64_t problem_key_;
  bool mixed_seed_ = false;
  std::uint64_t n_samples_ = 0;
  std::uint64_t hits_ = 0;
  ExactSum sum_w_;
  ExactSum sum_w2_;
};

/// Pools two estimates of the same event, method and problem. Throws
/// ConfigError on mismatched metadata.
TailEstimate merge(const TailEstimate& a, const TailEstimate& b);

/// Common exponential tilt that moves the mean of S_n to x B_n.
struct TiltPlan {
  double theta = 0.0;
  double step_log_mgf = 0.0;   // log MGF of one step (mean over steps when scaled)
  double total_log_mgf = 0.0;  // sum of per-step log MGFs
  double target_drift = 0.0;   // x B_n / n
  double achieved_drift = 0.0; // mean tilted increment at theta
  std::vector<TiltedLaw> laws; // one entry for iid, otherwise one per step
};

/// Bounded-support schedules only; x >= 0.
TiltPlan choose_tilt(const SequenceSpec& seq, double x);

struct SimulationRequest {
  double x = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  Method method = Method::naive;
  int workers = 0;                // <= 0: OpenMP default
  std::uint64_t first_chunk = 0;  // stream offset, for split runs
};

struct SimulationResult {
  TailEstimate max;
  TailEstimate sum;
};

/// Parallel estimator. Output is identical for any worker count.
SimulationResult simulate(const SequenceSpec& seq, const SimulationRequest& req);

/// Single-threaded reference with the same chunk decomposition.
SimulationResult simulate_serial(const SequenceSpec& seq, const SimulationRequest& req);

/// Tag identifying the (sequence, x) pair an estimate refers to.
std::uint64_t problem_key(const SequenceSpec& seq, double x);

nlohmann::json to_json(const TailEstimate& e);

}  // namespace mdlab
