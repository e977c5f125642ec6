#include "mdlab/mc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mdlab/errors.hpp"
#include "mdlab/oracle.hpp"

namespace mdlab {

std::string to_string(Method m) { return m == Method::naive ? "naive" : "tilted"; }
std::string to_string(Event e) { return e == Event::max ? "max" : "sum"; }

Method method_from_string(const std::string& s) {
  if (s == "naive") return Method::naive;
  if (s == "tilted") return Method::tilted;
  throw ConfigError("unknown method \"" + s + "\" (expected naive or tilted)");
}

double TailEstimate::p_hat() const {
  if (n_samples_ == 0) return 0.0;
  const double n = static_cast<double>(n_samples_);
  if (method_ == Method::naive) return static_cast<double>(hits_) / n;
  return std::clamp(sum_w_.value() / n, 0.0, 1.0);
}

double TailEstimate::std_error() const {
  if (n_samples_ == 0) return 0.0;
  const double n = static_cast<double>(n_samples_);
  if (method_ == Method::naive) {
    const double p = p_hat();
    return std::sqrt(p * (1.0 - p) / n);
  }
  if (n_samples_ < 2) return 0.0;
  const double s1 = sum_w_.value();
  const double s2 = sum_w2_.value();
  const double var = std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0));
  return std::sqrt(var / n);
}

TailEstimate merge(const TailEstimate& a, const TailEstimate& b) {
  if (a.method_ != b.method_ || a.event_ != b.event_)
    throw ConfigError("merge: estimates differ in method or event");
  if (a.n_samples_ == 0) return b;
  if (b.n_samples_ == 0) return a;
  if (a.problem_key_ != b.problem_key_) throw ConfigError("merge: estimates refer to different problems");
  TailEstimate out = a;
  out.mixed_seed_ = a.mixed_seed_ || b.mixed_seed_ || a.seed_ != b.seed_;
  out.seed_ = out.mixed_seed_ ? 0 : a.seed_;
  out.n_samples_ += b.n_samples_;
  out.hits_ += b.hits_;
  out.sum_w_.merge(b.sum_w_);
  out.sum_w2_.merge(b.sum_w2_);
  return out;
}

bool operator==(const TailEstimate& a, const TailEstimate& b) {
  return a.method_ == b.method_ && a.event_ == b.event_ && a.seed_ == b.seed_ && a.mixed_seed_ == b.mixed_seed_ &&
         a.problem_key_ == b.problem_key_ && a.n_samples_ == b.n_samples_ && a.hits_ == b.hits_ &&
         a.sum_w_ == b.sum_w_ && a.sum_w2_ == b.sum_w2_;
}

std::uint64_t problem_key(const SequenceSpec& seq, double x) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &x, sizeof bits);
  return mix64(seq.fingerprint() ^ mix64(bits));
}

TiltPlan choose_tilt(const SequenceSpec& seq, double x) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("x must be finite and >= 0");
  const auto& dist = seq.dist();
  if (!dist.bounded_support())
    throw NumericError("tilting unsupported for " + dist.name() + " (unbounded support); use the naive method");
  const std::uint64_t n = seq.n();
  const double nd = static_cast<double>(n);

  long double bn2 = 0.0L, hull = 0.0L;
  for (std::uint64_t j = 1; j <= (seq.iid() ? 1 : n); ++j) {
    const double s = seq.scale(j);
    bn2 += s * s * dist.variance();
    hull += s * dist.support_max();
  }
  if (seq.iid()) {
    bn2 *= nd;
    hull *= nd;
  }
  const double target_total = x * std::sqrt(static_cast<double>(bn2));
  if (!(target_total < static_cast<double>(hull)))
    throw NumericError("target drift x B_n / n lies outside the open support hull; reduce x");

  // Mean of S_n under a common tilt theta applied to every X_j.
  auto drift = [&](double theta) {
    if (seq.iid()) return nd * dist.tilt(theta).mean();
    long double acc = 0.0L;
    for (std::uint64_t j = 1; j <= n; ++j) acc += seq.scale(j) * dist.tilt(theta * seq.scale(j)).mean();
    return static_cast<double>(acc);
  };

  double lo = 0.0, hi = 0.0;
  if (target_total > 0.0) {
    hi = 1.0 / dist.support_max();
    while (drift(hi) < target_total) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) throw NumericError("choose_tilt: failed to bracket the tilt");
    }
    for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (drift(mid) < target_total)
        lo = mid;
      else
        hi = mid;
    }
  }
  const double theta = target_total > 0.0 ? 0.5 * (lo + hi) : 0.0;

  TiltPlan plan;
  plan.theta = theta;
  plan.target_drift = target_total / nd;
  if (seq.iid()) {
    plan.laws.push_back(dist.tilt(theta));
    plan.step_log_mgf = plan.laws.front().log_mgf();
    plan.total_log_mgf = nd * plan.step_log_mgf;
    plan.achieved_drift = plan.laws.front().mean();
  } else {
    long double lm = 0.0L;
    plan.laws.reserve(n);
    for (std::uint64_t j = 1; j <= n; ++j) {
      plan.laws.push_back(dist.tilt(theta * seq.scale(j)));
      lm += plan.laws.back().log_mgf();
    }
    plan.total_log_mgf = static_cast<double>(lm);
    plan.step_log_mgf = plan.total_log_mgf / nd;
    plan.achieved_drift = drift(theta) / nd;
  }
  return plan;
}

namespace {

struct ChunkTally {
  TailEstimate max;
  TailEstimate sum;
};

class PathKernel {
 public:
  PathKernel(const SequenceSpec& seq, const SimulationRequest& req) : seq_(seq), req_(req) {
    if (req.method == Method::tilted) plan_ = choose_tilt(seq, req.x);
    key_ = problem_key(seq, req.x);
  }

  std::uint64_t chunk_count() const {
    return (req_.n_samples + kChunkPaths - 1) / kChunkPaths;
  }

  ChunkTally run_chunk(std::uint64_t local_chunk) const {
    const std::uint64_t begin = local_chunk * kChunkPaths;
    const auto paths = static_cast<std::uint32_t>(std::min<std::uint64_t>(kChunkPaths, req_.n_samples - begin));
    const std::uint64_t stream_chunk = req_.first_chunk + local_chunk;
    ChunkTally t{TailEstimate(req_.method, Event::max, req_.seed, key_),
                 TailEstimate(req_.method, Event::sum, req_.seed, key_)};
    const std::uint64_t n = seq_.n();
    const double x = req_.x;
    const bool tilted = req_.method == Method::tilted;
    const bool iid = seq_.iid();
    const auto& dist = seq_.dist();
    for (std::uint32_t p = 0; p < paths; ++p) {
      PathStream rng(req_.seed, stream_chunk, p);
      double s = 0.0;
      double max_s = -std::numeric_limits<double>::infinity();
      double v2 = 0.0;
      for (std::uint64_t j = 1; j <= n; ++j) {
        double step = 0.0;
        if (tilted)
          step = iid ? plan_->laws.front().sample(rng) : plan_->laws[j - 1].sample(rng) * seq_.scale(j);
        else
          step = iid ? dist.sample(rng) : dist.sample(rng) * seq_.scale(j);
        s += step;
        max_s = std::max(max_s, s);
        v2 += step * step;
      }
      const double w = tilted ? std::exp(-plan_->theta * s + plan_->total_log_mgf) : 1.0;
      t.max.record(crosses(max_s, v2, x), w);
      t.sum.record(crosses(s, v2, x), w);
    }
    return t;
  }

  SimulationResult fold(const std::vector<ChunkTally>& chunks) const {
    SimulationResult r{TailEstimate::empty(req_.method, Event::max, key_),
                       TailEstimate::empty(req_.method, Event::sum, key_)};
    for (const auto& c : chunks) {
      r.max = merge(r.max, c.max);
      r.sum = merge(r.sum, c.sum);
    }
    return r;
  }

 private:
  const SequenceSpec& seq_;
  SimulationRequest req_;
  std::optional<TiltPlan> plan_;
  std::uint64_t key_ = 0;
};

void validate(const SimulationRequest& req) {
  if (req.n_samples < 1000) throw ConfigError("samples must be >= 1000");
  if (!(req.x >= 0.0) || !std::isfinite(req.x)) throw ConfigError("x must be finite and >= 0");
}

}  // namespace

SimulationResult simulate_serial(const SequenceSpec& seq, const SimulationRequest& req) {
  validate(req);
  const PathKernel kernel(seq, req);
  std::vector<ChunkTally> chunks;
  for (std::uint64_t c = 0; c < kernel.chunk_count(); ++c) chunks.push_back(kernel.run_chunk(c));
  return kernel.fold(chunks);
}

SimulationResult simulate(const SequenceSpec& seq, const SimulationRequest& req) {
  validate(req);
  const PathKernel kernel(seq, req);
  const auto count = static_cast<std::int64_t>(kernel.chunk_count());
  std::vector<std::optional<ChunkTally>> slots(static_cast<std::size_t>(count));
#ifdef _OPENMP
  const int threads = req.workers > 0 ? req.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
  for (std::int64_t c = 0; c < count; ++c) slots[static_cast<std::size_t>(c)] = kernel.run_chunk(static_cast<std::uint64_t>(c));

  std::vector<ChunkTally> chunks;
  chunks.reserve(slots.size());
  for (auto& s : slots) chunks.push_back(std::move(*s));
  return kernel.fold(chunks);
}

nlohmann::json to_json(const TailEstimate& e) {
  nlohmann::json j = {{"p_hat", e.p_hat()},         {"stderr", e.std_error()}, {"n_samples", e.n_samples()},
                      {"method", to_string(e.method())}, {"event", to_string(e.event())}, {"hits", e.hits()}};
  if (e.mixed_seed())
    j["seed"] = nullptr;
  else
    j["seed"] = e.seed();
  return j;
}

}  // namespace mdlab
