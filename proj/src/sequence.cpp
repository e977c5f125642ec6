#include "mdlab/sequence.hpp"

#include <cmath>
#include <cstring>
#include <variant>

#include "mdlab/errors.hpp"

namespace mdlab {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

SequenceSpec::SequenceSpec(DistributionSpec dist, std::uint64_t n) : dist_(std::move(dist)), n_(n) {
  if (n_ == 0) throw ConfigError("sequence length n must be >= 1");
}

SequenceSpec::SequenceSpec(DistributionSpec dist, std::vector<double> scales)
    : dist_(std::move(dist)), n_(scales.size()), scales_(std::move(scales)) {
  if (n_ == 0) throw ConfigError("scale schedule must be non-empty");
  for (double s : scales_)
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("every schedule scale must be positive and finite");
}

SequenceSpec SequenceSpec::rescaled(double c) const {
  if (!(c > 0.0)) throw ConfigError("rescale factor must be positive");
  std::vector<double> s(n_);
  for (std::uint64_t j = 1; j <= n_; ++j) s[j - 1] = c * scale(j);
  return SequenceSpec(dist_, std::move(s));
}

std::uint64_t SequenceSpec::fingerprint() const {
  const std::string lit = to_json(dist_).dump();
  std::uint64_t h = fnv1a(0xcbf29ce484222325ull, lit.data(), lit.size());
  h = fnv1a(h, &n_, sizeof n_);
  for (double s : scales_) h = fnv1a(h, &s, sizeof s);
  return h;
}

nlohmann::json to_json(const SequenceSpec& seq) {
  nlohmann::json j;
  j["dist"] = to_json(seq.dist());
  j["n"] = seq.n();
  if (!seq.iid()) j["scales"] = seq.scales();
  return j;
}

}  // namespace mdlab
