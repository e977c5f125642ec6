#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "mdlab/distributions.hpp"

namespace mdlab {

/// Schedule of n independent increments X_j = scale_j * Y_j with Y_j ~ dist.
/// An empty scale list means the iid schedule (all scales 1).
class SequenceSpec {
 public:
  SequenceSpec(DistributionSpec dist, std::uint64_t n);
  SequenceSpec(DistributionSpec dist, std::vector<double> scales);

  const DistributionSpec& dist() const noexcept { return dist_; }
  std::uint64_t n() const noexcept { return n_; }
  bool iid() const noexcept { return scales_.empty(); }
  const std::vector<double>& scales() const noexcept { return scales_; }
  /// Scale of the 1-based index j.
  double scale(std::uint64_t j) const noexcept { return scales_.empty() ? 1.0 : scales_[j - 1]; }

  /// Same schedule with every increment multiplied by c > 0.
  SequenceSpec rescaled(double c) const;

  /// Stable 64-bit fingerprint of the schedule, used to tag estimates.
  std::uint64_t fingerprint() const;

 private:
  DistributionSpec dist_;
  std::uint64_t n_;
  std::vector<double> scales_;
};

nlohmann::json to_json(const SequenceSpec& seq);

}  // namespace mdlab
