#pragma once

#include <limits>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mdlab/rng.hpp"

namespace mdlab {

/// Symmetric two-point law on {-scale, +scale}.
struct Rademacher {
  double scale = 1.0;
  bool operator==(const Rademacher&) const = default;
};

/// Law on {a, -b}; P(a) = b/(a+b) so that the mean is zero.
struct TwoPoint {
  double a = 1.0;
  double b = 1.0;
  bool operator==(const TwoPoint&) const = default;
};

/// Uniform on [-half_width, half_width].
struct Uniform {
  double half_width = 1.0;
  bool operator==(const Uniform&) const = default;
};

/// Exp(rate) shifted by -1/rate; support [-1/rate, inf).
struct CenteredExponential {
  double rate = 1.0;
  bool operator==(const CenteredExponential&) const = default;
};

/// Student t with nu degrees of freedom and unit scale (variance nu/(nu-2)).
struct StudentT {
  double nu = 5.0;
  bool operator==(const StudentT&) const = default;
};

using Family = std::variant<Rademacher, TwoPoint, Uniform, CenteredExponential, StudentT>;

enum class Side { below, above };

/// E|X|^order 1{|X| <= cut} (below) or E|X|^order 1{|X| > cut} (above).
struct MomentQuery {
  double order = 2.0;
  double cut = std::numeric_limits<double>::infinity();
  Side side = Side::below;
};

/// A point of a finite support together with its probability.
struct Atom {
  double value;
  double prob;
};

class TiltedLaw;

/// Centered increment law. Immutable once constructed; parameters are
/// validated by the constructor.
class DistributionSpec {
 public:
  explicit DistributionSpec(Family family);
  template <class F>
    requires std::is_constructible_v<Family, F> && (!std::is_same_v<std::decay_t<F>, Family>)
  DistributionSpec(F f) : DistributionSpec(Family(std::move(f))) {}

  const Family& family() const noexcept { return family_; }
  std::string name() const;

  /// One draw; consumes a family-dependent number of stream values.
  double sample(PathStream& rng) const;

  /// Raw or truncated absolute moment. Closed forms for Rademacher, TwoPoint
  /// and Uniform; adaptive quadrature for the unbounded families.
  double moment(const MomentQuery& q) const;

  double abs_moment(double order) const { return moment({order, std::numeric_limits<double>::infinity(), Side::below}); }
  double variance() const { return abs_moment(2.0); }
  double mean() const;

  /// P(|X| >= t).
  double abs_tail_prob(double t) const;

  bool bounded_support() const noexcept;
  bool finite_support() const noexcept;
  /// Atoms of a finite-support law; throws for continuous families.
  std::vector<Atom> atoms() const;
  /// Largest support point (+inf when unbounded above).
  double support_max() const noexcept;

  /// Exponential tilt dP_theta ~ e^{theta x} dP. Bounded families only.
  TiltedLaw tilt(double theta) const;

  friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;

 private:
  Family family_;
};

/// Exponentially tilted version of a bounded-support law.
class TiltedLaw {
 public:
  TiltedLaw(DistributionSpec base, double theta);

  double theta() const noexcept { return theta_; }
  /// log E e^{theta X} under the base law.
  double log_mgf() const noexcept { return log_mgf_; }
  /// Mean of the tilted law, i.e. d/dtheta log_mgf.
  double mean() const noexcept { return mean_; }
  const DistributionSpec& base() const noexcept { return base_; }

  double sample(PathStream& rng) const;

 private:
  DistributionSpec base_;
  double theta_;
  double log_mgf_ = 0.0;
  double mean_ = 0.0;
  double p_high_ = 0.5;  // two-point families: probability of the upper atom
  double low_ = 0.0, high_ = 0.0;
};

/// Tilt of the base law: returns (tilted law, log E e^{theta X}).
std::pair<TiltedLaw, double> tilt(const DistributionSpec& dist, double theta);

/// Config literal, e.g. {"family":"rademacher","scale":1.0}, or a bare family
/// name such as "uniform" for default parameters.
DistributionSpec distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistributionSpec& d);

}  // namespace mdlab
