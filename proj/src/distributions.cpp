#include "mdlab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "mdlab/errors.hpp"
#include "mdlab/quadrature.hpp"

namespace mdlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive and finite");
}

// Moment of a finite-support law.
double atom_moment(const std::vector<Atom>& atoms, const MomentQuery& q) {
  double s = 0.0;
  for (const auto& [v, p] : atoms) {
    const double av = std::abs(v);
    const bool inside = av <= q.cut;
    if ((q.side == Side::below) == inside) s += p * std::pow(av, q.order);
  }
  return s;
}

// E|X|^p for the unit-scale Student t; requires p < nu.
double student_abs_moment(double p, double nu) {
  return std::exp(0.5 * p * std::log(nu) + std::lgamma(0.5 * (p + 1.0)) + std::lgamma(0.5 * (nu - p)) -
                  0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * nu));
}

double student_density(double y, double nu) {
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(y * y / nu));
}

double log_cosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double log_sinhc(double t) {
  const double a = std::abs(t);
  if (a < 1e-4) return a * a / 6.0 - a * a * a * a / 180.0;
  return a + std::log1p(-std::exp(-2.0 * a)) - std::numbers::ln2 - std::log(a);
}

// Mean of the uniform law on [-1, 1] tilted by t (Langevin function).
double langevin(double t) {
  if (std::abs(t) < 1e-4) return t / 3.0 - t * t * t / 45.0;
  return 1.0 / std::tanh(t) - 1.0 / t;
}

}  // namespace

DistributionSpec::DistributionSpec(Family family) : family_(std::move(family)) {
  std::visit(overloaded{
                 [](const Rademacher& d) { require_positive(d.scale, "rademacher scale"); },
                 [](const TwoPoint& d) {
                   require_positive(d.a, "two_point a");
                   require_positive(d.b, "two_point b");
                 },
                 [](const Uniform& d) { require_positive(d.half_width, "uniform half_width"); },
                 [](const CenteredExponential& d) { require_positive(d.rate, "centered_exponential rate"); },
                 [](const StudentT& d) {
                   if (!(d.nu > 3.0) || !std::isfinite(d.nu)) throw ConfigError("student_t nu must exceed 3");
                 },
             },
             family_);
}

std::string DistributionSpec::name() const {
  return std::visit(overloaded{
                        [](const Rademacher&) { return std::string("rademacher"); },
                        [](const TwoPoint&) { return std::string("two_point"); },
                        [](const Uniform&) { return std::string("uniform"); },
                        [](const CenteredExponential&) { return std::string("centered_exponential"); },
                        [](const StudentT&) { return std::string("student_t"); },
                    },
                    family_);
}

double DistributionSpec::sample(PathStream& rng) const {
  return std::visit(overloaded{
                        [&](const Rademacher& d) { return (rng.next_u64() >> 63) ? d.scale : -d.scale; },
                        [&](const TwoPoint& d) { return rng.uniform() < d.b / (d.a + d.b) ? d.a : -d.b; },
                        [&](const Uniform& d) { return (2.0 * rng.uniform() - 1.0) * d.half_width; },
                        [&](const CenteredExponential& d) { return -std::log(rng.uniform_pos()) / d.rate - 1.0 / d.rate; },
                        [&](const StudentT& d) {
                          // Bailey's polar method.
                          double u = 0.0, w = 0.0;
                          do {
                            u = 2.0 * rng.uniform() - 1.0;
                            const double v = 2.0 * rng.uniform() - 1.0;
                            w = u * u + v * v;
                          } while (w > 1.0 || w == 0.0);
                          return u * std::sqrt(d.nu * (std::pow(w, -2.0 / d.nu) - 1.0) / w);
                        },
                    },
                    family_);
}

double DistributionSpec::moment(const MomentQuery& q) const {
  if (!(q.order >= 1.0)) throw ConfigError("moment order must be >= 1");
  if (!(q.cut >= 0.0)) throw ConfigError("moment truncation must be >= 0");
  const double p = q.order;
  const double c = q.cut;
  const bool below = q.side == Side::below;
  return std::visit(
      overloaded{
          [&](const Rademacher&) { return atom_moment(atoms(), q); },
          [&](const TwoPoint&) { return atom_moment(atoms(), q); },
          [&](const Uniform& d) {
            const double a = d.half_width;
            const double inner = std::pow(std::min(c, a), p + 1.0) / ((p + 1.0) * a);
            const double full = std::pow(a, p) / (p + 1.0);
            return below ? inner : std::max(0.0, full - inner);
          },
          [&](const CenteredExponential& d) {
            // In units u = rate*|x|: negative side has density e^{u-1} on
            // [0, 1], positive side e^{-u-1} on [0, inf).
            const double lc = d.rate * c;
            const double split = std::min(lc, 1.0);
            auto neg = [p](double u) { return std::pow(u, p) * std::exp(u - 1.0); };
            auto pos = [p](double u) { return std::pow(u, p) * std::exp(-u - 1.0); };
            double s = 0.0;
            if (below) {
              s = quad::integrate(neg, 0.0, split) + quad::integrate_dyadic(pos, 0.0, lc);
            } else {
              s = quad::integrate(neg, split, 1.0) + quad::integrate_dyadic(pos, lc, std::numeric_limits<double>::infinity());
            }
            return s * std::pow(d.rate, -p);
          },
          [&](const StudentT& d) {
            if (p >= d.nu) throw NumericError("infinite moment: student_t order " + std::to_string(p) + " >= nu");
            const double full = student_abs_moment(p, d.nu);
            if (std::isinf(c)) return below ? full : 0.0;
            const double nu = d.nu;
            const double inner =
                2.0 * quad::integrate_dyadic([p, nu](double y) { return std::pow(y, p) * student_density(y, nu); }, 0.0, c);
            return below ? std::min(inner, full) : std::max(0.0, full - inner);
          },
      },
      family_);
}

double DistributionSpec::abs_tail_prob(double t) const {
  if (t <= 0.0) return 1.0;
  return std::visit(overloaded{
                        [&](const Rademacher& d) { return d.scale >= t ? 1.0 : 0.0; },
                        [&](const TwoPoint&) {
                          double s = 0.0;
                          for (const auto& [v, pr] : atoms())
                            if (std::abs(v) >= t) s += pr;
                          return s;
                        },
                        [&](const Uniform& d) { return t >= d.half_width ? 0.0 : 1.0 - t / d.half_width; },
                        [&](const CenteredExponential& d) {
                          const double lt = d.rate * t;
                          const double upper = std::exp(-1.0 - lt);
                          const double lower = lt < 1.0 ? -std::expm1(lt - 1.0) : 0.0;
                          return upper + lower;
                        },
                        [&](const StudentT& d) {
                          return 2.0 * boost::math::cdf(boost::math::complement(boost::math::students_t(d.nu), t));
                        },
                    },
                    family_);
}

bool DistributionSpec::bounded_support() const noexcept {
  return std::holds_alternative<Rademacher>(family_) || std::holds_alternative<TwoPoint>(family_) ||
         std::holds_alternative<Uniform>(family_);
}

bool DistributionSpec::finite_support() const noexcept {
  return std::holds_alternative<Rademacher>(family_) || std::holds_alternative<TwoPoint>(family_);
}

std::vector<Atom> DistributionSpec::atoms() const {
  if (const auto* r = std::get_if<Rademacher>(&family_)) return {{-r->scale, 0.5}, {r->scale, 0.5}};
  if (const auto* t = std::get_if<TwoPoint>(&family_))
    return {{-t->b, t->a / (t->a + t->b)}, {t->a, t->b / (t->a + t->b)}};
  throw ConfigError(name() + " has no finite support");
}

double DistributionSpec::support_max() const noexcept {
  return std::visit(overloaded{
                        [](const Rademacher& d) { return d.scale; },
                        [](const TwoPoint& d) { return d.a; },
                        [](const Uniform& d) { return d.half_width; },
                        [](const CenteredExponential&) { return std::numeric_limits<double>::infinity(); },
                        [](const StudentT&) { return std::numeric_limits<double>::infinity(); },
                    },
                    family_);
}

TiltedLaw DistributionSpec::tilt(double theta) const { return TiltedLaw(*this, theta); }

TiltedLaw::TiltedLaw(DistributionSpec base, double theta) : base_(std::move(base)), theta_(theta) {
  if (!std::isfinite(theta)) throw ConfigError("tilt parameter must be finite");
  if (!base_.bounded_support())
    throw NumericError("tilting unsupported for " + base_.name() + " (unbounded support); use the naive method");
  if (const auto* r = std::get_if<Rademacher>(&base_.family())) {
    const double t = theta * r->scale;
    low_ = -r->scale;
    high_ = r->scale;
    p_high_ = 1.0 / (1.0 + std::exp(-2.0 * t));
    log_mgf_ = log_cosh(t);
    mean_ = r->scale * std::tanh(t);
  } else if (const auto* tp = std::get_if<TwoPoint>(&base_.family())) {
    low_ = -tp->b;
    high_ = tp->a;
    const double la = std::log(tp->b / (tp->a + tp->b)) + theta * tp->a;
    const double lb = std::log(tp->a / (tp->a + tp->b)) - theta * tp->b;
    const double hi = std::max(la, lb);
    log_mgf_ = hi + std::log(std::exp(la - hi) + std::exp(lb - hi));
    p_high_ = std::exp(la - log_mgf_);
    mean_ = tp->a * p_high_ - tp->b * std::exp(lb - log_mgf_);
  } else {
    const double a = std::get<Uniform>(base_.family()).half_width;
    low_ = -a;
    high_ = a;
    log_mgf_ = log_sinhc(theta * a);
    mean_ = a * langevin(theta * a);
  }
}

double TiltedLaw::sample(PathStream& rng) const {
  if (std::holds_alternative<Uniform>(base_.family())) {
    const double a = high_;
    const double t = std::abs(theta_) * a;
    if (t < 1e-12) return (2.0 * rng.uniform() - 1.0) * a;
    // Inverse CDF of the density ~ e^{t y} on [-1, 1], in a form that does
    // not overflow for large t.
    const double u = rng.uniform_pos();
    const double y = 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * t)) / t;
    return (theta_ >= 0.0 ? y : -y) * a;
  }
  return rng.uniform() < p_high_ ? high_ : low_;
}

std::pair<TiltedLaw, double> tilt(const DistributionSpec& dist, double theta) {
  TiltedLaw law = dist.tilt(theta);
  const double lm = law.log_mgf();
  return {std::move(law), lm};
}

DistributionSpec distribution_from_json(const nlohmann::json& j) {
  // A bare family name stands for that family with default parameters.
  if (j.is_string()) return distribution_from_json(nlohmann::json{{"family", j.get<std::string>()}});
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
    throw ConfigError("distribution literal needs a string \"family\" key");
  const std::string fam = j["family"];
  auto number = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("distribution key \"") + key + "\" must be a number");
    return j[key].get<double>();
  };
  auto only_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : j.items()) {
      if (k == "family") continue;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
        throw ConfigError("unknown key \"" + k + "\" for family " + fam);
    }
  };
  if (fam == "rademacher") {
    only_keys({"scale"});
    return DistributionSpec(Rademacher{number("scale", 1.0)});
  }
  if (fam == "two_point") {
    only_keys({"a", "b"});
    return DistributionSpec(TwoPoint{number("a", 1.0), number("b", 1.0)});
  }
  if (fam == "uniform") {
    only_keys({"half_width"});
    return DistributionSpec(Uniform{number("half_width", 1.0)});
  }
  if (fam == "centered_exponential") {
    only_keys({"rate"});
    return DistributionSpec(CenteredExponential{number("rate", 1.0)});
  }
  if (fam == "student_t") {
    only_keys({"nu"});
    return DistributionSpec(StudentT{number("nu", 5.0)});
  }
  throw ConfigError("unknown distribution family \"" + fam + "\"");
}

nlohmann::json to_json(const DistributionSpec& d) {
  nlohmann::json j;
  j["family"] = d.name();
  std::visit(overloaded{
                 [&](const Rademacher& f) { j["scale"] = f.scale; },
                 [&](const TwoPoint& f) {
                   j["a"] = f.a;
                   j["b"] = f.b;
                 },
                 [&](const Uniform& f) { j["half_width"] = f.half_width; },
                 [&](const CenteredExponential& f) { j["rate"] = f.rate; },
                 [&](const StudentT& f) { j["nu"] = f.nu; },
             },
             d.family());
  return j;
}

}  // namespace mdlab
