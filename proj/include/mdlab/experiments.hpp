#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdlab/distributions.hpp"
#include "mdlab/mc_engine.hpp"
#include "mdlab/theory.hpp"

namespace mdlab {

inline constexpr const char* kToolVersion = "0.1.0";

enum class XRule { explicit_list, scaled };
enum class Engine { oracle, mc };

/// Sweep over an (n, x) grid. With XRule::scaled, each entry c of
/// `x_values` produces x = c * n^{r/(4+2r)}.
struct SweepConfig {
  DistributionSpec dist{Rademacher{1.0}};
  std::vector<std::uint64_t> n_grid;
  XRule x_rule = XRule::explicit_list;
  std::vector<double> x_values;
  double r = 1.0;
  double delta = 1.0;
  double tau = 1.0;
  double a0_constant = 1.0;
  Engine engine = Engine::oracle;
  Method method = Method::naive;
  std::uint64_t samples = 100000;
  bool mc_fallback = false;
  std::uint64_t seed = 20240601;
  std::string output = "sweep.csv";
  int workers = 0;
};

SweepConfig sweep_config_from_json(const nlohmann::json& j);
/// Canonical form; `workers` and `output` are omitted because they do not
/// affect the rows.
nlohmann::json to_json(const SweepConfig& cfg);
std::string config_hash(const SweepConfig& cfg);

struct RatioRow {
  std::size_t index = 0;
  std::uint64_t n = 0;
  double x = 0.0;
  double group = 0.0;  // x for explicit rules, c for scaled rules
  double p_max = 0.0;
  double p_sum = 0.0;
  double tail = 0.0;
  double ratio_max = 0.0;
  double ratio_sum = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double probe = 0.0;
  std::optional<TheoryQuantities> theory;  // absent at x = 0
  std::string method;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Planned grid point before evaluation.
struct GridPoint {
  std::size_t index;
  std::uint64_t n;
  double x;
  double group;
};

std::vector<GridPoint> plan_grid(const SweepConfig& cfg);

/// Evaluates one grid point. MC rows use the seed mix64(cfg.seed ^ mix64(index)).
RatioRow compute_row(const SweepConfig& cfg, const GridPoint& pt);

const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_line(const RatioRow& row);

struct SweepOptions {
  /// Stop after this many rows exist in the output (simulates an interrupted run).
  std::optional<std::size_t> stop_after;
};

struct SweepOutcome {
  std::vector<RatioRow> rows;
  nlohmann::json manifest;
  std::size_t resumed_rows = 0;
};

/// Runs (or resumes) the sweep, appending rows to cfg.output in grid order and
/// writing cfg.output + ".manifest.json".
SweepOutcome run_sweep(const SweepConfig& cfg, const SweepOptions& opts = {});

std::string manifest_path(const std::string& csv_path);

struct TrajectoryPoint {
  std::uint64_t n;
  double x;
  double dev_max;  // |ratio_max - 2|
  double dev_sum;  // |ratio_sum - 1|
  double half_width;
};

struct GroupSummary {
  double group = 0.0;
  std::vector<TrajectoryPoint> points;
  std::string trend_max;  // "decreasing", "flat" or "not_decreasing"
  std::string trend_sum;
  double final_dev_max = 0.0;
  double final_dev_sum = 0.0;
  std::optional<double> fitted_c;  // least-squares constant on the envelope
};

struct ConvergenceReport {
  std::vector<GroupSummary> groups;
  double worst_final_dev_max = 0.0;
  double worst_final_dev_sum = 0.0;
};

/// Requires at least one group with >= 3 rows. `delta` feeds the envelope fit.
ConvergenceReport convergence_report(const std::vector<RatioRow>& rows, double delta);

nlohmann::json to_json(const RatioRow& row);
nlohmann::json to_json(const ConvergenceReport& rep);

/// 95% Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t n, double z = 1.959963984540054);

}  // namespace mdlab
