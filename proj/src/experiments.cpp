#include "mdlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mdlab/errors.hpp"
#include "mdlab/normal_tail.hpp"
#include "mdlab/oracle.hpp"

namespace mdlab {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("malformed number in existing CSV: \"" + s + "\"");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw ConfigError("malformed integer in existing CSV: \"" + s + "\"");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key \"") + key + "\" has the wrong type");
  }
}

double x_exponent(double r) { return r / (4.0 + 2.0 * r); }

// Unit-free probe (ratio_max - 2) (E X^2)^{3/2} / ((1 + x^3) E|X|^3).
double conjecture_probe(const DistributionSpec& d, double ratio_max, double x) {
  const double v = d.variance();
  return (ratio_max - 2.0) * std::pow(v, 1.5) / ((1.0 + x * x * x) * d.abs_moment(3.0));
}

bool oracle_fits(const SweepConfig& cfg, std::uint64_t n) {
  if (std::holds_alternative<Rademacher>(cfg.dist.family())) return n <= kLatticeMaxN;
  if (cfg.dist.finite_support()) return n <= 24;
  return false;
}

}  // namespace

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("sweep config must be a JSON object");
  static const std::vector<std::string> known = {"dist",   "n_grid", "x_rule",      "x",    "c",
                                                 "r",      "delta",  "tau",         "a0_constant",
                                                 "engine", "method", "samples",     "mc_fallback",
                                                 "seed",   "output", "workers"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config key \"" + k + "\"");

  SweepConfig cfg;
  if (!j.contains("dist")) throw ConfigError("config needs \"dist\"");
  cfg.dist = distribution_from_json(j["dist"]);
  cfg.n_grid = get_or<std::vector<std::uint64_t>>(j, "n_grid", {});
  if (cfg.n_grid.empty()) throw ConfigError("config needs a non-empty \"n_grid\"");
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] == 0) throw ConfigError("n_grid entries must be >= 1");
    if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
  }
  const std::string rule = get_or<std::string>(j, "x_rule", "explicit");
  if (rule == "explicit") {
    cfg.x_rule = XRule::explicit_list;
    cfg.x_values = get_or<std::vector<double>>(j, "x", {});
    if (cfg.x_values.empty()) throw ConfigError("explicit x_rule needs a non-empty \"x\" list");
    for (double x : cfg.x_values)
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("x values must be finite and >= 0");
  } else if (rule == "scaled") {
    cfg.x_rule = XRule::scaled;
    cfg.x_values = get_or<std::vector<double>>(j, "c", {});
    if (cfg.x_values.empty()) throw ConfigError("scaled x_rule needs a non-empty \"c\" list");
    for (double c : cfg.x_values)
      if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("c values must be positive");
  } else {
    throw ConfigError("x_rule must be \"explicit\" or \"scaled\"");
  }
  cfg.r = get_or(j, "r", 1.0);
  cfg.delta = get_or(j, "delta", 1.0);
  cfg.tau = get_or(j, "tau", 1.0);
  cfg.a0_constant = get_or(j, "a0_constant", 1.0);
  if (!(cfg.r > 0.0 && cfg.r <= 1.0)) throw ConfigError("r must lie in (0, 1]");
  if (!(cfg.delta > 0.0) || !(cfg.tau > 0.0) || !(cfg.a0_constant > 0.0))
    throw ConfigError("delta, tau and a0_constant must be positive");
  const std::string engine = get_or<std::string>(j, "engine", "oracle");
  if (engine == "oracle")
    cfg.engine = Engine::oracle;
  else if (engine == "mc")
    cfg.engine = Engine::mc;
  else
    throw ConfigError("engine must be \"oracle\" or \"mc\"");
  cfg.method = method_from_string(get_or<std::string>(j, "method", "naive"));
  cfg.samples = get_or<std::uint64_t>(j, "samples", cfg.samples);
  cfg.mc_fallback = get_or(j, "mc_fallback", false);
  if ((cfg.engine == Engine::mc || cfg.mc_fallback) && cfg.samples < 1000) throw ConfigError("samples must be >= 1000");
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.output = get_or<std::string>(j, "output", cfg.output);
  cfg.workers = get_or(j, "workers", 0);
  return cfg;
}

nlohmann::json to_json(const SweepConfig& cfg) {
  nlohmann::json j;
  j["dist"] = to_json(cfg.dist);
  j["n_grid"] = cfg.n_grid;
  j["x_rule"] = cfg.x_rule == XRule::explicit_list ? "explicit" : "scaled";
  j[cfg.x_rule == XRule::explicit_list ? "x" : "c"] = cfg.x_values;
  j["r"] = cfg.r;
  j["delta"] = cfg.delta;
  j["tau"] = cfg.tau;
  j["a0_constant"] = cfg.a0_constant;
  j["engine"] = cfg.engine == Engine::oracle ? "oracle" : "mc";
  j["method"] = to_string(cfg.method);
  j["samples"] = cfg.samples;
  j["mc_fallback"] = cfg.mc_fallback;
  j["seed"] = cfg.seed;
  return j;
}

std::string config_hash(const SweepConfig& cfg) {
  const std::string canon = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return hex64(h);
}

std::vector<GridPoint> plan_grid(const SweepConfig& cfg) {
  std::vector<GridPoint> pts;
  for (std::uint64_t n : cfg.n_grid) {
    for (double v : cfg.x_values) {
      const double x = cfg.x_rule == XRule::explicit_list ? v : v * std::pow(static_cast<double>(n), x_exponent(cfg.r));
      pts.push_back({pts.size(), n, x, v});
    }
  }
  return pts;
}

std::pair<double, double> wilson_interval(std::uint64_t hits, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (p + z2 / (2.0 * nd)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
  return {std::max(0.0, std::min(center - half, p)), std::min(1.0, std::max(center + half, p))};
}

RatioRow compute_row(const SweepConfig& cfg, const GridPoint& pt) {
  RatioRow row;
  row.index = pt.index;
  row.n = pt.n;
  row.x = pt.x;
  row.group = pt.group;
  row.tail = normal_tail(pt.x);
  const SequenceSpec seq(cfg.dist, pt.n);

  const bool use_oracle = cfg.engine == Engine::oracle && oracle_fits(cfg, pt.n);
  if (cfg.engine == Engine::oracle && !use_oracle && !cfg.mc_fallback)
    throw NumericError("instance n=" + std::to_string(pt.n) + " exceeds the oracle budget and mc_fallback is off");

  if (use_oracle) {
    ExactResult ex = std::holds_alternative<Rademacher>(cfg.dist.family())
                         ? lattice_dp(pt.n, pt.x, std::get<Rademacher>(cfg.dist.family()).scale)
                         : enumerate_exact(seq, pt.x);
    row.p_max = ex.p_max;
    row.p_sum = ex.p_sum;
    row.ratio_max = row.p_max / row.tail;
    row.ratio_sum = row.p_sum / row.tail;
    row.ci_low = row.ci_high = row.ratio_max;
    row.method = to_string(ex.method);
  } else {
    SimulationRequest req;
    req.x = pt.x;
    req.n_samples = cfg.samples;
    req.seed = mix64(cfg.seed ^ mix64(pt.index));
    req.method = cfg.method;
    req.workers = cfg.workers;
    const auto res = simulate(seq, req);
    row.p_max = res.max.p_hat();
    row.p_sum = res.sum.p_hat();
    row.ratio_max = row.p_max / row.tail;
    row.ratio_sum = row.p_sum / row.tail;
    if (cfg.method == Method::naive) {
      const auto [lo, hi] = wilson_interval(res.max.hits(), res.max.n_samples());
      row.ci_low = lo / row.tail;
      row.ci_high = hi / row.tail;
    } else {
      const double se = res.max.std_error();
      row.ci_low = std::max(0.0, row.p_max - kZ95 * se) / row.tail;
      row.ci_high = (row.p_max + kZ95 * se) / row.tail;
    }
    row.method = to_string(cfg.method);
    row.samples = cfg.samples;
    row.seed = req.seed;
  }
  row.probe = conjecture_probe(cfg.dist, row.ratio_max, pt.x);
  if (pt.x > 0.0) row.theory = compute_quantities(seq, pt.x, cfg.r, cfg.delta, cfg.a0_constant);
  return row;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"n",         "x",         "p_max",  "p_sum",    "tail",  "ratio_max",
                                                "ratio_sum", "ci_low",    "ci_high", "probe",   "delta_nx", "dnr",
                                                "n0",        "epsilon",   "method", "samples",  "seed"};
  return cols;
}

std::string csv_header() {
  std::string h;
  for (const auto& c : csv_columns()) {
    if (!h.empty()) h += ',';
    h += c;
  }
  return h;
}

std::string csv_line(const RatioRow& row) {
  const double nan = std::nan("");
  const auto& th = row.theory;
  std::string s;
  s += std::to_string(row.n) + ',' + fmt17(row.x) + ',' + fmt17(row.p_max) + ',' + fmt17(row.p_sum) + ',' +
       fmt17(row.tail) + ',' + fmt17(row.ratio_max) + ',' + fmt17(row.ratio_sum) + ',' + fmt17(row.ci_low) + ',' +
       fmt17(row.ci_high) + ',' + fmt17(row.probe) + ',';
  s += fmt17(th ? th->delta_nx : nan) + ',' + fmt17(th ? th->dnr : nan) + ',' + std::to_string(th ? th->n0 : 0) + ',' +
       fmt17(th ? th->epsilon : nan) + ',';
  s += row.method + ',' + std::to_string(row.samples) + ',' + std::to_string(row.seed);
  return s;
}

std::string manifest_path(const std::string& csv_path) { return csv_path + ".manifest.json"; }

namespace {

RatioRow parse_row(const SweepConfig& cfg, const GridPoint& pt, const std::string& line) {
  const auto cells = split_csv(line);
  if (cells.size() != csv_columns().size()) throw ConfigError("existing CSV row has the wrong column count");
  RatioRow row;
  row.index = pt.index;
  row.n = parse_u64(cells[0]);
  row.x = parse_double(cells[1]);
  if (row.n != pt.n || row.x != pt.x) throw ConfigError("existing CSV does not match the configured grid");
  row.group = pt.group;
  row.p_max = parse_double(cells[2]);
  row.p_sum = parse_double(cells[3]);
  row.tail = parse_double(cells[4]);
  row.ratio_max = parse_double(cells[5]);
  row.ratio_sum = parse_double(cells[6]);
  row.ci_low = parse_double(cells[7]);
  row.ci_high = parse_double(cells[8]);
  row.probe = parse_double(cells[9]);
  row.method = cells[14];
  row.samples = parse_u64(cells[15]);
  row.seed = parse_u64(cells[16]);
  if (pt.x > 0.0) row.theory = compute_quantities(SequenceSpec(cfg.dist, pt.n), pt.x, cfg.r, cfg.delta, cfg.a0_constant);
  return row;
}

nlohmann::json make_manifest(const SweepConfig& cfg, std::size_t total, std::size_t written) {
  return {{"tool", "mdlab"},
          {"tool_version", kToolVersion},
          {"config_hash", config_hash(cfg)},
          {"seed", cfg.seed},
          {"rows_total", total},
          {"rows_written", written},
          {"complete", written == total},
          {"columns", csv_columns()},
          {"config", to_json(cfg)}};
}

void write_manifest(const std::string& path, const nlohmann::json& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write manifest " + path);
  out << m.dump(2) << '\n';
}

// Rows already present from an earlier run with the same config; trims a
// trailing partial line. Returns nothing if the run must start fresh.
std::optional<std::vector<std::string>> existing_rows(const SweepConfig& cfg, std::size_t total) {
  namespace fs = std::filesystem;
  const std::string mpath = manifest_path(cfg.output);
  if (!fs::exists(cfg.output) || !fs::exists(mpath)) return std::nullopt;
  try {
    std::ifstream min(mpath);
    const auto manifest = nlohmann::json::parse(min);
    if (manifest.value("config_hash", "") != config_hash(cfg)) return std::nullopt;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  std::ifstream in(cfg.output, std::ios::binary);
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = csv_header() + '\n';
  if (content.compare(0, header.size(), header) != 0) return std::nullopt;

  std::vector<std::string> lines;
  std::size_t pos = header.size();
  std::size_t keep = pos;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // partial line from an interrupted write
    lines.push_back(content.substr(pos, nl - pos));
    pos = nl + 1;
    keep = pos;
  }
  if (lines.size() > total) return std::nullopt;
  if (keep != content.size()) fs::resize_file(cfg.output, keep);
  return lines;
}

}  // namespace

SweepOutcome run_sweep(const SweepConfig& cfg, const SweepOptions& opts) {
  const auto grid = plan_grid(cfg);
  SweepOutcome outcome;

  std::vector<std::string> prior;
  if (auto lines = existing_rows(cfg, grid.size())) prior = std::move(*lines);
  if (prior.empty()) {
    std::ofstream out(cfg.output, std::ios::trunc | std::ios::binary);
    if (!out) throw ConfigError("cannot write output " + cfg.output);
    out << csv_header() << '\n';
  }
  for (std::size_t i = 0; i < prior.size(); ++i) outcome.rows.push_back(parse_row(cfg, grid[i], prior[i]));
  outcome.resumed_rows = prior.size();
  write_manifest(manifest_path(cfg.output), make_manifest(cfg, grid.size(), prior.size()));

  std::size_t stop = grid.size();
  if (opts.stop_after) stop = std::min(stop, std::max(*opts.stop_after, prior.size()));
  const auto first = static_cast<std::int64_t>(prior.size());
  const auto last = static_cast<std::int64_t>(stop);

  std::ofstream out(cfg.output, std::ios::app | std::ios::binary);
  if (!out) throw ConfigError("cannot append to " + cfg.output);
  std::exception_ptr failure;
  bool failed = false;

  // Rows run concurrently when there are enough of them; otherwise the
  // workers go to the Monte Carlo engine inside each row.
  const int workers = cfg.workers > 0 ? cfg.workers :
#ifdef _OPENMP
                                      omp_get_max_threads();
#else
                                      1;
#endif
  const bool row_parallel = workers > 1 && last - first >= workers;
  SweepConfig row_cfg = cfg;
  if (row_parallel) row_cfg.workers = 1;

#ifdef _OPENMP
#pragma omp parallel for ordered schedule(dynamic, 1) num_threads(row_parallel ? workers : 1)
#endif
  for (std::int64_t i = first; i < last; ++i) {
    std::optional<RatioRow> row;
    std::exception_ptr err;
    try {
      row = compute_row(row_cfg, grid[static_cast<std::size_t>(i)]);
    } catch (...) {
      err = std::current_exception();
    }
#ifdef _OPENMP
#pragma omp ordered
#endif
    {
      if (!failed) {
        if (err) {
          failed = true;
          failure = err;
        } else {
          out << csv_line(*row) << '\n';
          out.flush();
          outcome.rows.push_back(std::move(*row));
        }
      }
    }
  }
  out.close();
  if (failure) std::rethrow_exception(failure);

  outcome.manifest = make_manifest(cfg, grid.size(), outcome.rows.size());
  write_manifest(manifest_path(cfg.output), outcome.manifest);
  return outcome;
}

ConvergenceReport convergence_report(const std::vector<RatioRow>& rows, double delta) {
  std::map<double, std::vector<const RatioRow*>> by_group;
  for (const auto& r : rows) by_group[r.group].push_back(&r);

  auto trend = [](const std::vector<double>& d, const std::vector<double>& h) -> std::string {
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    if (*hi - *lo <= 1e-15 * std::max(1.0, *hi)) return "flat";
    for (std::size_t i = 1; i < d.size(); ++i)
      if (d[i] > d[i - 1] + 2.0 * std::max(h[i], h[i - 1])) return "not_decreasing";
    return "decreasing";
  };

  ConvergenceReport rep;
  for (auto& [group, members] : by_group) {
    if (members.size() < 3) continue;
    std::sort(members.begin(), members.end(), [](const RatioRow* a, const RatioRow* b) { return a->n < b->n; });
    GroupSummary g;
    g.group = group;
    std::vector<double> dm, ds, hw;
    for (const RatioRow* r : members) {
      const double half = 0.5 * (r->ci_high - r->ci_low);
      g.points.push_back({r->n, r->x, std::abs(r->ratio_max - 2.0), std::abs(r->ratio_sum - 1.0), half});
      dm.push_back(g.points.back().dev_max);
      ds.push_back(g.points.back().dev_sum);
      hw.push_back(half);
    }
    g.trend_max = trend(dm, hw);
    g.trend_sum = trend(ds, hw);
    g.final_dev_max = dm.back();
    g.final_dev_sum = ds.back();

    // Least squares through the origin of |ratio - 2| on the envelope.
    if (g.trend_max != "flat") {
      double num = 0.0, den = 0.0;
      std::vector<double> envs;
      for (const RatioRow* r : members) {
        if (r->x < 2.0 || !r->theory) continue;
        const double env = error_envelope(r->x, r->theory->delta_nx, delta);
        envs.push_back(env);
        num += std::abs(r->ratio_max - 2.0) * env;
        den += env * env;
      }
      const bool varied = envs.size() >= 2 && *std::max_element(envs.begin(), envs.end()) >
                                                   *std::min_element(envs.begin(), envs.end());
      if (varied && den > 0.0) g.fitted_c = num / den;
    }
    rep.worst_final_dev_max = std::max(rep.worst_final_dev_max, g.final_dev_max);
    rep.worst_final_dev_sum = std::max(rep.worst_final_dev_sum, g.final_dev_sum);
    rep.groups.push_back(std::move(g));
  }
  if (rep.groups.empty()) throw ConfigError("convergence report needs >= 3 rows sharing an x rule");
  return rep;
}

nlohmann::json to_json(const RatioRow& row) {
  nlohmann::json j = {{"n", row.n},
                      {"x", row.x},
                      {"p_max", row.p_max},
                      {"p_sum", row.p_sum},
                      {"tail", row.tail},
                      {"ratio_max", row.ratio_max},
                      {"ratio_sum", row.ratio_sum},
                      {"ci_low", row.ci_low},
                      {"ci_high", row.ci_high},
                      {"probe", row.probe},
                      {"method", row.method},
                      {"samples", row.samples},
                      {"seed", row.seed}};
  if (row.theory) j["theory"] = to_json(*row.theory);
  return j;
}

nlohmann::json to_json(const ConvergenceReport& rep) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : rep.groups) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : g.points)
      pts.push_back({{"n", p.n}, {"x", p.x}, {"dev_max", p.dev_max}, {"dev_sum", p.dev_sum}, {"half_width", p.half_width}});
    nlohmann::json gj = {{"group", g.group},
                         {"trajectory", pts},
                         {"trend_max", g.trend_max},
                         {"trend_sum", g.trend_sum},
                         {"final_dev_max", g.final_dev_max},
                         {"final_dev_sum", g.final_dev_sum}};
    gj["fitted_c"] = g.fitted_c ? nlohmann::json(*g.fitted_c) : nlohmann::json(nullptr);
    groups.push_back(gj);
  }
  return {{"groups", groups}, {"worst_final_dev_max", rep.worst_final_dev_max}, {"worst_final_dev_sum", rep.worst_final_dev_sum}};
}

}  // namespace mdlab
