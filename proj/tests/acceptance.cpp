// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mdlab/experiments.hpp"
#include "mdlab/mc_engine.hpp"
#include "mdlab/normal_tail.hpp"
#include "mdlab/oracle.hpp"
#include "mdlab/theory.hpp"

using namespace mdlab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mdlab_acceptance";
  fs::create_directories(dir);
  const auto p = (dir / name).string();
  fs::remove(p);
  fs::remove(manifest_path(p));
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimulationRequest request(double x, std::uint64_t samples, std::uint64_t seed, Method m) {
  SimulationRequest r;
  r.x = x;
  r.n_samples = samples;
  r.seed = seed;
  r.method = m;
  return r;
}

// Shared by criteria 1 and 2.
struct RatioGrid {
  std::vector<RatioRow> rows;
  double seconds = 0.0;
};

const RatioGrid& rademacher_grid() {
  static const RatioGrid grid = [] {
    RatioGrid g;
    auto cfg = sweep_config_from_json(nlohmann::json{
        {"dist", "rademacher"}, {"n_grid", {256, 1024, 4096, 16384}}, {"x", {1.5}}, {"workers", 1}});
    cfg.output = scratch("ratio_grid.csv");
    const auto t0 = std::chrono::steady_clock::now();
    g.rows = run_sweep(cfg).rows;
    g.seconds = seconds_since(t0);
    return g;
  }();
  return grid;
}

Verdict ratio_to_two() {
  Verdict v;
  const auto& g = rademacher_grid();
  std::string traj;
  double prev = INFINITY;
  bool decreasing = true;
  for (const auto& r : g.rows) {
    const double dev = std::abs(r.ratio_max - 2.0);
    decreasing = decreasing && dev < prev;
    prev = dev;
    traj += (traj.empty() ? "" : " ") + std::to_string(r.n) + ":" + fmt("%.4f", dev);
  }
  v.note("|ratio_max-2| " + traj);
  v.require(decreasing, "deviation decreases along the grid");
  v.require(prev <= 0.05, "final deviation <= 0.05");
  v.require(g.rows.back().method == "lattice_dp", "rows come from the lattice DP");
  v.require(g.seconds <= 60.0, "runtime <= 60 s");
  v.note(fmt("%.2f s", g.seconds));
  const auto rep = convergence_report(g.rows, 1.0);
  v.require(rep.groups.front().trend_max == "decreasing", "report flags the trend as decreasing");
  return v;
}

Verdict ratio_to_one() {
  Verdict v;
  const auto& g = rademacher_grid();
  std::string traj;
  for (const auto& r : g.rows) traj += (traj.empty() ? "" : " ") + std::to_string(r.n) + ":" + fmt("%.4f", r.ratio_sum);
  v.note("ratio_sum " + traj);
  const double final_dev = std::abs(g.rows.back().ratio_sum - 1.0);
  v.require(final_dev <= 0.05, "|ratio_sum-1| <= 0.05 at n=16384");
  return v;
}

Verdict oracle_cross_validation() {
  Verdict v;
  double worst = 0.0;
  for (std::uint64_t n = 1; n <= 20; ++n)
    for (double x : {0.5, 1.0, 1.5}) {
      const auto e = enumerate_exact(SequenceSpec(Rademacher{1.0}, n), x);
      const auto d = lattice_dp(n, x);
      worst = std::max({worst, std::abs(e.p_max - d.p_max), std::abs(e.p_sum - d.p_sum)});
    }
  v.note("max |enum - dp| = " + fmt("%.2e", worst));
  v.require(worst <= 1e-12, "enumeration and DP agree to 1e-12");

  const SequenceSpec two(TwoPoint{2.0, 1.0}, 12);
  const double x = 1.0;
  const auto exact = enumerate_exact(two, x);
  const auto mc = simulate(two, request(x, 1000000, 20240601, Method::naive));
  const double z_max = (mc.max.p_hat() - exact.p_max) / mc.max.std_error();
  const double z_sum = (mc.sum.p_hat() - exact.p_sum) / mc.sum.std_error();
  v.note("two_point n=12 x=1: exact " + fmt("%.6f", exact.p_max) + ", MC " + fmt("%.6f", mc.max.p_hat()) +
         " (z=" + fmt("%.2f", z_max) + "), sum z=" + fmt("%.2f", z_sum));
  v.require(std::abs(z_max) <= 4.0 && std::abs(z_sum) <= 4.0, "naive MC within 4 stderr of enumeration");
  return v;
}

Verdict importance_sampling() {
  Verdict v;
  const SequenceSpec seq(Rademacher{1.0}, 64);
  const auto exact = lattice_dp(64, 2.0);
  const auto key = problem_key(seq, 2.0);
  auto pooled = TailEstimate::empty(Method::tilted, Event::max, key);
  for (std::uint64_t s = 1; s <= 20; ++s) pooled = merge(pooled, simulate(seq, request(2.0, 100000, s, Method::tilted)).max);
  const double z = (pooled.p_hat() - exact.p_max) / pooled.std_error();
  v.note("pooled " + fmt("%.6g", pooled.p_hat()) + " vs exact " + fmt("%.6g", exact.p_max) + " (z=" + fmt("%.2f", z) +
         ")");
  v.require(std::abs(z) <= 4.0, "pooled tilted mean within 4 pooled stderr of the DP");

  const SequenceSpec longer(Rademacher{1.0}, 256);
  const auto nv = simulate(longer, request(2.5, 100000, 99, Method::naive));
  const auto tl = simulate(longer, request(2.5, 100000, 99, Method::tilted));
  v.note("n=256 x=2.5 stderr naive " + fmt("%.3g", nv.max.std_error()) + " tilted " + fmt("%.3g", tl.max.std_error()));
  v.require(tl.max.std_error() < nv.max.std_error(), "tilted stderr below naive stderr");
  return v;
}

Verdict normal_sandwich() {
  Verdict v;
  const double root2pi = std::sqrt(2.0 * std::numbers::pi);
  int bad = 0;
  for (int i = 0; i < 400; ++i) {
    const double x = 1.0 + 39.0 * i / 399.0;
    const double e = std::exp(-x * x / 2.0);
    const double lower = x * e / (root2pi * (1.0 + x * x));
    const double upper = e / (root2pi * x);
    const double t = normal_tail(x);
    if (!(lower <= t && t <= upper)) {
      if (bad < 3) v.note("violated at x=" + fmt("%.6f", x));
      ++bad;
    }
  }
  v.note(std::to_string(400 - bad) + "/400 points inside");
  v.require(bad == 0, "sandwich at every grid point");
  return v;
}

Verdict theory_invariants() {
  Verdict v;
  const std::vector<DistributionSpec> fams = {DistributionSpec(Rademacher{1.0}), DistributionSpec(TwoPoint{2.0, 1.0}),
                                              DistributionSpec(Uniform{std::sqrt(3.0)}),
                                              DistributionSpec(CenteredExponential{1.0}), DistributionSpec(StudentT{5.0})};
  auto rel = [](double a, double b) { return a == b ? 0.0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };

  // scale invariance
  double worst = 0.0;
  bool discrete_equal = true;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (const auto& d : fams) {
    std::vector<double> sc(300);
    for (auto& s : sc) s = u(gen);
    for (const auto& base : {SequenceSpec(d, 300), SequenceSpec(d, sc)})
      for (double x : {0.8, 2.0, 6.0, 15.0}) {
        const auto ref = compute_quantities(base, x, 1.0, 1.0);
        for (double c : {1e-3, 1.0, 1e3}) {
          const auto q = compute_quantities(base.rescaled(c), x, 1.0, 1.0);
          worst = std::max({worst, rel(q.delta_nx, ref.delta_nx), rel(q.dnr, ref.dnr), rel(q.epsilon, ref.epsilon)});
          discrete_equal = discrete_equal && q.n0 == ref.n0 && q.a0_ok == ref.a0_ok && q.bor_ok == ref.bor_ok &&
                           q.range_ok == (x <= std::sqrt(q.bn2));
        }
      }
  }
  v.note("scale invariance max rel diff " + fmt("%.1e", worst));
  v.require(worst <= 1e-12, "Delta, d, epsilon invariant to 1e-12");
  v.require(discrete_equal, "n0 and regime flags invariant");

  // d_{n,1} = n^{1/6} for unit moments
  double worst_d = 0.0;
  for (std::uint64_t n : {1ull, 8ull, 64ull, 1000ull, 262144ull, 1000000000ull}) {
    const auto q = compute_quantities(SequenceSpec(Rademacher{1.0}, n), 1.0, 1.0, 1.0);
    worst_d = std::max(worst_d, rel(q.dnr, std::pow(static_cast<double>(n), 1.0 / 6.0)));
  }
  v.require(worst_d <= 1e-12, "d_{n,1} = n^{1/6} on unit-moment iid");

  // truncation-mass chain wherever a0 and bor hold
  int chain_instances = 0;
  bool chain_ok = true;
  for (const auto& d : fams)
    for (double n : {1e9, 1e12, 1e15, 1e18})
      for (double x : {2.0, 3.0, 5.0, 8.0})
        for (double delta : {1.0, 3.0, 5.0}) {
          const SequenceSpec seq(d, static_cast<std::uint64_t>(n));
          const auto q = compute_quantities(seq, x, 1.0, delta);
          if (!(q.a0_ok && q.bor_ok)) continue;
          ++chain_instances;
          chain_ok = chain_ok && truncation_mass(seq, x, q.epsilon, q.delta_nx).holds();
        }
  v.note(std::to_string(chain_instances) + " chain instances");
  v.require(chain_instances > 0, "some instances satisfy a0 and bor");
  v.require(chain_ok, "truncation-mass chain on every such instance");

  // block count under the a1 premise
  int block_instances = 0;
  bool blocks_ok = true;
  for (const auto& d : fams) {
    std::vector<double> sc(1000000);
    for (auto& s : sc) s = u(gen);
    for (const auto& seq : {SequenceSpec(d, 1000000), SequenceSpec(d, sc)})
      for (double x : {2.0, 2.5, 3.0})
        for (double eps : {1.0 / 24.0, 0.03, 0.05}) {
          const auto p = build_blocks(seq, x, eps);
          if (!p.a1_premise) continue;
          ++block_instances;
          blocks_ok = blocks_ok && p.bound_ok && p.min_mass_ok &&
                      static_cast<double>(p.blocks) <= 4.0 * x * x / (eps * eps * eps) + 1.0;
        }
  }
  v.note(std::to_string(block_instances) + " block instances");
  v.require(block_instances > 0, "some instances satisfy the a1 premise");
  v.require(blocks_ok, "T <= 4x^2/eps^3 + 1 on every such instance");
  return v;
}

Verdict reproducibility() {
  Verdict v;
  const nlohmann::json many_rows = {{"dist", "uniform"}, {"n_grid", {16, 64, 256}}, {"x", {0.5, 1.5, 2.5}},
                                    {"engine", "mc"},    {"method", "tilted"},     {"samples", 40000},
                                    {"seed", 31337}};
  const nlohmann::json one_row = {{"dist", "rademacher"}, {"n_grid", {128}}, {"x", {2.0}}, {"engine", "mc"},
                                  {"method", "naive"},    {"samples", 400000}, {"seed", 7}};
  int idx = 0;
  for (const auto& base : {many_rows, one_row}) {
    ++idx;
    std::string ref;
    bool same = true;
    for (int w : {1, 2, 8}) {
      auto cfg = sweep_config_from_json(base);
      cfg.workers = w;
      cfg.output = scratch("repro_" + std::to_string(idx) + "_w" + std::to_string(w) + ".csv");
      run_sweep(cfg);
      const auto text = slurp(cfg.output);
      if (ref.empty())
        ref = text;
      else
        same = same && text == ref;
    }
    v.require(same, "config " + std::to_string(idx) + " identical for workers 1, 2, 8");
    v.note("config " + std::to_string(idx) + ": " + std::to_string(ref.size()) + " bytes");

    if (idx == 1) {
      auto cfg = sweep_config_from_json(base);
      cfg.workers = 2;
      cfg.output = scratch("repro_resumed.csv");
      run_sweep(cfg, {4});
      {
        std::ofstream torn(cfg.output, std::ios::app | std::ios::binary);
        torn << "64,1.5,0.01";
      }
      const auto resumed = run_sweep(cfg);
      v.require(resumed.resumed_rows == 4, "resume picks up the 4 finished rows");
      v.require(slurp(cfg.output) == ref, "interrupted and resumed sweep equals uninterrupted");
      v.note("resumed after 4 rows and a torn line");
    }
  }
  return v;
}

Verdict conjecture_probe() {
  Verdict v;
  // Exact probe values along x = c n^{1/6} from the oracle.
  auto oracle_cfg = sweep_config_from_json(nlohmann::json{
      {"dist", "rademacher"}, {"n_grid", {64, 256, 1024, 4096, 16384}}, {"x_rule", "scaled"}, {"c", {0.5, 1.0}}});
  oracle_cfg.output = scratch("probe_oracle.csv");
  const auto exact_rows = run_sweep(oracle_cfg).rows;
  bool finite = true;
  std::string traj;
  for (const auto& r : exact_rows) {
    finite = finite && std::isfinite(r.probe);
    if (r.group == 1.0) traj += (traj.empty() ? "" : " ") + fmt("%.4f", r.probe);
  }
  v.note("rademacher exact probe (c=1): " + traj);
  v.require(finite, "oracle probe values finite");
  const auto rep = convergence_report(exact_rows, 1.0);
  v.note("worst final |ratio-2| over c: " + fmt("%.4f", rep.worst_final_dev_max));

  // Seed stability of the Monte Carlo probe for both families.
  int rows_checked = 0, unstable = 0;
  for (const char* fam : {"rademacher", "uniform"}) {
    std::vector<std::vector<RatioRow>> runs;
    for (std::uint64_t seed : {101ull, 202ull}) {
      auto cfg = sweep_config_from_json(nlohmann::json{{"dist", fam},
                                                       {"n_grid", {64, 256, 1024}},
                                                       {"x_rule", "scaled"},
                                                       {"c", {0.5, 1.0}},
                                                       {"engine", "mc"},
                                                       {"method", "tilted"},
                                                       {"samples", 100000},
                                                       {"seed", seed}});
      cfg.output = scratch(std::string("probe_") + fam + "_" + std::to_string(seed) + ".csv");
      runs.push_back(run_sweep(cfg).rows);
    }
    for (std::size_t i = 0; i < runs[0].size(); ++i) {
      const auto& a = runs[0][i];
      const auto& b = runs[1][i];
      ++rows_checked;
      finite = finite && std::isfinite(a.probe) && std::isfinite(b.probe);
      // the probe is affine in ratio_max, so its interval is the ratio interval mapped through the same factor
      const double factor = a.ratio_max != 2.0 ? a.probe / (a.ratio_max - 2.0) : 0.0;
      const double width = std::abs(factor) * ((a.ci_high - a.ci_low) / 2.0 + (b.ci_high - b.ci_low) / 2.0);
      if (std::abs(a.probe - b.probe) > width) ++unstable;
    }
  }
  v.note(std::to_string(rows_checked - unstable) + "/" + std::to_string(rows_checked) +
         " MC probe pairs agree across seeds within CI widths");
  v.require(finite, "MC probe values finite");
  v.require(unstable == 0, "probe stable across seeds");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"1 ratio of max event to tail tends to 2", ratio_to_two},
      {"2 ratio of sum event to tail tends to 1", ratio_to_one},
      {"3 oracle cross-validation", oracle_cross_validation},
      {"4 importance sampling correctness", importance_sampling},
      {"5 normal tail sandwich", normal_sandwich},
      {"6 theory invariants", theory_invariants},
      {"7 reproducibility", reproducibility},
      {"8 conjecture probe", conjecture_probe},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.note(std::string("exception: ") + e.what());
    }
    if (!v.pass) ++failures;
    std::printf("%s criterion %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), seconds_since(t0),
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
