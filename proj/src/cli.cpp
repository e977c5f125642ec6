#include "mdlab/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdlab/errors.hpp"
#include "mdlab/experiments.hpp"
#include "mdlab/mc_engine.hpp"
#include "mdlab/oracle.hpp"
#include "mdlab/theory.hpp"

namespace mdlab {

namespace {

// Flags shared by the subcommands that take a single sequence.
struct SequenceFlags {
  std::string dist = "rademacher";
  std::optional<double> scale, a, b, half_width, rate, nu;
  std::string scales;
  std::uint64_t n = 0;

  void attach(CLI::App* app) {
    app->add_option("--dist", dist, "family name or JSON literal, e.g. '{\"family\":\"uniform\",\"half_width\":1.5}'");
    app->add_option("--scale", scale, "rademacher scale");
    app->add_option("--a", a, "two_point upper atom");
    app->add_option("--b", b, "two_point lower atom magnitude");
    app->add_option("--half-width", half_width, "uniform half width");
    app->add_option("--rate", rate, "centered_exponential rate");
    app->add_option("--nu", nu, "student_t degrees of freedom");
    app->add_option("--scales", scales, "comma-separated per-index scales (overrides --n)");
    app->add_option("--n", n, "number of increments");
  }

  DistributionSpec distribution() const {
    nlohmann::json lit;
    if (!dist.empty() && dist.front() == '{') {
      try {
        lit = nlohmann::json::parse(dist);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("--dist: malformed JSON literal: ") + e.what());
      }
    } else {
      lit["family"] = dist;
    }
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (v) lit[key] = *v;
    };
    put("scale", scale);
    put("a", a);
    put("b", b);
    put("half_width", half_width);
    put("rate", rate);
    put("nu", nu);
    return distribution_from_json(lit);
  }

  SequenceSpec sequence() const {
    auto d = distribution();
    if (!scales.empty()) {
      std::vector<double> s;
      std::stringstream ss(scales);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        try {
          s.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw ConfigError("--scales: cannot parse \"" + cell + "\"");
        }
      }
      return SequenceSpec(std::move(d), std::move(s));
    }
    if (n == 0) throw ConfigError("--n is required and must be >= 1");
    return SequenceSpec(std::move(d), n);
  }
};

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mdlab: self-normalized moderate deviation laboratory", "mdlab"};
  app.require_subcommand(1);

  SequenceFlags seq_flags;
  double x = 0.0, r = 1.0, delta = 1.0, tau = 1.0, a0 = 1.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string method = "naive";
  std::string oracle_method = "auto";
  int workers = 0;
  std::string config_path;
  std::optional<std::string> output_override;

  auto* theory = app.add_subcommand("theory", "print moment functionals and proof constants as JSON");
  seq_flags.attach(theory);
  theory->add_option("--x", x, "deviation level")->required();
  theory->add_option("--r", r, "moment exponent in (0, 1]");
  theory->add_option("--delta", delta, "delta > 0");
  theory->add_option("--tau", tau, "tau > 0");
  theory->add_option("--a0-constant", a0, "absolute constant A of the a0 regime test");

  auto* enumerate = app.add_subcommand("enumerate", "exact tail probabilities");
  seq_flags.attach(enumerate);
  enumerate->add_option("--x", x, "deviation level")->required();
  enumerate->add_option("--method", oracle_method, "auto | enumeration | lattice_dp");

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo tail estimates");
  seq_flags.attach(simulate_cmd);
  simulate_cmd->add_option("--x", x, "deviation level")->required();
  simulate_cmd->add_option("--samples", samples, "number of paths (>= 1000)")->required();
  simulate_cmd->add_option("--seed", seed, "64-bit seed (default 20240601)");
  simulate_cmd->add_option("--method", method, "naive | tilted");
  simulate_cmd->add_option("--workers", workers, "OpenMP threads (0 = default)");

  auto* sweep = app.add_subcommand("sweep", "run a configured (n, x) sweep and write CSV + manifest");
  sweep->add_option("--config", config_path, "sweep config JSON")->required();
  sweep->add_option("--workers", workers, "worker budget (0 = config value)");
  sweep->add_option("--output", output_override, "override the CSV path");

  try {
    std::vector<const char*> argv{"mdlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  nlohmann::json result;
  if (theory->parsed()) {
    const auto seq = seq_flags.sequence();
    const auto q = compute_quantities(seq, x, r, delta, a0);
    result = to_json(q);
    const auto ad2 = check_ad2(seq, r, delta, tau);
    result["ad2"] = {{"ok", ad2.ok}, {"worst_k", ad2.worst_k}, {"lhs", ad2.lhs}, {"rhs", ad2.rhs}, {"margin", ad2.margin}};
    const auto a2 = check_a2(seq, x, delta);
    result["a2"] = {{"applicable", a2.applicable}, {"holds", a2.holds}, {"lhs", a2.lhs}, {"rhs", a2.rhs}};
  } else if (enumerate->parsed()) {
    const auto seq = seq_flags.sequence();
    const bool rademacher_iid = seq.iid() && std::holds_alternative<Rademacher>(seq.dist().family());
    ExactResult ex;
    if (oracle_method == "lattice_dp") {
      if (!rademacher_iid) throw ConfigError("lattice_dp needs an iid rademacher sequence");
      ex = lattice_dp(seq.n(), x, std::get<Rademacher>(seq.dist().family()).scale);
    } else if (oracle_method == "enumeration" || (oracle_method == "auto" && (!rademacher_iid || seq.n() <= 24))) {
      ex = enumerate_exact(seq, x);
    } else if (oracle_method == "auto") {
      ex = lattice_dp(seq.n(), x, std::get<Rademacher>(seq.dist().family()).scale);
    } else {
      throw ConfigError("--method must be auto, enumeration or lattice_dp");
    }
    result = to_json(ex);
  } else if (simulate_cmd->parsed()) {
    const auto seq = seq_flags.sequence();
    SimulationRequest req;
    req.x = x;
    req.n_samples = samples;
    req.seed = seed;
    req.method = method_from_string(method);
    req.workers = workers;
    const auto res = mdlab::simulate(seq, req);
    result = {{"max", to_json(res.max)}, {"sum", to_json(res.sum)}};
  } else if (sweep->parsed()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config " + config_path);
    nlohmann::json cj;
    try {
      cj = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed config: ") + e.what());
    }
    auto cfg = sweep_config_from_json(cj);
    if (workers > 0) cfg.workers = workers;
    if (output_override) cfg.output = *output_override;
    const auto outcome = run_sweep(cfg);
    result = {{"output", cfg.output},
              {"rows", outcome.rows.size()},
              {"resumed_rows", outcome.resumed_rows},
              {"manifest", outcome.manifest}};
    try {
      result["report"] = to_json(convergence_report(outcome.rows, cfg.delta));
    } catch (const ConfigError&) {
      result["report"] = nullptr;
    }
  }
  out << result.dump() << '\n';
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(args, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace mdlab
