// symkl: plug-in Jeffreys divergence estimates, confidence intervals, and
// Monte Carlo checks of their limit behaviour.
//
// Exit codes: 0 pass, 1 usage or malformed input, 2 degenerate data,
// 3 a requested check failed (reports are still written).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "symkl/asymptotics.hpp"
#include "symkl/estimator.hpp"
#include "symkl/io.hpp"
#include "symkl/montecarlo.hpp"

namespace fs = std::filesystem;
using namespace symkl;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitCheckFailed = 3;

constexpr std::uint64_t kDefaultSeed = 20240229;

PopulationModel reference_model() {
  return PopulationModel(0.5, ProbVector({0.5, 0.5}), ProbVector({0.25, 0.75}));
}

struct RunOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> level;
  bool dry_run = false;
  unsigned workers = 0;
};

ExperimentConfig default_config(const std::string& command) {
  ExperimentConfig c{reference_model(), {1000, 10000, 100000}, 200, kDefaultSeed, 0.95, {Check::lln}};
  if (command == "clt-check") {
    c.n_values = {10000};
    c.replications = 2000;
  } else if (command == "bounds-check") {
    c.n_values = {100, 1000, 10000};
    c.replications = 100000;
  }
  return c;
}

ExperimentConfig resolve_config(const std::string& command, const RunOptions& opt) {
  ExperimentConfig config = default_config(command);
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError("cannot open config file " + opt.config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    config = io::config_from_json(j);
  }
  if (opt.seed) config.master_seed = *opt.seed;
  if (opt.level) config.ci_level = *opt.level;
  if (command == "clt-check") config.checks = {Check::clt, Check::coverage};
  if (command == "lln-check") config.checks = {Check::lln};
  if (command == "bounds-check") config.checks = {Check::bounds};
  validate(config);
  return config;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

int run_checks(const std::string& command, const RunOptions& opt) {
  ExperimentConfig config = resolve_config(command, opt);
  if (opt.dry_run) {
    std::cout << io::config_to_json(config).dump(2) << '\n';
    return kExitPass;
  }

  io::RunManifest manifest;
  manifest.command = command;
  manifest.config = io::config_to_json(config);
  manifest.master_seed = config.master_seed;
  manifest.started_at = io::utc_now();

  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);

  std::optional<ExperimentResult> result;
  if (command != "bounds-check") {
    result = run_experiment(config, opt.workers);
    std::ofstream records(out_dir / "records.csv", std::ios::binary);
    io::write_records_csv(records, result->records);
    if (!records) throw std::runtime_error("cannot write records.csv");
  }

  std::vector<BoundRow> bound_rows;
  const auto checks =
      evaluate_checks(config, result ? &*result : nullptr, opt.workers, &bound_rows);
  if (!bound_rows.empty()) {
    std::ofstream bounds(out_dir / "bounds.csv", std::ios::binary);
    io::write_bounds_csv(bounds, bound_rows);
  }

  manifest.checks = checks;
  manifest.finished_at = io::utc_now();
  write_json(out_dir / "summary.json", io::summary_to_json(result ? &*result : nullptr, checks));
  write_json(out_dir / "manifest.json", io::manifest_to_json(manifest));

  bool all_passed = !(result && result->failure);
  for (const auto& c : checks) {
    std::cout << to_string(c.check) << ": " << (c.passed ? "PASS" : "FAIL") << " (" << c.detail
              << ")\n";
    all_passed = all_passed && c.passed;
  }
  if (result && result->failure) std::cout << "experiment failed: " << *result->failure << '\n';
  return all_passed ? kExitPass : kExitCheckFailed;
}

int run_estimate(const std::string& counts_path, double level) {
  std::ifstream in(counts_path);
  if (!in) {
    std::cerr << "error: cannot open " << counts_path << '\n';
    return kExitUsage;
  }
  const CountTable counts = io::parse_counts_csv(in);
  const auto est = plug_in_estimate(counts);
  std::cout << "n: " << counts.n() << '\n';
  if (est.degenerate()) {
    std::cout << "estimate: undefined\n"
              << "degenerate: " << to_string(est.degeneracy) << '\n';
    return kExitDegenerate;
  }
  const auto var = plugin_sigma2(counts);
  const auto ci = confidence_interval(est, var, level);
  std::cout << "estimate: " << io::format_real(*est.value) << '\n'
            << "sigma2_hat: " << io::format_real(var.sigma2) << '\n'
            << "level: " << io::format_real(level) << '\n'
            << "ci_lo: " << io::format_real(ci.lower) << '\n'
            << "ci_hi: " << io::format_real(ci.upper) << '\n';
  if (ci.degenerate_variance) {
    std::cout << "warning: sigma2_hat is 0, the interval collapses to a point\n";
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jeffreys divergence estimation and limit-theorem checks"};
  app.require_subcommand(1);

  std::string counts_path;
  double estimate_level = 0.95;
  auto* estimate = app.add_subcommand("estimate", "Estimate from a counts CSV");
  estimate->add_option("counts", counts_path, "Counts CSV (row 1: Y=1, row 2: Y=0)")->required();
  estimate->add_option("--level", estimate_level, "Confidence level")
      ->check(CLI::Range(0.0, 1.0).description("in (0,1)"));

  RunOptions opt;
  std::optional<std::uint64_t> seed;
  std::optional<double> level;
  std::vector<CLI::App*> runners;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Monte Carlo replications with the configured checks"},
      {"clt-check", "Normality of the scaled error and CI coverage"},
      {"lln-check", "Shrinking estimation error across sample sizes"},
      {"bounds-check", "Tail bounds against empirical exceedance rates"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON experiment config");
    sub->add_option("--out-dir", opt.out_dir, "Directory for reports");
    sub->add_option("--seed", seed, "Override master seed");
    sub->add_option("--level", level, "Override confidence level");
    sub->add_flag("--dry-run", opt.dry_run, "Validate the config and exit");
    sub->add_option("--workers", opt.workers, "Worker threads (0: all cores)");
    runners.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }
  opt.seed = seed;
  opt.level = level;

  try {
    if (estimate->parsed()) return run_estimate(counts_path, estimate_level);
    for (auto* sub : runners) {
      if (sub->parsed()) return run_checks(sub->get_name(), opt);
    }
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << counts_path << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
