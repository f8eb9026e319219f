#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "symkl/bounds.hpp"
#include "symkl/model.hpp"

namespace symkl {

enum class Check { lln, clt, coverage, bounds };

std::string to_string(Check c);
std::optional<Check> parse_check(std::string_view name);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  PopulationModel model;
  std::vector<std::uint64_t> n_values;
  std::uint64_t replications = 1;
  std::uint64_t master_seed = 0;
  double ci_level = 0.95;
  std::set<Check> checks;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError on: empty or non-ascending n_values, zero replications,
/// ci_level outside (0,1), or a clt check requested at cond_p == cond_q.
void validate(const ExperimentConfig& config);

struct ReplicationRecord {
  std::uint64_t rep_index = 0;
  std::uint64_t n = 0;
  std::optional<double> estimate;
  std::optional<double> eta;
  std::optional<double> scaled_eta;
  std::optional<double> sigma2_hat;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::optional<bool> covered;
  bool degenerate = false;

  bool operator==(const ReplicationRecord&) const = default;
};

struct SampleSizeSummary {
  std::uint64_t n = 0;
  std::uint64_t replications = 0;
  std::uint64_t degenerate = 0;
  double mean_eta = 0.0;
  double median_eta = 0.0;
  double variance_eta = 0.0;
  double median_abs_eta = 0.0;
  double mean_scaled = 0.0;
  double median_scaled = 0.0;
  double variance_scaled = 0.0;
  /// KS distance of scaled_eta / sigma against the standard normal; absent
  /// when sigma2 == 0.
  std::optional<double> ks_distance;
  std::optional<double> coverage;
};

struct ExperimentResult {
  std::vector<ReplicationRecord> records;  // sorted by (n index, rep index)
  std::vector<SampleSizeSummary> summary;  // one per n, ascending
  double true_value = 0.0;
  double sigma2 = 0.0;
  /// Set when every replication was degenerate.
  std::optional<std::string> failure;
};

/// Stream for replication `rep` at sample-size index `n_index`.
Stream replication_stream(std::uint64_t master_seed, std::uint64_t n_index, std::uint64_t rep);

/// Runs every (n, rep) replication. The output is independent of `workers`.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers = 0);

/// sup_x |F_m(x) - cdf(x)| for the empirical CDF F_m of `sample`.
double ks_statistic(std::span<const double> sample,
                    const std::function<double(double)>& cdf = {});

/// Fraction of non-degenerate records whose interval contains `true_value`.
double coverage_rate(std::span<const ReplicationRecord> records, double true_value);

/// Median |eta_n| per n over non-degenerate records; needs >= 2 distinct n.
std::map<std::uint64_t, double> lln_curve(std::span<const ReplicationRecord> records);

/// Union bound on the chance that a sample of size n is degenerate, built from
/// the conditional-cell bounds at g = min_j min(p_j, q_j) / 2.
double degenerate_rate_bound(const PopulationModel& model, std::uint64_t n);

struct CheckOutcome {
  Check check;
  bool passed = false;
  std::string detail;
};

inline const std::vector<double> kDefaultBoundGGrid{0.05, 0.1, 0.2, 0.5};

/// KS threshold used by the clt check for m non-degenerate replications.
double clt_ks_threshold(std::uint64_t m);
/// Allowed |coverage - level| for the coverage check.
inline constexpr double kCoverageTolerance = 0.02;

/// Evaluates the requested checks. `bound_rows` receives the bounds table when
/// the bounds check runs.
std::vector<CheckOutcome> evaluate_checks(const ExperimentConfig& config,
                                          const ExperimentResult* result, unsigned workers,
                                          std::vector<BoundRow>* bound_rows = nullptr);

}  // namespace symkl
