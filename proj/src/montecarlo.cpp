#include "symkl/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "symkl/asymptotics.hpp"
#include "symkl/estimator.hpp"
#include "symkl/normal.hpp"
#include "symkl/parallel.hpp"

namespace symkl {

std::string to_string(Check c) {
  switch (c) {
    case Check::lln: return "lln";
    case Check::clt: return "clt";
    case Check::coverage: return "coverage";
    case Check::bounds: return "bounds";
  }
  return "unknown";
}

std::optional<Check> parse_check(std::string_view name) {
  for (auto c : {Check::lln, Check::clt, Check::coverage, Check::bounds}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

void validate(const ExperimentConfig& config) {
  if (config.n_values.empty()) throw ConfigError("n_values must be nonempty");
  for (std::size_t i = 0; i < config.n_values.size(); ++i) {
    if (config.n_values[i] == 0) throw ConfigError("n_values entries must be >= 1");
    if (i > 0 && config.n_values[i] <= config.n_values[i - 1]) {
      throw ConfigError("n_values must be strictly ascending");
    }
  }
  if (config.replications == 0) throw ConfigError("replications must be >= 1");
  if (!(config.ci_level > 0.0 && config.ci_level < 1.0)) {
    throw ConfigError("ci_level must lie in (0, 1)");
  }
  if (config.checks.contains(Check::clt) && config.model.cond_p() == config.model.cond_q()) {
    throw ConfigError("clt check is undefined when cond_p == cond_q (sigma^2 = 0)");
  }
}

Stream replication_stream(std::uint64_t master_seed, std::uint64_t n_index, std::uint64_t rep) {
  return Stream(master_seed, derive_key({n_index, rep}));
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments moments_of(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return {std::nan(""), std::nan("")};
  CompensatedSum s;
  for (double x : v) s.add(x);
  m.mean = s.value() / static_cast<double>(v.size());
  if (v.size() < 2) return m;
  CompensatedSum ss;
  for (double x : v) ss.add((x - m.mean) * (x - m.mean));
  m.variance = ss.value() / static_cast<double>(v.size() - 1);
  return m;
}

ReplicationRecord replicate(const JointSampler& sampler, const ExperimentConfig& config,
                            double true_value, std::size_t n_index, std::uint64_t rep) {
  const std::uint64_t n = config.n_values[n_index];
  auto stream = replication_stream(config.master_seed, n_index, rep);
  const auto counts = sample_batch(sampler, n, stream);

  ReplicationRecord rec;
  rec.rep_index = rep;
  rec.n = n;
  const auto est = plug_in_estimate(counts);
  if (est.degenerate()) {
    rec.degenerate = true;
    return rec;
  }
  const auto var = plugin_sigma2(counts);
  const auto ci = confidence_interval(est, var, config.ci_level);
  rec.estimate = est.value;
  rec.eta = *est.value - true_value;
  rec.scaled_eta = std::sqrt(static_cast<double>(n)) * *rec.eta;
  rec.sigma2_hat = var.sigma2;
  rec.ci_lo = ci.lower;
  rec.ci_hi = ci.upper;
  rec.covered = ci.contains(true_value);
  return rec;
}

SampleSizeSummary summarize(std::span<const ReplicationRecord> recs, std::uint64_t n,
                            double sigma2, double true_value) {
  SampleSizeSummary s;
  s.n = n;
  s.replications = recs.size();
  std::vector<double> eta;
  std::vector<double> abs_eta;
  std::vector<double> scaled;
  for (const auto& r : recs) {
    if (r.degenerate) {
      ++s.degenerate;
      continue;
    }
    eta.push_back(*r.eta);
    abs_eta.push_back(std::fabs(*r.eta));
    scaled.push_back(*r.scaled_eta);
  }
  if (eta.empty()) {
    const double nan = std::nan("");
    s.mean_eta = s.median_eta = s.variance_eta = s.median_abs_eta = nan;
    s.mean_scaled = s.median_scaled = s.variance_scaled = nan;
    return s;
  }
  const auto me = moments_of(eta);
  const auto ms = moments_of(scaled);
  s.mean_eta = me.mean;
  s.variance_eta = me.variance;
  s.median_eta = median_of(eta);
  s.median_abs_eta = median_of(abs_eta);
  s.mean_scaled = ms.mean;
  s.variance_scaled = ms.variance;
  s.median_scaled = median_of(scaled);
  if (sigma2 > 0.0) {
    const double sigma = std::sqrt(sigma2);
    for (auto& x : scaled) x /= sigma;
    s.ks_distance = ks_statistic(scaled);
  }
  s.coverage = coverage_rate(recs, true_value);
  return s;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers) {
  validate(config);
  ExperimentResult result;
  result.true_value = sym_kl_divergence(config.model.cond_p(), config.model.cond_q());
  result.sigma2 = exact_sigma2(config.model).sigma2;

  const JointSampler sampler(config.model);
  const std::size_t n_count = config.n_values.size();
  const std::uint64_t m = config.replications;
  result.records.resize(n_count * m);
  parallel_blocks(result.records.size(), workers,
                  [&](std::size_t begin, std::size_t end, unsigned) {
                    for (std::size_t i = begin; i < end; ++i) {
                      result.records[i] = replicate(sampler, config, result.true_value, i / m, i % m);
                    }
                  });

  std::uint64_t usable = 0;
  for (std::size_t ni = 0; ni < n_count; ++ni) {
    const std::span<const ReplicationRecord> block(result.records.data() + ni * m, m);
    result.summary.push_back(summarize(block, config.n_values[ni], result.sigma2, result.true_value));
    usable += result.summary.back().replications - result.summary.back().degenerate;
  }
  if (usable == 0) result.failure = "all replications were degenerate";
  return result;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic needs a nonempty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf ? cdf(sorted[i]) : normal_cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

double coverage_rate(std::span<const ReplicationRecord> records, double true_value) {
  std::uint64_t usable = 0;
  std::uint64_t covered = 0;
  for (const auto& r : records) {
    if (r.degenerate || !r.ci_lo || !r.ci_hi) continue;
    ++usable;
    if (*r.ci_lo <= true_value && true_value <= *r.ci_hi) ++covered;
  }
  if (usable == 0) throw std::invalid_argument("coverage_rate needs a non-degenerate record");
  return static_cast<double>(covered) / static_cast<double>(usable);
}

std::map<std::uint64_t, double> lln_curve(std::span<const ReplicationRecord> records) {
  std::map<std::uint64_t, std::vector<double>> by_n;
  for (const auto& r : records) {
    auto& bucket = by_n[r.n];
    if (!r.degenerate && r.eta) bucket.push_back(std::fabs(*r.eta));
  }
  if (by_n.size() < 2) throw std::invalid_argument("lln_curve needs at least two sample sizes");
  std::map<std::uint64_t, double> out;
  for (auto& [n, v] : by_n) out[n] = median_of(std::move(v));
  return out;
}

double degenerate_rate_bound(const PopulationModel& model, std::uint64_t n) {
  const double g = 0.5 * std::min(model.cond_p().min(), model.cond_q().min());
  const BoundInputs in(model, n, g);
  const double r = static_cast<double>(model.size());
  return r * (bound_conditional_cell_p(in).value + bound_conditional_cell_q(in).value);
}

double clt_ks_threshold(std::uint64_t m) {
  return std::max(0.04, 1.63 / std::sqrt(static_cast<double>(m)));
}

std::vector<CheckOutcome> evaluate_checks(const ExperimentConfig& config,
                                          const ExperimentResult* result, unsigned workers,
                                          std::vector<BoundRow>* bound_rows) {
  std::vector<CheckOutcome> out;
  for (auto check : config.checks) {
    CheckOutcome o{check, false, {}};
    std::ostringstream detail;
    if (check == Check::bounds) {
      const auto rows = bound_table(config.model, config.n_values, kDefaultBoundGGrid,
                                    EmpiricalBudget{config.replications, config.master_seed, workers});
      std::size_t violations = 0;
      for (const auto& row : rows) violations += row.valid() ? 0 : 1;
      o.passed = violations == 0;
      detail << violations << " of " << rows.size() << " rows exceed bound + 3 stderr";
      if (bound_rows) *bound_rows = rows;
    } else if (result == nullptr || result->summary.empty()) {
      detail << "no experiment result";
    } else if (result->failure) {
      detail << *result->failure;
    } else if (check == Check::lln) {
      if (config.n_values.size() < 2) {
        detail << "needs at least two sample sizes";
      } else {
        const auto curve = lln_curve(result->records);
        o.passed = true;
        double prev = 0.0;
        bool first = true;
        for (const auto& [n, med] : curve) {
          if (!first && !(med < prev)) o.passed = false;
          detail << (first ? "" : " ") << "n=" << n << ":" << med;
          prev = med;
          first = false;
        }
      }
    } else {
      const auto& last = result->summary.back();
      const auto usable = last.replications - last.degenerate;
      if (usable == 0) {
        detail << "no usable replications at largest n";
      } else if (check == Check::clt) {
        const double threshold = clt_ks_threshold(usable);
        o.passed = last.ks_distance && *last.ks_distance <= threshold;
        detail << "ks=" << last.ks_distance.value_or(std::nan("")) << " threshold=" << threshold;
      } else {
        const double cov = last.coverage.value_or(std::nan(""));
        o.passed = std::fabs(cov - config.ci_level) <= kCoverageTolerance;
        detail << "coverage=" << cov << " target=" << config.ci_level << "+-" << kCoverageTolerance;
      }
    }
    if (o.detail.empty()) o.detail = detail.str();
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace symkl
