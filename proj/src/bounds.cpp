#include "symkl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "symkl/estimator.hpp"
#include "symkl/parallel.hpp"
#include "symkl/rng.hpp"

namespace symkl {

namespace {

constexpr std::uint64_t kBoundStreamTag = 0xb0d5;

BoundValue make_value(double v) { return {v, v < 1.0}; }

double sq(double v) { return v * v; }

// Label-side scalars: share, extremes of the conditional, and the two
// Hoeffding range maxima appearing in the denominators.
struct Side {
  double share;
  double cmin;
  double cmax;
  double label_range;  // max(p, q)
  double cell_range;   // max(share * cmax, 1 - share * cmin)
};

Side side(const BoundParams& bp, int label) {
  const double label_range = std::max(bp.p, bp.q);
  if (label == 1) {
    return {bp.p, bp.p_min, bp.p_max, label_range, std::max(bp.p * bp.p_max, 1.0 - bp.p * bp.p_min)};
  }
  return {bp.q, bp.q_min, bp.q_max, label_range, std::max(bp.q * bp.q_max, 1.0 - bp.q * bp.q_min)};
}

void validate(const BoundInputs& in) {
  if (in.n == 0) throw std::invalid_argument("bound inputs need n >= 1");
  if (!(in.g > 0.0)) throw std::invalid_argument("bound inputs need g > 0");
}

double sum(const std::vector<double>& terms) {
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace

BoundParams BoundParams::from_model(const PopulationModel& model) {
  return {model.p(),
          model.q(),
          model.cond_p().min(),
          model.cond_p().max(),
          model.cond_q().min(),
          model.cond_q().max()};
}

BoundInputs::BoundInputs(const PopulationModel& model, std::uint64_t n_, double g_)
    : BoundInputs(BoundParams::from_model(model), n_, g_) {}

BoundInputs::BoundInputs(const BoundParams& params_, std::uint64_t n_, double g_)
    : params(params_), n(n_), g(g_) {
  validate(*this);
}

BoundValue bound_label_freq(const BoundInputs& in) {
  const double n = static_cast<double>(in.n);
  const double m = std::max(in.params.p, in.params.q);
  return make_value(2.0 * std::exp(-n * sq(in.g) / (2.0 * sq(m))));
}

BoundValue bound_joint_cell(const BoundInputs& in, std::size_t j, int label, std::size_t r) {
  if (j >= r) throw std::out_of_range("symbol index out of range");
  if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
  const auto s = side(in.params, label);
  const double n = static_cast<double>(in.n);
  return make_value(2.0 * std::exp(-n * sq(in.g) / (2.0 * sq(s.cell_range))));
}

std::vector<double> conditional_cell_terms(const BoundParams& bp, std::uint64_t n_, double g,
                                           int label) {
  const auto s = side(bp, label);
  const double n = static_cast<double>(n_);
  const double g2 = sq(g);
  const double a2 = sq(s.share);
  return {
      2.0 * std::exp(-n * g2 * a2 / (128.0 * sq(s.label_range) * sq(s.cmax))),
      2.0 * std::exp(-n * g2 * a2 / (8.0 * sq(s.cell_range))),
      std::exp(-n * a2 * sq(s.cmin) / (2.0 * sq(s.cell_range))),
      std::exp(-n * a2 / (8.0 * sq(s.label_range))),
  };
}

std::vector<double> log_ratio_terms(const BoundParams& bp, std::uint64_t n_, double g) {
  const double n = static_cast<double>(n_);
  const double g2 = sq(g);
  std::vector<double> terms;
  terms.reserve(12);
  for (int label : {1, 0}) {
    const auto s = side(bp, label);
    const double a2m2 = sq(s.share) * sq(s.cmin);
    const double lr2 = sq(s.label_range);
    const double cr2 = sq(s.cell_range);
    terms.push_back(4.0 * std::exp(-n * g2 * a2m2 / (2048.0 * lr2 * sq(s.cmax))));
    terms.push_back(4.0 * std::exp(-n * g2 * a2m2 / (128.0 * cr2)));
    terms.push_back(2.0 * std::exp(-n * a2m2 / (512.0 * lr2 * sq(s.cmax))));
    terms.push_back(2.0 * std::exp(-n * a2m2 / (32.0 * cr2)));
    terms.push_back(3.0 * std::exp(-n * a2m2 / (2.0 * cr2)));
    terms.push_back(3.0 * std::exp(-n * sq(s.share) / (8.0 * lr2)));
  }
  return terms;
}

BoundValue bound_conditional_cell_p(const BoundInputs& in) {
  return make_value(sum(conditional_cell_terms(in.params, in.n, in.g, 1)));
}

BoundValue bound_conditional_cell_q(const BoundInputs& in) {
  return make_value(sum(conditional_cell_terms(in.params, in.n, in.g, 0)));
}

BoundValue bound_log_ratio(const BoundInputs& in) {
  return make_value(sum(log_ratio_terms(in.params, in.n, in.g)));
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::conditional_cell_p: return "conditional_cell_p";
    case BoundKind::conditional_cell_q: return "conditional_cell_q";
    case BoundKind::joint_cell_y0: return "joint_cell_y0";
    case BoundKind::joint_cell_y1: return "joint_cell_y1";
    case BoundKind::label_freq_p: return "label_freq_p";
    case BoundKind::label_freq_q: return "label_freq_q";
    case BoundKind::log_ratio: return "log_ratio";
  }
  return "unknown";
}

BoundValue evaluate_bound(BoundKind kind, const BoundInputs& in, std::size_t r) {
  switch (kind) {
    case BoundKind::conditional_cell_p: return bound_conditional_cell_p(in);
    case BoundKind::conditional_cell_q: return bound_conditional_cell_q(in);
    case BoundKind::joint_cell_y0: return bound_joint_cell(in, 0, 0, r);
    case BoundKind::joint_cell_y1: return bound_joint_cell(in, 0, 1, r);
    case BoundKind::label_freq_p:
    case BoundKind::label_freq_q: return bound_label_freq(in);
    case BoundKind::log_ratio: return bound_log_ratio(in);
  }
  throw std::invalid_argument("unknown bound kind");
}

std::optional<double> BoundRow::stderr_mc() const {
  if (!empirical || !replications || *replications == 0) return std::nullopt;
  const double f = *empirical;
  return std::sqrt(f * (1.0 - f) / static_cast<double>(*replications));
}

bool BoundRow::valid() const {
  if (!empirical) return true;
  return *empirical <= bound.value + 3.0 * stderr_mc().value_or(0.0);
}

namespace {

constexpr std::size_t kKinds = std::size(kAllBoundKinds);

// Exceedance counters indexed [kind][cell][g]; scalar bounds use cell 0.
class ExceedanceCounts {
 public:
  ExceedanceCounts(std::size_t r, std::size_t gs) : r_(r), gs_(gs), hits_(kKinds * r * gs, 0) {}

  void hit(BoundKind kind, std::size_t j, std::size_t gi) { ++hits_[index(kind, j, gi)]; }

  std::uint64_t get(BoundKind kind, std::size_t j, std::size_t gi) const {
    return hits_[index(kind, j, gi)];
  }

  void merge(const ExceedanceCounts& other) {
    for (std::size_t i = 0; i < hits_.size(); ++i) hits_[i] += other.hits_[i];
  }

  /// Max over cells of the hit count (per-cell bounds are uniform in j).
  std::uint64_t max_over_cells(BoundKind kind, std::size_t gi) const {
    std::uint64_t best = 0;
    for (std::size_t j = 0; j < r_; ++j) best = std::max(best, get(kind, j, gi));
    return best;
  }

 private:
  std::size_t index(BoundKind kind, std::size_t j, std::size_t gi) const {
    return (static_cast<std::size_t>(kind) * r_ + j) * gs_ + gi;
  }

  std::size_t r_;
  std::size_t gs_;
  std::vector<std::uint64_t> hits_;
};

void record_events(const CountTable& counts, const PopulationModel& model,
                   const std::vector<double>& g_grid, ExceedanceCounts& out) {
  const std::size_t r = model.size();
  const double n = static_cast<double>(counts.n());
  const auto m = empirical_measures(counts);
  const double dev_p = std::fabs(m.p_n_hat - model.p());
  const double dev_q = std::fabs(static_cast<double>(counts.total0()) / n - model.q());

  for (std::size_t gi = 0; gi < g_grid.size(); ++gi) {
    const double g = g_grid[gi];
    if (dev_p > g) out.hit(BoundKind::label_freq_p, 0, gi);
    if (dev_q > g) out.hit(BoundKind::label_freq_q, 0, gi);
    for (std::size_t j = 0; j < r; ++j) {
      const double pj = model.cond_p()[j];
      const double qj = model.cond_q()[j];
      if (static_cast<double>(counts.n1()[j]) / n - model.p() * pj > g) {
        out.hit(BoundKind::joint_cell_y1, j, gi);
      }
      if (static_cast<double>(counts.n0()[j]) / n - model.q() * qj > g) {
        out.hit(BoundKind::joint_cell_y0, j, gi);
      }
      // An undefined conditional frequency counts as an exceedance.
      if (!m.p_hat || std::fabs((*m.p_hat)[j] - pj) > g) out.hit(BoundKind::conditional_cell_p, j, gi);
      if (!m.q_hat || std::fabs((*m.q_hat)[j] - qj) > g) out.hit(BoundKind::conditional_cell_q, j, gi);
      bool log_exceeds = true;
      if (m.p_hat && m.q_hat && (*m.p_hat)[j] > 0.0 && (*m.q_hat)[j] > 0.0) {
        const double lr = (std::log((*m.p_hat)[j]) - std::log(pj)) -
                          (std::log((*m.q_hat)[j]) - std::log(qj));
        log_exceeds = std::fabs(lr) > g;
      }
      if (log_exceeds) out.hit(BoundKind::log_ratio, j, gi);
    }
  }
}

ExceedanceCounts simulate_exceedances(const PopulationModel& model, std::uint64_t n,
                                      std::size_t n_index, const std::vector<double>& g_grid,
                                      const EmpiricalBudget& budget) {
  const JointSampler sampler(model);
  const unsigned workers = resolve_workers(budget.workers);
  std::vector<ExceedanceCounts> partial(workers, ExceedanceCounts(model.size(), g_grid.size()));
  parallel_blocks(budget.replications, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
    for (std::size_t rep = begin; rep < end; ++rep) {
      Stream stream(budget.master_seed, derive_key({kBoundStreamTag, n_index, rep}));
      record_events(sample_batch(sampler, n, stream), model, g_grid, partial[w]);
    }
  });
  ExceedanceCounts total(model.size(), g_grid.size());
  for (const auto& p : partial) total.merge(p);
  return total;
}

}  // namespace

std::vector<BoundRow> bound_table(const PopulationModel& model,
                                  const std::vector<std::uint64_t>& n_grid,
                                  const std::vector<double>& g_grid,
                                  const std::optional<EmpiricalBudget>& budget) {
  if (n_grid.empty() || g_grid.empty()) throw std::invalid_argument("bound grids must be nonempty");
  const std::size_t r = model.size();
  std::vector<BoundRow> rows;
  rows.reserve(kKinds * n_grid.size() * g_grid.size());
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    std::optional<ExceedanceCounts> hits;
    if (budget && budget->replications > 0) {
      hits = simulate_exceedances(model, n_grid[ni], ni, g_grid, *budget);
    }
    for (std::size_t gi = 0; gi < g_grid.size(); ++gi) {
      const BoundInputs in(model, n_grid[ni], g_grid[gi]);
      for (auto kind : kAllBoundKinds) {
        BoundRow row{kind, n_grid[ni], g_grid[gi], evaluate_bound(kind, in, r), std::nullopt,
                     std::nullopt};
        if (hits) {
          row.empirical = static_cast<double>(hits->max_over_cells(kind, gi)) /
                          static_cast<double>(budget->replications);
          row.replications = budget->replications;
        }
        rows.push_back(row);
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const BoundRow& a, const BoundRow& b) {
    const auto an = to_string(a.kind);
    const auto bn = to_string(b.kind);
    if (an != bn) return an < bn;
    if (a.n != b.n) return a.n < b.n;
    return a.g < b.g;
  });
  return rows;
}

}  // namespace symkl
