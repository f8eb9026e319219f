#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "symkl/model.hpp"

namespace symkl {

/// Scalars the tail bounds depend on. Usually derived from a model, but
/// constructible directly so the formulas can be probed at edge values.
struct BoundParams {
  double p = 0.5;  // P(Y = 1)
  double q = 0.5;  // P(Y = 0)
  double p_min = 0.0, p_max = 0.0;
  double q_min = 0.0, q_max = 0.0;

  static BoundParams from_model(const PopulationModel& model);
};

struct BoundInputs {
  BoundParams params;
  std::uint64_t n = 1;
  double g = 0.0;

  BoundInputs(const PopulationModel& model, std::uint64_t n, double g);
  BoundInputs(const BoundParams& params, std::uint64_t n, double g);
};

struct BoundValue {
  double value = 0.0;
  /// value < 1
  bool informative = false;
};

/// 2 exp(-n g^2 / (2 max(p,q)^2)); bounds P(|p_n_hat - p| > g) and, with the
/// same right-hand side, P(|q_n_hat - q| > g).
BoundValue bound_label_freq(const BoundInputs& in);

/// One-sided bound on (1/n) sum_i (I(X_i=a_j, Y_i=label) - P(Y=label) P(a_j|label)) > g:
///   label 1: 2 exp(-n g^2 / (2 max(p p_max, 1 - p p_min)^2))
///   label 0: 2 exp(-n g^2 / (2 max(q q_max, 1 - q q_min)^2))
/// `j` is a 0-based symbol index; the bound is uniform in j.
BoundValue bound_joint_cell(const BoundInputs& in, std::size_t j, int label, std::size_t r);

/// Four-term bound on max_j P(|p_hat_j - p_j| > g).
BoundValue bound_conditional_cell_p(const BoundInputs& in);
/// Mirror of bound_conditional_cell_p for q_hat.
BoundValue bound_conditional_cell_q(const BoundInputs& in);

/// Twelve-term bound on max_j P(|ln(p_hat_j q_j / (p_j q_hat_j))| > g).
BoundValue bound_log_ratio(const BoundInputs& in);

/// Individual exponential terms of the bounds above, in printed order,
/// each already multiplied by its multiplicity.
std::vector<double> conditional_cell_terms(const BoundParams& bp, std::uint64_t n, double g,
                                           int label);
std::vector<double> log_ratio_terms(const BoundParams& bp, std::uint64_t n, double g);

enum class BoundKind {
  conditional_cell_p,
  conditional_cell_q,
  joint_cell_y0,
  joint_cell_y1,
  label_freq_p,
  label_freq_q,
  log_ratio,
};

inline constexpr BoundKind kAllBoundKinds[] = {
    BoundKind::conditional_cell_p, BoundKind::conditional_cell_q, BoundKind::joint_cell_y0,
    BoundKind::joint_cell_y1,      BoundKind::label_freq_p,       BoundKind::label_freq_q,
    BoundKind::log_ratio,
};

std::string to_string(BoundKind kind);
BoundValue evaluate_bound(BoundKind kind, const BoundInputs& in, std::size_t r);

struct BoundRow {
  BoundKind kind;
  std::uint64_t n = 0;
  double g = 0.0;
  BoundValue bound;
  std::optional<double> empirical;
  std::optional<std::uint64_t> replications;

  /// sqrt(f (1 - f) / M) for the observed frequency f.
  std::optional<double> stderr_mc() const;
  /// empirical <= bound + 3 stderr; true when no empirical column.
  bool valid() const;
};

struct EmpiricalBudget {
  std::uint64_t replications = 0;
  std::uint64_t master_seed = 0;
  unsigned workers = 0;  // 0: hardware concurrency
};

/// Cartesian evaluation over n_grid x g_grid for every BoundKind, rows sorted
/// by (name, n, g). With a budget, each row also carries the Monte Carlo tail
/// frequency of the event the bound controls (max over j for per-cell bounds).
std::vector<BoundRow> bound_table(const PopulationModel& model,
                                  const std::vector<std::uint64_t>& n_grid,
                                  const std::vector<double>& g_grid,
                                  const std::optional<EmpiricalBudget>& budget = std::nullopt);

}  // namespace symkl
