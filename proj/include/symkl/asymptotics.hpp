#pragma once

#include <vector>

#include "symkl/estimator.hpp"
#include "symkl/model.hpp"

namespace symkl {

/// Coefficients of the first-order expansion of the Jeffreys divergence:
///   b_j = 1 + ln(p_j/q_j) - q_j/p_j
///   c_j = 1 + ln(q_j/p_j) - p_j/q_j
struct InfluenceCoefficients {
  std::vector<double> b;
  std::vector<double> c;
};

InfluenceCoefficients influence_coefficients(const ProbVector& p, const ProbVector& q);

/// Single-observation influence W(x, y) whose variance is the asymptotic
/// variance of sqrt(n) * eta_n. `x` is a 0-based symbol index, `y` in {0,1}.
double influence_value(const PopulationModel& model, const InfluenceCoefficients& coeffs,
                       std::size_t x, int y);

struct VarianceResult {
  double sigma2 = 0.0;
  /// E[W] under the model; zero up to rounding.
  double mean_check = 0.0;
};

/// Var(W) by enumerating the 2r outcomes of (X, Y).
VarianceResult exact_sigma2(const PopulationModel& model);

/// exact_sigma2 evaluated at the empirical model. Throws DegenerateEstimate
/// when a label class or a cell is empty.
VarianceResult plugin_sigma2(const CountTable& counts);

/// Empirical model (p_n_hat, p_hat, q_hat) of a non-degenerate count table.
PopulationModel empirical_model(const CountTable& counts);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  std::uint64_t n = 0;
  /// Set when sigma2 == 0 and the interval collapsed to a point.
  bool degenerate_variance = false;

  bool contains(double v) const noexcept { return lower <= v && v <= upper; }
};

/// estimate +/- z_{(1+level)/2} sqrt(sigma2 / n).
ConfidenceInterval confidence_interval(const EstimateResult& estimate, const VarianceResult& var,
                                       double level);

}  // namespace symkl
