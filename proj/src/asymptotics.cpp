#include "symkl/asymptotics.hpp"

#include <cmath>

#include "symkl/normal.hpp"

namespace symkl {

InfluenceCoefficients influence_coefficients(const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) throw ModelError("dimension mismatch");
  if (!p.strictly_positive() || !q.strictly_positive()) throw ModelError("non-positive entry");
  InfluenceCoefficients out;
  out.b.resize(p.size());
  out.c.resize(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double log_ratio = std::log(p[j]) - std::log(q[j]);
    out.b[j] = 1.0 + log_ratio - q[j] / p[j];
    out.c[j] = 1.0 - log_ratio - p[j] / q[j];
  }
  return out;
}

double influence_value(const PopulationModel& model, const InfluenceCoefficients& coeffs,
                       std::size_t x, int y) {
  const std::size_t r = model.size();
  if (coeffs.b.size() != r || coeffs.c.size() != r) throw ModelError("coefficient size mismatch");
  if (x >= r || (y != 0 && y != 1)) throw ModelError("outcome out of range");
  const double p = model.p();
  const double q = model.q();
  const double y1 = y == 1 ? 1.0 : 0.0;
  const double y0 = 1.0 - y1;
  long double total = 0.0L;
  for (std::size_t j = 0; j < r; ++j) {
    const double pj = model.cond_p()[j];
    const double qj = model.cond_q()[j];
    const double hit1 = (x == j && y == 1) ? 1.0 : 0.0;
    const double hit0 = (x == j && y == 0) ? 1.0 : 0.0;
    const long double p_term = (hit1 - p * pj) / p - pj * (y1 - p);
    const long double q_term = (hit0 - q * qj) / q - qj * (y0 - q);
    total += p_term * coeffs.b[j] + q_term * coeffs.c[j];
  }
  return static_cast<double>(total);
}

VarianceResult exact_sigma2(const PopulationModel& model) {
  const auto coeffs = influence_coefficients(model.cond_p(), model.cond_q());
  long double mean = 0.0L;
  long double second = 0.0L;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const long double w1 = influence_value(model, coeffs, k, 1);
    const long double w0 = influence_value(model, coeffs, k, 0);
    const long double pr1 = static_cast<long double>(model.p()) * model.cond_p()[k];
    const long double pr0 = static_cast<long double>(model.q()) * model.cond_q()[k];
    mean += pr1 * w1 + pr0 * w0;
    second += pr1 * w1 * w1 + pr0 * w0 * w0;
  }
  const long double var = second - mean * mean;
  return {static_cast<double>(var > 0.0L ? var : 0.0L), static_cast<double>(mean)};
}

PopulationModel empirical_model(const CountTable& counts) {
  const auto est = plug_in_estimate(counts);
  if (est.degenerate()) throw DegenerateEstimate(est.degeneracy);
  const auto m = empirical_measures(counts);
  return PopulationModel(m.p_n_hat, ProbVector(*m.p_hat), ProbVector(*m.q_hat));
}

VarianceResult plugin_sigma2(const CountTable& counts) {
  return exact_sigma2(empirical_model(counts));
}

ConfidenceInterval confidence_interval(const EstimateResult& estimate, const VarianceResult& var,
                                       double level) {
  if (estimate.degenerate()) throw DegenerateEstimate(estimate.degeneracy);
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  if (estimate.n == 0) throw std::invalid_argument("estimate has zero sample size");
  if (!(var.sigma2 >= 0.0)) throw std::invalid_argument("negative variance");
  ConfidenceInterval ci;
  ci.level = level;
  ci.n = estimate.n;
  const double center = *estimate.value;
  if (var.sigma2 == 0.0) {
    ci.lower = ci.upper = center;
    ci.degenerate_variance = true;
    return ci;
  }
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double half = z * std::sqrt(var.sigma2 / static_cast<double>(estimate.n));
  ci.lower = center - half;
  ci.upper = center + half;
  return ci;
}

}  // namespace symkl
