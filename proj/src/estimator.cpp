#include "symkl/estimator.hpp"

#include <string>

namespace symkl {

namespace {

std::optional<std::vector<double>> frequencies(std::span<const std::uint64_t> row,
                                               std::uint64_t total) {
  if (total == 0) return std::nullopt;
  std::vector<double> out(row.size());
  const auto denom = static_cast<double>(total);
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = static_cast<double>(row[j]) / denom;
  return out;
}

}  // namespace

EmpiricalMeasures empirical_measures(const CountTable& counts) {
  EmpiricalMeasures m;
  m.n = counts.n();
  m.p_hat = frequencies(counts.n1(), counts.total1());
  m.q_hat = frequencies(counts.n0(), counts.total0());
  if (m.n > 0) {
    m.p_n_hat = static_cast<double>(counts.total1()) / static_cast<double>(m.n);
    m.q_n_hat = 1.0 - m.p_n_hat;
  }
  return m;
}

std::string_view to_string(Degeneracy d) noexcept {
  switch (d) {
    case Degeneracy::none: return "none";
    case Degeneracy::empty_label_one: return "empty label class Y=1";
    case Degeneracy::empty_label_zero: return "empty label class Y=0";
    case Degeneracy::zero_cell: return "zero empirical cell";
  }
  return "unknown";
}

EstimateResult plug_in_estimate(const CountTable& counts) {
  EstimateResult result;
  result.n = counts.n();
  if (counts.total1() == 0) {
    result.degeneracy = Degeneracy::empty_label_one;
    return result;
  }
  if (counts.total0() == 0) {
    result.degeneracy = Degeneracy::empty_label_zero;
    return result;
  }
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts.n1()[j] == 0 || counts.n0()[j] == 0) {
      result.degeneracy = Degeneracy::zero_cell;
      return result;
    }
  }
  const auto m = empirical_measures(counts);
  result.value = sym_kl_divergence(*m.p_hat, *m.q_hat);
  return result;
}

DegenerateEstimate::DegenerateEstimate(Degeneracy reason)
    : std::runtime_error("degenerate estimate: " + std::string(to_string(reason))),
      reason_(reason) {}

double estimation_error(const CountTable& counts, const PopulationModel& model) {
  if (counts.size() != model.size()) throw ModelError("count table and model differ in size");
  const auto est = plug_in_estimate(counts);
  if (est.degenerate()) throw DegenerateEstimate(est.degeneracy);
  return *est.value - sym_kl_divergence(model.cond_p(), model.cond_q());
}

}  // namespace symkl
