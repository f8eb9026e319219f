#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "symkl/model.hpp"

namespace symkl {

/// Within-class cell frequencies and label frequencies of a CountTable.
/// A conditional vector is absent when its label class is empty.
struct EmpiricalMeasures {
  std::optional<std::vector<double>> p_hat;
  std::optional<std::vector<double>> q_hat;
  double p_n_hat = 0.0;
  double q_n_hat = 0.0;
  std::uint64_t n = 0;
};

EmpiricalMeasures empirical_measures(const CountTable& counts);

enum class Degeneracy {
  none,
  empty_label_one,
  empty_label_zero,
  zero_cell,
};

std::string_view to_string(Degeneracy d) noexcept;

/// Plug-in symmetric KL estimate; value is set iff degeneracy is none.
struct EstimateResult {
  std::optional<double> value;
  Degeneracy degeneracy = Degeneracy::none;
  std::uint64_t n = 0;

  bool degenerate() const noexcept { return degeneracy != Degeneracy::none; }
};

EstimateResult plug_in_estimate(const CountTable& counts);

class DegenerateEstimate : public std::runtime_error {
 public:
  explicit DegenerateEstimate(Degeneracy reason);
  Degeneracy reason() const noexcept { return reason_; }

 private:
  Degeneracy reason_;
};

/// eta_n: plug-in estimate minus the population divergence.
/// Throws DegenerateEstimate when the estimate is undefined.
double estimation_error(const CountTable& counts, const PopulationModel& model);

}  // namespace symkl
