#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "symkl/model.hpp"

namespace symkl::testing {

/// Uniform-ish random point on the r-simplex: normalized exponentials,
/// rejected until every entry is at least `floor`.
inline ProbVector random_simplex(std::size_t r, std::mt19937_64& rng, double floor = 1e-3) {
  std::exponential_distribution<double> expo(1.0);
  while (true) {
    std::vector<double> v(r);
    double total = 0.0;
    for (auto& x : v) total += (x = expo(rng));
    double lo = 1.0;
    for (auto& x : v) lo = std::min(lo, x /= total);
    if (lo >= floor) return ProbVector(std::move(v));
  }
}

inline PopulationModel random_model(std::size_t r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> label(0.1, 0.9);
  const double p = label(rng);
  auto cp = random_simplex(r, rng);
  auto cq = random_simplex(r, rng);
  return PopulationModel(p, std::move(cp), std::move(cq));
}

inline PopulationModel reference_model() {
  return PopulationModel(0.5, ProbVector({0.5, 0.5}), ProbVector({0.25, 0.75}));
}

}  // namespace symkl::testing
