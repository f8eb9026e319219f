#include <cmath>
#include <random>

#include "doctest.h"
#include "symkl/bounds.hpp"
#include "test_support.hpp"

using namespace symkl;
using symkl::testing::reference_model;

namespace {

// Independent re-implementation of the four printed terms of the
// conditional-cell bound for the Y=1 side.
long double conditional_p_oracle(long double p, long double q, long double pmin, long double pmax,
                                 long double n, long double g) {
  const long double m = std::max(p, q);
  const long double h = std::max(p * pmax, 1.0L - p * pmin);
  return 2.0L * std::exp(-n * g * g * p * p / (std::pow(2.0L, 7) * m * m * pmax * pmax)) +
         2.0L * std::exp(-n * g * g * p * p / (8.0L * h * h)) +
         std::exp(-n * p * p * pmin * pmin / (2.0L * h * h)) + std::exp(-n * p * p / (8.0L * m * m));
}

const std::vector<double> kG{0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
const std::vector<std::uint64_t> kN{1, 10, 100, 1000, 10000, 100000};

}  // namespace

TEST_CASE("label frequency bound") {
  const auto m = reference_model();
  const auto v = bound_label_freq(BoundInputs(m, 100, 0.1));
  CHECK(std::fabs(v.value - 2.0 * std::exp(-2.0)) < 1e-15);
  CHECK(v.informative);
  CHECK(bound_label_freq(BoundInputs(m, 200, 0.1)).value < v.value);
  CHECK(bound_label_freq(BoundInputs(m, 100, 100.0)).value == 0.0);
  CHECK_THROWS(BoundInputs(m, 0, 0.1));
  CHECK_THROWS(BoundInputs(m, 10, 0.0));
}

TEST_CASE("joint cell bound") {
  SUBCASE("single-cell thought experiment reduces to 2 exp(-n g^2 / 2)") {
    const BoundParams bp{1.0, 0.0, 1.0, 1.0, 1.0, 1.0};
    const auto v = bound_joint_cell(BoundInputs(bp, 50, 0.2), 0, 1, 2);
    CHECK(std::fabs(v.value - 2.0 * std::exp(-50 * 0.04 / 2.0)) < 1e-15);
  }
  SUBCASE("reference model") {
    const auto m = reference_model();
    const auto v = bound_joint_cell(BoundInputs(m, 100, 0.1), 1, 1, 2);
    // 2 exp(-1 / (2 * 0.75^2))
    CHECK(std::fabs(v.value - 0.82222458101437487) < 1e-14);
    CHECK(bound_joint_cell(BoundInputs(m, 100, 0.2), 1, 1, 2).value < v.value);
    CHECK_THROWS(bound_joint_cell(BoundInputs(m, 100, 0.1), 2, 1, 2));
    CHECK_THROWS(bound_joint_cell(BoundInputs(m, 100, 0.1), 0, 2, 2));
  }
}

TEST_CASE("conditional cell bounds") {
  const PopulationModel flat(0.5, ProbVector({0.5, 0.5}), ProbVector({0.5, 0.5}));
  const auto v = bound_conditional_cell_p(BoundInputs(flat, 10000, 0.2));
  CHECK(std::fabs(v.value - 7.45375307044458e-6) < 1e-18);
  CHECK(std::fabs(v.value - static_cast<double>(conditional_p_oracle(0.5, 0.5, 0.5, 0.5, 1e4, 0.2))) <
        1e-18);
  CHECK(bound_conditional_cell_q(BoundInputs(flat, 10000, 0.2)).value == v.value);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto m = symkl::testing::random_model(2 + t % 6, rng);
    const auto bp = BoundParams::from_model(m);
    for (auto n : kN) {
      for (auto g : kG) {
        const double lib = bound_conditional_cell_p(BoundInputs(m, n, g)).value;
        const long double ref = conditional_p_oracle(bp.p, bp.q, bp.p_min, bp.p_max, n, g);
        REQUIRE(std::fabs(lib - static_cast<double>(ref)) <= 1e-13 * std::max(1.0, lib));
      }
    }
  }
}

TEST_CASE("g-dependent terms shrink as g grows from zero") {
  const auto bp = BoundParams::from_model(reference_model());
  for (int label : {0, 1}) {
    const auto at_small = conditional_cell_terms(bp, 1000, 1e-9, label);
    const auto at_g = conditional_cell_terms(bp, 1000, 0.1, label);
    CHECK(at_g[0] < at_small[0]);
    CHECK(at_g[1] < at_small[1]);
    CHECK(at_g[2] == at_small[2]);
    CHECK(at_g[3] == at_small[3]);
  }
}

TEST_CASE("log ratio bound") {
  const auto terms = log_ratio_terms(BoundParams::from_model(reference_model()), 10000, 0.5);
  REQUIRE(terms.size() == 12);
  double total = 0.0;
  for (double t : terms) total += t;
  CHECK(std::fabs(total - 8.046154296018186) < 1e-12);
  CHECK_FALSE(bound_log_ratio(BoundInputs(reference_model(), 10000, 0.5)).informative);

  const PopulationModel sym(0.5, ProbVector({0.2, 0.8}), ProbVector({0.2, 0.8}));
  const auto st = log_ratio_terms(BoundParams::from_model(sym), 5000, 0.3);
  for (std::size_t i = 0; i < 6; ++i) CHECK(st[i] == st[i + 6]);
}

TEST_CASE("property: every bound is nonincreasing in g and in n") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const auto m = symkl::testing::random_model(2 + t % 5, rng);
    for (auto kind : kAllBoundKinds) {
      for (std::size_t ni = 0; ni < kN.size(); ++ni) {
        for (std::size_t gi = 0; gi < kG.size(); ++gi) {
          const double v = evaluate_bound(kind, BoundInputs(m, kN[ni], kG[gi]), m.size()).value;
          REQUIRE(std::isfinite(v));
          REQUIRE(v >= 0.0);
          if (gi > 0) REQUIRE(v <= evaluate_bound(kind, BoundInputs(m, kN[ni], kG[gi - 1]), m.size()).value);
          if (ni > 0) REQUIRE(v <= evaluate_bound(kind, BoundInputs(m, kN[ni - 1], kG[gi]), m.size()).value);
        }
      }
    }
  }
}

TEST_CASE("vacuous bounds stay finite") {
  const auto v = bound_conditional_cell_p(BoundInputs(reference_model(), 3, 1.5));
  CHECK(std::isfinite(v.value));
  CHECK_FALSE(v.informative);
}

TEST_CASE("bound table without budget") {
  const auto rows = bound_table(reference_model(), {1000, 100}, {0.2, 0.1});
  CHECK(rows.size() == std::size(kAllBoundKinds) * 4);
  for (const auto& r : rows) {
    CHECK_FALSE(r.empirical);
    CHECK(r.valid());
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto a = to_string(rows[i - 1].kind);
    const auto b = to_string(rows[i].kind);
    const bool ordered = a < b || (a == b && (rows[i - 1].n < rows[i].n ||
                                              (rows[i - 1].n == rows[i].n && rows[i - 1].g < rows[i].g)));
    REQUIRE(ordered);
  }
  CHECK_THROWS(bound_table(reference_model(), {}, {0.1}));
  CHECK_THROWS(bound_table(reference_model(), {10}, {}));
}

TEST_CASE("bound table with a small empirical budget") {
  const auto rows =
      bound_table(reference_model(), {100, 1000}, {0.05, 0.1, 0.2}, EmpiricalBudget{20000, 3, 2});
  for (const auto& r : rows) {
    REQUIRE(r.empirical);
    CHECK(*r.empirical >= 0.0);
    CHECK(*r.empirical <= 1.0);
    CHECK_MESSAGE(r.valid(), to_string(r.kind), " n=", r.n, " g=", r.g, " emp=", *r.empirical,
                  " bound=", r.bound.value);
  }
  const auto again =
      bound_table(reference_model(), {100, 1000}, {0.05, 0.1, 0.2}, EmpiricalBudget{20000, 3, 1});
  REQUIRE(again.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(*again[i].empirical == *rows[i].empirical);
}
