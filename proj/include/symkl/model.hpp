#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "symkl/rng.hpp"

namespace symkl {

/// Entries at or above this value count as strictly positive.
inline constexpr double kPositiveEpsilon = 1e-12;
/// Allowed absolute deviation of a probability vector's sum from 1.
inline constexpr double kSimplexTolerance = 1e-12;

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Finite alphabet {a_1, ..., a_r} with r >= 2.
class Alphabet {
 public:
  explicit Alphabet(std::size_t size);
  std::size_t size() const noexcept { return size_; }
  bool operator==(const Alphabet&) const = default;

 private:
  std::size_t size_;
};

/// A point on the probability simplex.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t j) const { return probs_[j]; }
  std::span<const double> values() const noexcept { return probs_; }

  double min() const noexcept;
  double max() const noexcept;
  bool strictly_positive() const noexcept { return min() >= kPositiveEpsilon; }

  bool operator==(const ProbVector&) const = default;

 private:
  std::vector<double> probs_;
};

/// Generative model of (X, Y): Y ~ Bernoulli(label_prob), X | Y=1 ~ cond_p,
/// X | Y=0 ~ cond_q. Both conditionals must be strictly positive.
class PopulationModel {
 public:
  PopulationModel(double label_prob, ProbVector cond_p, ProbVector cond_q);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return alphabet_.size(); }
  /// P(Y = 1).
  double p() const noexcept { return label_prob_; }
  /// P(Y = 0); always derived as 1 - p().
  double q() const noexcept { return 1.0 - label_prob_; }
  const ProbVector& cond_p() const noexcept { return cond_p_; }
  const ProbVector& cond_q() const noexcept { return cond_q_; }

  bool operator==(const PopulationModel&) const = default;

 private:
  Alphabet alphabet_;
  double label_prob_;
  ProbVector cond_p_;
  ProbVector cond_q_;
};

/// One labeled observation; x is a 0-based symbol index.
struct LabeledSample {
  std::size_t x;
  int y;
};

/// Joint counts of (X = a_j, Y = y). n1 holds the Y=1 row, n0 the Y=0 row.
class CountTable {
 public:
  CountTable(std::vector<std::uint64_t> n1, std::vector<std::uint64_t> n0);

  std::size_t size() const noexcept { return n1_.size(); }
  std::span<const std::uint64_t> n1() const noexcept { return n1_; }
  std::span<const std::uint64_t> n0() const noexcept { return n0_; }
  std::uint64_t total1() const noexcept { return total1_; }
  std::uint64_t total0() const noexcept { return total0_; }
  std::uint64_t n() const noexcept { return total1_ + total0_; }

  void add(const LabeledSample& s);

  bool operator==(const CountTable&) const = default;

 private:
  std::vector<std::uint64_t> n1_;
  std::vector<std::uint64_t> n0_;
  std::uint64_t total1_ = 0;
  std::uint64_t total0_ = 0;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// D_KL(p || q) = sum_j p_j ln(p_j / q_j).
double kl_divergence(const ProbVector& p, const ProbVector& q);

/// Jeffreys divergence sum_j (p_j - q_j) ln(p_j / q_j).
double sym_kl_divergence(const ProbVector& p, const ProbVector& q);

/// Same as sym_kl_divergence on raw spans; entries must be strictly positive.
double sym_kl_divergence(std::span<const double> p, std::span<const double> q);

/// Vose alias table over the 2r joint outcomes (a_j, 1) and (a_j, 0).
/// Draws one 53-bit uniform per sample.
class JointSampler {
 public:
  explicit JointSampler(const PopulationModel& model);

  LabeledSample draw(Stream& stream) const noexcept {
    const double u = stream.next_double() * static_cast<double>(threshold_.size());
    auto cell = static_cast<std::size_t>(u);
    if (cell >= threshold_.size()) cell = threshold_.size() - 1;
    if (u - static_cast<double>(cell) >= threshold_[cell]) cell = alias_[cell];
    return outcome(cell);
  }

  std::size_t alphabet_size() const noexcept { return r_; }

 private:
  LabeledSample outcome(std::size_t cell) const noexcept {
    return cell < r_ ? LabeledSample{cell, 1} : LabeledSample{cell - r_, 0};
  }

  std::size_t r_;
  std::vector<double> threshold_;
  std::vector<std::size_t> alias_;
};

/// Draws n i.i.d. labeled samples and returns their counts.
CountTable sample_batch(const PopulationModel& model, std::uint64_t n, Stream& stream);
CountTable sample_batch(const JointSampler& sampler, std::uint64_t n, Stream& stream);

}  // namespace symkl
