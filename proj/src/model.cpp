#include "symkl/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace symkl {

namespace {

// Neumaier summation in extended precision; divergences feed sqrt(n)-scaled
// errors where 1e-10 absolute slop is visible.
class ExtendedSum {
 public:
  void add(long double v) noexcept {
    const long double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      compensation_ += (sum_ - t) + v;
    } else {
      compensation_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  long double value() const noexcept { return sum_ + compensation_; }

 private:
  long double sum_ = 0.0L;
  long double compensation_ = 0.0L;
};

void require_positive_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ModelError("dimension mismatch: " + std::to_string(p.size()) + " vs " +
                     std::to_string(q.size()));
  }
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(p[j] >= kPositiveEpsilon) || !(q[j] >= kPositiveEpsilon)) {
      throw ModelError("non-positive entry at index " + std::to_string(j));
    }
  }
}

double clamp_nonnegative(long double v) {
  if (v < 0.0L && v >= -static_cast<long double>(kSimplexTolerance)) return 0.0;
  return static_cast<double>(v);
}

}  // namespace

Alphabet::Alphabet(std::size_t size) : size_(size) {
  if (size < 2) throw ModelError("alphabet needs at least 2 symbols");
}

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) throw ModelError("probability vector needs at least 2 entries");
  ExtendedSum total;
  for (double v : probs_) {
    if (!std::isfinite(v) || v < 0.0) throw ModelError("negative or non-finite probability");
    total.add(v);
  }
  if (std::fabs(total.value() - 1.0L) > kSimplexTolerance) {
    throw ModelError("probabilities do not sum to 1");
  }
}

double ProbVector::min() const noexcept { return *std::min_element(probs_.begin(), probs_.end()); }
double ProbVector::max() const noexcept { return *std::max_element(probs_.begin(), probs_.end()); }

PopulationModel::PopulationModel(double label_prob, ProbVector cond_p, ProbVector cond_q)
    : alphabet_(cond_p.size()),
      label_prob_(label_prob),
      cond_p_(std::move(cond_p)),
      cond_q_(std::move(cond_q)) {
  if (!(label_prob_ > 0.0 && label_prob_ < 1.0)) {
    throw ModelError("label probability must lie strictly inside (0, 1)");
  }
  if (cond_p_.size() != cond_q_.size()) throw ModelError("conditional dimension mismatch");
  if (!cond_p_.strictly_positive() || !cond_q_.strictly_positive()) {
    throw ModelError("conditional distributions must be strictly positive");
  }
}

CountTable::CountTable(std::vector<std::uint64_t> n1, std::vector<std::uint64_t> n0)
    : n1_(std::move(n1)), n0_(std::move(n0)) {
  if (n1_.size() != n0_.size()) throw ModelError("count rows differ in length");
  if (n1_.size() < 2) throw ModelError("count table needs at least 2 columns");
  for (auto c : n1_) total1_ += c;
  for (auto c : n0_) total0_ += c;
}

void CountTable::add(const LabeledSample& s) {
  if (s.x >= n1_.size() || (s.y != 0 && s.y != 1)) throw ModelError("sample out of range");
  if (s.y == 1) {
    ++n1_[s.x];
    ++total1_;
  } else {
    ++n0_[s.x];
    ++total0_;
  }
}

void CompensatedSum::add(double v) noexcept {
  const double t = sum_ + v;
  if (std::fabs(sum_) >= std::fabs(v)) {
    compensation_ += (sum_ - t) + v;
  } else {
    compensation_ += (v - t) + sum_;
  }
  sum_ = t;
}

double kl_divergence(const ProbVector& p, const ProbVector& q) {
  require_positive_pair(p.values(), q.values());
  ExtendedSum acc;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const long double pj = p[j];
    acc.add(pj * (std::log(pj) - std::log(static_cast<long double>(q[j]))));
  }
  return clamp_nonnegative(acc.value());
}

double sym_kl_divergence(std::span<const double> p, std::span<const double> q) {
  require_positive_pair(p, q);
  ExtendedSum acc;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const long double pj = p[j];
    const long double qj = q[j];
    // (p - q)(ln p - ln q) is invariant under swapping p and q bit for bit.
    acc.add((pj - qj) * (std::log(pj) - std::log(qj)));
  }
  return clamp_nonnegative(acc.value());
}

double sym_kl_divergence(const ProbVector& p, const ProbVector& q) {
  return sym_kl_divergence(p.values(), q.values());
}

JointSampler::JointSampler(const PopulationModel& model) : r_(model.size()) {
  const std::size_t k = 2 * r_;
  std::vector<double> scaled(k);
  for (std::size_t j = 0; j < r_; ++j) {
    scaled[j] = model.p() * model.cond_p()[j] * static_cast<double>(k);
    scaled[r_ + j] = model.q() * model.cond_q()[j] * static_cast<double>(k);
  }
  threshold_.assign(k, 1.0);
  alias_.resize(k);
  for (std::size_t i = 0; i < k; ++i) alias_[i] = i;

  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t i = 0; i < k; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : small) threshold_[i] = 1.0;
  for (auto i : large) threshold_[i] = 1.0;
}

CountTable sample_batch(const JointSampler& sampler, std::uint64_t n, Stream& stream) {
  if (n == 0) throw ModelError("sample size must be at least 1");
  const std::size_t r = sampler.alphabet_size();
  std::vector<std::uint64_t> n1(r, 0);
  std::vector<std::uint64_t> n0(r, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto s = sampler.draw(stream);
    ++(s.y == 1 ? n1 : n0)[s.x];
  }
  return CountTable(std::move(n1), std::move(n0));
}

CountTable sample_batch(const PopulationModel& model, std::uint64_t n, Stream& stream) {
  return sample_batch(JointSampler(model), n, stream);
}

}  // namespace symkl
