#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace pbx {

/// Probability mass function on {0, ..., n}.
///
/// Construction clamps small negative weights (floating-point cancellation)
/// to zero. If the total mass then differs from one by more than 1e-13 the
/// weights are renormalised and `quality_warning()` is set.
class Pmf {
 public:
  /// Dirac mass at 0.
  Pmf() : weights_{1.0} {}
  explicit Pmf(std::vector<double> weights);

  std::size_t n() const { return weights_.size() - 1; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t x) const { return weights_[x]; }
  const std::vector<double>& weights() const { return weights_; }
  bool quality_warning() const { return quality_warning_; }

  /// Pmf of the sum of independent variables with laws *this and other.
  Pmf convolve(const Pmf& other) const;

  /// Pmf shifted up by k, i.e. the law of X + k.
  Pmf shifted(std::size_t k) const;

  /// Pmf on the larger support {0, ..., n} padded with zero weights.
  Pmf embedded(std::size_t n) const;

 private:
  std::vector<double> weights_;
  bool quality_warning_ = false;
};

/// Success probabilities p in [0,1]^n of a Bernoulli convolution.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> p);
  ParamVector(std::initializer_list<double> p) : ParamVector(std::vector<double>(p)) {}

  std::size_t size() const { return p_.size(); }
  bool empty() const { return p_.empty(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& values() const { return p_; }
  std::span<const double> span() const { return p_; }

  /// Concatenation p ⊕ s.
  ParamVector concat(const ParamVector& other) const;

 private:
  std::vector<double> p_;
};

/// One block of a structured extremal candidate: `size` factors sharing the
/// interior success probability `q`.
struct Block {
  int size = 0;
  double q = 0.0;

  friend bool operator==(const Block&, const Block&) = default;
};

/// Shifted convolution of binomials, delta_{ones} * B_{n_1,q_1} * ... * B_{n_k,q_k},
/// together with the number of factors with success probability zero.
struct ExtremalCandidate {
  int ones = 0;
  int zeros = 0;
  std::vector<Block> blocks;

  /// Number of distinct interior values.
  int interior_count() const { return static_cast<int>(blocks.size()); }
  /// Total number of Bernoulli factors represented.
  int total_factors() const;
  /// Expanded parameter vector (ones, zeros and every block repeated).
  ParamVector expand() const;

  friend bool operator==(const ExtremalCandidate&, const ExtremalCandidate&) = default;
};

Pmf bernoulli_pmf(double p);
Pmf bc_pmf(const ParamVector& p);
Pmf binomial_pmf(int n, double p);
Pmf candidate_pmf(const ExtremalCandidate& cand, int n);

/// Integral of g with respect to pmf; g must have pmf.size() entries.
double expectation(const Pmf& pmf, std::span<const double> g);

}  // namespace pbx
