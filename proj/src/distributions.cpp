#include "pbx/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pbx/errors.hpp"

namespace pbx {

namespace {

constexpr double kClampTol = 1e-15;
constexpr double kRenormTol = 1e-13;
// Anything beyond this is not rounding noise but an invalid input vector.
constexpr double kRejectTol = 1e-9;

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError(std::string(what) + ": success probability " + std::to_string(p) +
                      " outside [0,1]");
  }
}

}  // namespace

Pmf::Pmf(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw DomainError("Pmf: empty weight vector");
  double total = 0.0;
  for (double& w : weights_) {
    if (std::isnan(w) || w < -kRejectTol) throw DomainError("Pmf: negative or NaN weight");
    if (w < 0.0) {
      if (w < -kClampTol) quality_warning_ = true;
      w = 0.0;
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kRejectTol) {
    throw DomainError("Pmf: weights sum to " + std::to_string(total));
  }
  if (std::abs(total - 1.0) > kRenormTol) {
    quality_warning_ = true;
    for (double& w : weights_) w /= total;
  }
}

Pmf Pmf::convolve(const Pmf& other) const {
  std::vector<double> out(weights_.size() + other.weights_.size() - 1, 0.0);
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    for (std::size_t j = 0; j < other.weights_.size(); ++j) {
      out[i + j] += weights_[i] * other.weights_[j];
    }
  }
  return Pmf(std::move(out));
}

Pmf Pmf::shifted(std::size_t k) const {
  std::vector<double> out(k, 0.0);
  out.insert(out.end(), weights_.begin(), weights_.end());
  return Pmf(std::move(out));
}

Pmf Pmf::embedded(std::size_t n) const {
  if (n < this->n()) throw DomainError("Pmf::embedded: target support too small");
  std::vector<double> out = weights_;
  out.resize(n + 1, 0.0);
  return Pmf(std::move(out));
}

ParamVector::ParamVector(std::vector<double> p) : p_(std::move(p)) {
  for (double v : p_) check_probability(v, "ParamVector");
}

ParamVector ParamVector::concat(const ParamVector& other) const {
  std::vector<double> out = p_;
  out.insert(out.end(), other.p_.begin(), other.p_.end());
  return ParamVector(std::move(out));
}

int ExtremalCandidate::total_factors() const {
  int total = ones + zeros;
  for (const Block& b : blocks) total += b.size;
  return total;
}

ParamVector ExtremalCandidate::expand() const {
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(std::max(total_factors(), 0)));
  p.insert(p.end(), static_cast<std::size_t>(ones), 1.0);
  p.insert(p.end(), static_cast<std::size_t>(zeros), 0.0);
  for (const Block& b : blocks) p.insert(p.end(), static_cast<std::size_t>(b.size), b.q);
  return ParamVector(std::move(p));
}

Pmf bernoulli_pmf(double p) {
  check_probability(p, "bernoulli_pmf");
  return Pmf({1.0 - p, p});
}

Pmf bc_pmf(const ParamVector& p) {
  // Sorting first makes the result independent of the order of p bit for bit.
  std::vector<double> sorted = p.values();
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> w(sorted.size() + 1, 0.0);
  w[0] = 1.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double pi = sorted[i];
    const double qi = 1.0 - pi;
    for (std::size_t k = i + 1; k >= 1; --k) w[k] = w[k] * qi + w[k - 1] * pi;
    w[0] *= qi;
  }
  return Pmf(std::move(w));
}

Pmf binomial_pmf(int n, double p) {
  if (n < 0) throw DomainError("binomial_pmf: negative n");
  check_probability(p, "binomial_pmf");
  return bc_pmf(ParamVector(std::vector<double>(static_cast<std::size_t>(n), p)));
}

Pmf candidate_pmf(const ExtremalCandidate& cand, int n) {
  if (cand.ones < 0 || cand.zeros < 0) throw DomainError("candidate_pmf: negative counts");
  for (const Block& b : cand.blocks) {
    if (b.size <= 0) throw DomainError("candidate_pmf: block of non-positive size");
    if (!(b.q > 0.0 && b.q < 1.0)) throw DomainError("candidate_pmf: block value not interior");
  }
  if (cand.total_factors() != n) {
    throw DomainError("candidate_pmf: block sizes sum to " + std::to_string(cand.total_factors()) +
                      ", expected " + std::to_string(n));
  }
  return bc_pmf(cand.expand());
}

double expectation(const Pmf& pmf, std::span<const double> g) {
  if (g.size() != pmf.size()) {
    throw DomainError("expectation: payoff has " + std::to_string(g.size()) +
                      " entries, pmf support has " + std::to_string(pmf.size()));
  }
  double total = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) total += pmf[x] * g[x];
  return total;
}

}  // namespace pbx
