#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbx/distributions.hpp"

namespace pbx {

/// Default cap on the number of prescribed cumulants. The diagonal of the
/// coefficient table grows like (r-1)!, which degrades the conditioning of the
/// cumulant <-> power-sum maps quickly beyond this.
inline constexpr int kDefaultMaxOrder = 8;

/// Integer coefficients a[r][l], 1 <= l <= r, with
///   kappa_r(B_p) = sum_l a[r][l] p^l.
class CumulantCoeffTable {
 public:
  explicit CumulantCoeffTable(int r_max);

  int r_max() const { return static_cast<int>(rows_.size()); }
  /// Coefficient a_{r,l} (1-based on both indices).
  std::int64_t coeff(int r, int l) const { return rows_[r - 1][l - 1]; }
  /// Row r as {a_{r,1}, ..., a_{r,r}}.
  const std::vector<std::int64_t>& row(int r) const { return rows_[r - 1]; }

  /// kappa_r(B_p) evaluated from row r.
  double evaluate(int r, double p) const;

 private:
  std::vector<std::vector<std::int64_t>> rows_;
};

/// Process-wide read-only table large enough for every supported order.
const CumulantCoeffTable& shared_coeff_table();

CumulantCoeffTable bernoulli_cumulant_coeffs(int r_max);

/// (kappa_1(B_p), ..., kappa_r(B_p)).
std::vector<double> bernoulli_cumulants(double p, int r);

/// Raw moments (mu_1, ..., mu_r) from cumulants (kappa_1, ..., kappa_r).
std::vector<double> moments_from_cumulants(std::span<const double> kappa);
/// Inverse of moments_from_cumulants.
std::vector<double> cumulants_from_moments(std::span<const double> mu);

/// Raw moments (mu_1, ..., mu_r) of a pmf on {0, ..., n}.
std::vector<double> pmf_moments(const Pmf& pmf, int r);

/// (S_1(x), ..., S_r(x)) with S_l(x) = sum_i x_i^l.
std::vector<double> power_sums(std::span<const double> x, int r);

/// (E_0(x), ..., E_n(x)), n = x.size().
std::vector<double> elementary_symmetric(std::span<const double> x);

/// (E_1, ..., E_n) from power sums (S_1, ..., S_n, ...) by the Newton identities.
std::vector<double> newton_E_from_S(std::span<const double> s, int n);

/// Power sums of any p whose Bernoulli convolution has cumulants c.
std::vector<double> cumulants_to_power_sums(std::span<const double> c);
/// Cumulants sum_l a_{r,l} s_l of the Bernoulli convolution with power sums s.
std::vector<double> power_sums_to_cumulants(std::span<const double> s);

/// Forward differences b_k = (Delta^k g)(0), so g(x) = sum_k b_k C(x, k).
std::vector<double> payoff_newton_coeffs(std::span<const double> g);
/// Inverse of payoff_newton_coeffs: g(x) = sum_k b_k C(x, k) for x = 0..b.size()-1.
std::vector<double> payoff_from_newton_coeffs(std::span<const double> b);

/// sum_k b_k E_k(p), which equals E g(X) for X ~ BC_p.
double expectation_via_elementary(const ParamVector& p, std::span<const double> b);

enum class Basis { Cumulant, Moment };

/// Constraint data: the first r cumulants (or raw moments) of BC_p equal c.
struct CumulantSpec {
  Basis basis = Basis::Cumulant;
  std::vector<double> c;

  int r() const { return static_cast<int>(c.size()); }
  /// Equivalent targets for the power sums S_1, ..., S_r of p.
  std::vector<double> to_power_sums() const;
};

/// Payoff g on {0, ..., n} with its Newton coefficients.
class Payoff {
 public:
  Payoff() : Payoff(std::vector<double>{0.0}) {}
  explicit Payoff(std::vector<double> g);

  std::size_t n() const { return g_.size() - 1; }
  std::size_t size() const { return g_.size(); }
  double operator[](std::size_t x) const { return g_[x]; }
  const std::vector<double>& values() const { return g_; }
  /// b with g(x) = sum_k b_k C(x, k).
  const std::vector<double>& newton_coeffs() const { return b_; }

  Payoff negated() const;

 private:
  std::vector<double> g_;
  std::vector<double> b_;
};

inline double expectation(const Pmf& pmf, const Payoff& g) { return expectation(pmf, g.values()); }

}  // namespace pbx
