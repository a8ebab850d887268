#include "pbx/moments.hpp"

#include <cmath>
#include <string>

#include "pbx/errors.hpp"

namespace pbx {

namespace {

// Largest order whose coefficient row is known to fit in 64-bit integers with room to spare.
constexpr int kSharedTableOrder = 16;

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw DomainError("cumulant coefficient overflow");
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw DomainError("cumulant coefficient overflow");
  return out;
}

// Row r of Pascal's triangle, C(r, 0..r).
std::vector<double> binomial_row(int r) {
  std::vector<double> row(static_cast<std::size_t>(r) + 1, 1.0);
  for (int k = 1; k < r; ++k) row[k] = row[k - 1] * (r - k + 1) / k;
  return row;
}

std::vector<std::int64_t> integer_binomial_row(int r) {
  std::vector<std::int64_t> row(static_cast<std::size_t>(r) + 1, 1);
  for (int k = 1; k < r; ++k) row[k] = checked_mul(row[k - 1], r - k + 1) / k;
  return row;
}

const CumulantCoeffTable& table_for(int r) {
  if (r > kSharedTableOrder) {
    throw DomainError("order " + std::to_string(r) + " exceeds supported maximum " +
                      std::to_string(kSharedTableOrder));
  }
  return shared_coeff_table();
}

}  // namespace

CumulantCoeffTable::CumulantCoeffTable(int r_max) {
  if (r_max <= 0) return;
  // polys[k] holds kappa_{k+1}(B_p) as integer coefficients of p^0, ..., p^{k+1}.
  std::vector<std::vector<std::int64_t>> polys;
  polys.push_back({0, 1});
  for (int r = 1; r < r_max; ++r) {
    // kappa_{r+1} = p (1 - sum_{l=0}^{r-1} C(r,l) kappa_{l+1})
    const auto binom = integer_binomial_row(r);
    std::vector<std::int64_t> sum(static_cast<std::size_t>(r) + 1, 0);
    for (int l = 0; l < r; ++l) {
      const auto& kappa = polys[l];
      for (std::size_t m = 0; m < kappa.size(); ++m) {
        sum[m] = checked_add(sum[m], checked_mul(binom[l], kappa[m]));
      }
    }
    std::vector<std::int64_t> next(static_cast<std::size_t>(r) + 2, 0);
    for (int m = 0; m <= r; ++m) next[m + 1] = (m == 0 ? 1 : 0) - sum[m];
    polys.push_back(std::move(next));
  }
  rows_.reserve(polys.size());
  for (const auto& poly : polys) rows_.emplace_back(poly.begin() + 1, poly.end());
}

double CumulantCoeffTable::evaluate(int r, double p) const {
  const auto& a = row(r);
  double acc = 0.0;
  for (std::size_t l = a.size(); l >= 1; --l) acc = (acc + static_cast<double>(a[l - 1])) * p;
  return acc;
}

const CumulantCoeffTable& shared_coeff_table() {
  static const CumulantCoeffTable table(kSharedTableOrder);
  return table;
}

CumulantCoeffTable bernoulli_cumulant_coeffs(int r_max) { return CumulantCoeffTable(r_max); }

std::vector<double> bernoulli_cumulants(double p, int r) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bernoulli_cumulants: p outside [0,1]");
  const auto& table = table_for(r);
  std::vector<double> out(static_cast<std::size_t>(std::max(r, 0)));
  for (int k = 1; k <= r; ++k) out[k - 1] = table.evaluate(k, p);
  return out;
}

std::vector<double> moments_from_cumulants(std::span<const double> kappa) {
  const int r = static_cast<int>(kappa.size());
  // mu[0] = 1 is the total mass.
  std::vector<double> mu(static_cast<std::size_t>(r) + 1, 0.0);
  mu[0] = 1.0;
  for (int k = 0; k < r; ++k) {
    const auto binom = binomial_row(k);
    double acc = 0.0;
    for (int l = 0; l <= k; ++l) acc += binom[l] * mu[k - l] * kappa[l];
    mu[k + 1] = acc;
  }
  return {mu.begin() + 1, mu.end()};
}

std::vector<double> cumulants_from_moments(std::span<const double> mu) {
  const int r = static_cast<int>(mu.size());
  std::vector<double> kappa(static_cast<std::size_t>(r), 0.0);
  auto moment = [&](int k) { return k == 0 ? 1.0 : mu[k - 1]; };
  for (int k = 0; k < r; ++k) {
    const auto binom = binomial_row(k);
    double acc = moment(k + 1);
    for (int l = 0; l < k; ++l) acc -= binom[l] * moment(k - l) * kappa[l];
    kappa[k] = acc;
  }
  return kappa;
}

std::vector<double> pmf_moments(const Pmf& pmf, int r) {
  std::vector<double> mu(static_cast<std::size_t>(std::max(r, 0)), 0.0);
  for (std::size_t x = 0; x < pmf.size(); ++x) {
    double power = 1.0;
    for (int l = 0; l < r; ++l) {
      power *= static_cast<double>(x);
      mu[l] += power * pmf[x];
    }
  }
  return mu;
}

std::vector<double> power_sums(std::span<const double> x, int r) {
  std::vector<double> s(static_cast<std::size_t>(std::max(r, 0)), 0.0);
  for (double xi : x) {
    double power = 1.0;
    for (int l = 0; l < r; ++l) {
      power *= xi;
      s[l] += power;
    }
  }
  return s;
}

std::vector<double> elementary_symmetric(std::span<const double> x) {
  std::vector<double> e(x.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = i + 1; k >= 1; --k) e[k] += x[i] * e[k - 1];
  }
  return e;
}

std::vector<double> newton_E_from_S(std::span<const double> s, int n) {
  if (n < 0 || s.size() < static_cast<std::size_t>(n)) {
    throw DomainError("newton_E_from_S: need at least n power sums");
  }
  std::vector<double> e(static_cast<std::size_t>(n) + 1, 0.0);
  e[0] = 1.0;
  for (int r = 1; r <= n; ++r) {
    double acc = 0.0;
    for (int l = 1; l <= r; ++l) {
      const double term = s[l - 1] * e[r - l];
      acc += (l % 2 == 1) ? term : -term;
    }
    e[r] = acc / r;
  }
  return {e.begin() + 1, e.end()};
}

std::vector<double> cumulants_to_power_sums(std::span<const double> c) {
  const int r = static_cast<int>(c.size());
  const auto& table = table_for(r);
  std::vector<double> s(static_cast<std::size_t>(r), 0.0);
  for (int k = 1; k <= r; ++k) {
    double acc = c[k - 1];
    for (int l = 1; l < k; ++l) acc -= static_cast<double>(table.coeff(k, l)) * s[l - 1];
    s[k - 1] = acc / static_cast<double>(table.coeff(k, k));
  }
  return s;
}

std::vector<double> power_sums_to_cumulants(std::span<const double> s) {
  const int r = static_cast<int>(s.size());
  const auto& table = table_for(r);
  std::vector<double> c(static_cast<std::size_t>(r), 0.0);
  for (int k = 1; k <= r; ++k) {
    double acc = 0.0;
    for (int l = 1; l <= k; ++l) acc += static_cast<double>(table.coeff(k, l)) * s[l - 1];
    c[k - 1] = acc;
  }
  return c;
}

std::vector<double> payoff_newton_coeffs(std::span<const double> g) {
  std::vector<double> work(g.begin(), g.end());
  std::vector<double> b(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    b[k] = work[0];
    for (std::size_t x = 0; x + k + 1 < g.size(); ++x) work[x] = work[x + 1] - work[x];
  }
  return b;
}

std::vector<double> payoff_from_newton_coeffs(std::span<const double> b) {
  std::vector<double> g(b.size(), 0.0);
  for (std::size_t x = 0; x < b.size(); ++x) {
    double choose = 1.0;  // C(x, k)
    double acc = 0.0;
    for (std::size_t k = 0; k <= x; ++k) {
      acc += b[k] * choose;
      choose = choose * static_cast<double>(x - k) / static_cast<double>(k + 1);
    }
    g[x] = acc;
  }
  return g;
}

double expectation_via_elementary(const ParamVector& p, std::span<const double> b) {
  if (b.size() != p.size() + 1) {
    throw DomainError("expectation_via_elementary: need n+1 coefficients");
  }
  const auto e = elementary_symmetric(p.span());
  double total = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) total += b[k] * e[k];
  return total;
}

std::vector<double> CumulantSpec::to_power_sums() const {
  if (basis == Basis::Moment) {
    const auto kappa = cumulants_from_moments(c);
    return cumulants_to_power_sums(kappa);
  }
  return cumulants_to_power_sums(c);
}

Payoff::Payoff(std::vector<double> g) : g_(std::move(g)) {
  if (g_.empty()) throw DomainError("Payoff: empty table");
  for (double v : g_) {
    if (!std::isfinite(v)) throw DomainError("Payoff: non-finite value");
  }
  b_ = payoff_newton_coeffs(g_);
}

Payoff Payoff::negated() const {
  std::vector<double> g = g_;
  for (double& v : g) v = -v;
  return Payoff(std::move(g));
}

}  // namespace pbx
