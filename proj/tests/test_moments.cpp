#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pbx/distributions.hpp"
#include "pbx/errors.hpp"
#include "pbx/moments.hpp"

using namespace pbx;
namespace t = pbx::testing;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::int64_t factorial(int k) {
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

TEST_CASE("cumulant coefficient rows") {
  const auto table = bernoulli_cumulant_coeffs(4);
  REQUIRE(table.r_max() == 4);
  CHECK(table.row(1) == std::vector<std::int64_t>{1});
  CHECK(table.row(2) == std::vector<std::int64_t>{1, -1});
  CHECK(table.row(3) == std::vector<std::int64_t>{1, -3, 2});
  CHECK(table.row(4) == std::vector<std::int64_t>{1, -7, 12, -6});
  CHECK(bernoulli_cumulant_coeffs(0).r_max() == 0);

  // Row 4 against the expansion of p(1-p)(1-6p(1-p)).
  const t::IntPoly pq = t::poly_mul({0, 1}, {1, -1});
  t::IntPoly kappa4 = t::poly_mul(pq, t::poly_add({1}, t::poly_mul({-6}, pq)));
  t::poly_trim(kappa4);
  CHECK(kappa4 == t::IntPoly{0, 1, -7, 12, -6});
  // Row 3 against p(1-p)(1-2p).
  CHECK(t::poly_mul(pq, {1, -2}) == t::IntPoly{0, 1, -3, 2});
}

TEST_CASE("cumulant table diagonal and derivative recursion") {
  const auto table = bernoulli_cumulant_coeffs(16);
  for (int r = 1; r <= 16; ++r) {
    const std::int64_t sign = r % 2 == 1 ? 1 : -1;
    CHECK(table.coeff(r, r) == sign * factorial(r - 1));
  }
  // kappa_{r+1} = p(1-p) d/dp kappa_r as exact integer polynomials.
  for (int r = 1; r < 16; ++r) {
    t::IntPoly row{0};
    row.insert(row.end(), table.row(r).begin(), table.row(r).end());
    t::IntPoly next{0};
    next.insert(next.end(), table.row(r + 1).begin(), table.row(r + 1).end());
    t::IntPoly derived = t::poly_mul({0, 1, -1}, t::poly_derivative(row));
    t::poly_trim(derived);
    CHECK(derived == next);
  }
}

TEST_CASE("bernoulli_cumulants examples") {
  CHECK(bernoulli_cumulants(0.5, 4) == std::vector<double>{0.5, 0.25, 0.0, -0.125});
  CHECK(bernoulli_cumulants(0.0, 4) == std::vector<double>{0, 0, 0, 0});
  CHECK(bernoulli_cumulants(1.0, 4) == std::vector<double>{1, 0, 0, 0});
  CHECK_THROWS_AS(bernoulli_cumulants(1.2, 2), DomainError);
  CHECK_THROWS_AS(bernoulli_cumulants(0.5, 40), DomainError);
}

TEST_CASE("Thiele conversion examples") {
  CHECK(moments_from_cumulants(std::vector<double>{0.3}) == std::vector<double>{0.3});
  CHECK(moments_from_cumulants(std::vector<double>{1, 1}) == std::vector<double>{1, 2});
  CHECK(max_abs_diff(moments_from_cumulants(std::vector<double>{0.5, 0.25, 0}), {0.5, 0.5, 0.5}) <= 1e-15);
  CHECK(cumulants_from_moments(std::vector<double>{0.3}) == std::vector<double>{0.3});
  CHECK(cumulants_from_moments(std::vector<double>{0.5, 0.5}) == std::vector<double>{0.5, 0.25});
  CHECK(moments_from_cumulants(std::vector<double>{}).empty());

  // Against the explicit partition formula.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mu = t::random_vector(rng, 5, -2.0, 2.0);
    CHECK(max_abs_diff(cumulants_from_moments(mu), t::cumulants_explicit(mu)) <= 1e-11);
  }
}

TEST_CASE("power sums and elementary symmetric functions") {
  CHECK(power_sums(std::vector<double>{}, 3) == std::vector<double>{0, 0, 0});
  CHECK(power_sums(std::vector<double>{1, 2, 3}, 3) == std::vector<double>{6, 14, 36});
  CHECK(power_sums(std::vector<double>{0.5}, 3) == std::vector<double>{0.5, 0.25, 0.125});

  CHECK(elementary_symmetric(std::vector<double>{}) == std::vector<double>{1});
  CHECK(elementary_symmetric(std::vector<double>{1, 2, 3}) == std::vector<double>{1, 6, 11, 6});

  // On {0,1} vectors E_k counts k-subsets of the ones.
  const std::vector<double> y{1, 0, 1, 1, 0, 1};
  const auto e = elementary_symmetric(y);
  for (int k = 0; k <= 6; ++k) CHECK(e[k] == t::choose(4, k));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = t::random_vector(rng, 7, -1.5, 1.5);
    const auto fast = elementary_symmetric(x);
    for (int k = 0; k <= 7; ++k) CHECK(std::abs(fast[k] - t::elementary_by_subsets(x, k)) <= 1e-12);
  }
}

TEST_CASE("Newton identities") {
  CHECK(newton_E_from_S(std::vector<double>{6, 14, 36}, 3) == std::vector<double>{6, 11, 6});
  CHECK(newton_E_from_S(std::vector<double>{0, 0, 0, 0}, 4) == std::vector<double>{0, 0, 0, 0});
  for (int n = 1; n <= 8; ++n) {
    const std::vector<double> s(static_cast<std::size_t>(n), static_cast<double>(n));
    const auto e = newton_E_from_S(s, n);
    for (int k = 1; k <= n; ++k) CHECK(e[k - 1] == doctest::Approx(t::choose(n, k)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(newton_E_from_S(std::vector<double>{1, 2}, 3), DomainError);

  // Leading coefficient of E_r in S_r is (-1)^{r-1}/r: perturb S_r alone.
  std::mt19937_64 rng(3);
  const auto s = t::random_vector(rng, 6, -1, 1);
  for (int r = 1; r <= 6; ++r) {
    auto bumped = s;
    bumped[r - 1] += 1.0;
    const double delta = newton_E_from_S(bumped, r)[r - 1] - newton_E_from_S(s, r)[r - 1];
    CHECK(delta == doctest::Approx((r % 2 == 1 ? 1.0 : -1.0) / r).epsilon(1e-12));
  }

  for (int trial = 0; trial < 100; ++trial) {
    const auto x = t::random_vector(rng, 1 + trial % 10, -2, 2);
    const int n = static_cast<int>(x.size());
    const auto direct = elementary_symmetric(x);
    const auto via = newton_E_from_S(power_sums(x, n), n);
    for (int k = 1; k <= n; ++k) {
      CHECK(std::abs(via[k - 1] - direct[k]) <= 1e-10 * std::max(1.0, std::abs(direct[k])));
    }
  }
}

TEST_CASE("cumulant <-> power sum maps") {
  CHECK(cumulants_to_power_sums(std::vector<double>{0.7}) == std::vector<double>{0.7});
  CHECK(power_sums_to_cumulants(std::vector<double>{2, 1}) == std::vector<double>{2, 1});

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = t::random_vector(rng, 1 + trial % 6, -5, 5);
    CHECK(max_abs_diff(power_sums_to_cumulants(cumulants_to_power_sums(c)), c) <= 1e-11);
    CHECK(max_abs_diff(cumulants_to_power_sums(power_sums_to_cumulants(c)), c) <= 1e-11);
  }
}

TEST_CASE("two-route cumulants and additivity") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 8;
    const int r = 1 + trial % 5;
    const auto p = t::random_vector(rng, static_cast<std::size_t>(n), 0, 1);
    const auto via_sums = power_sums_to_cumulants(power_sums(p, r));
    const auto via_pmf = t::cumulants_explicit(t::moments_of(t::enumerate_pmf(p), r));
    CHECK(max_abs_diff(via_sums, via_pmf) <= 1e-9);
    // Library moment route as well.
    CHECK(max_abs_diff(via_sums, cumulants_from_moments(pmf_moments(bc_pmf(ParamVector(p)), r))) <= 1e-9);

    const auto s = t::random_vector(rng, static_cast<std::size_t>(1 + trial % 4), 0, 1);
    auto joined = p;
    joined.insert(joined.end(), s.begin(), s.end());
    const auto sum_parts = [&] {
      auto a = power_sums_to_cumulants(power_sums(p, 5));
      const auto b = power_sums_to_cumulants(power_sums(s, 5));
      for (int l = 0; l < 5; ++l) a[l] += b[l];
      return a;
    }();
    const auto whole = cumulants_from_moments(pmf_moments(bc_pmf(ParamVector(joined)), 5));
    CHECK(max_abs_diff(whole, sum_parts) <= 1e-10);
  }
}

TEST_CASE("payoff Newton coefficients") {
  CHECK(payoff_newton_coeffs(std::vector<double>{3, 3, 3, 3}) == std::vector<double>{3, 0, 0, 0});
  CHECK(payoff_newton_coeffs(std::vector<double>{0, 0, 1}) == std::vector<double>{0, 0, 1});
  CHECK(payoff_newton_coeffs(std::vector<double>{0, 1, 4}) == std::vector<double>{0, 1, 2});

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = t::random_vector(rng, 1 + trial % 10, -3, 3);
    const auto b = payoff_newton_coeffs(g);
    for (std::size_t x = 0; x < g.size(); ++x) {
      double val = 0.0;
      for (std::size_t k = 0; k <= x; ++k) val += b[k] * t::choose(static_cast<int>(x), static_cast<int>(k));
      CHECK(std::abs(val - g[x]) <= 1e-10);
    }
    CHECK(max_abs_diff(payoff_from_newton_coeffs(b), g) <= 1e-10);
  }

  const Payoff payoff({1, 2, 5});
  CHECK(payoff.newton_coeffs() == std::vector<double>{1, 1, 2});
  CHECK(payoff.negated().values() == std::vector<double>{-1, -2, -5});
  CHECK_THROWS_AS(Payoff(std::vector<double>{}), DomainError);
}

TEST_CASE("expectation via elementary symmetric functions") {
  CHECK(expectation_via_elementary(ParamVector{0.5, 0.5}, std::vector<double>{0, 1, 0}) == 1.0);
  CHECK(expectation_via_elementary(ParamVector{0.5, 0.5}, std::vector<double>{0, 0, 1}) == 0.25);
  CHECK(expectation_via_elementary(ParamVector{0.1, 0.8, 0.3}, std::vector<double>{1, 0, 0, 0}) == 1.0);
  CHECK_THROWS_AS(expectation_via_elementary(ParamVector{0.5}, std::vector<double>{1}), DomainError);

  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = trial % 9;
    const auto p = t::random_vector(rng, static_cast<std::size_t>(n), 0, 1);
    const auto g = t::random_vector(rng, static_cast<std::size_t>(n) + 1, -2, 2);
    const Payoff payoff(g);
    double direct = 0.0;
    const auto w = t::enumerate_pmf(p);
    for (int x = 0; x <= n; ++x) direct += w[x] * g[x];
    CHECK(std::abs(expectation_via_elementary(ParamVector(p), payoff.newton_coeffs()) - direct) <= 1e-10);
  }
}

TEST_CASE("CumulantSpec conversion") {
  const std::vector<double> p{0.2, 0.9, 0.4, 0.6};
  const auto s = power_sums(p, 3);
  const auto kappa = power_sums_to_cumulants(s);
  const CumulantSpec cumulant{Basis::Cumulant, kappa};
  CHECK(max_abs_diff(cumulant.to_power_sums(), s) <= 1e-13);
  const CumulantSpec moment{Basis::Moment, moments_from_cumulants(kappa)};
  CHECK(max_abs_diff(moment.to_power_sums(), s) <= 1e-12);
  CHECK(cumulant.r() == 3);
}
