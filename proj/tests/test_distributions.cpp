#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "pbx/distributions.hpp"
#include "pbx/errors.hpp"
#include "pbx/moments.hpp"

using namespace pbx;
using pbx::testing::enumerate_pmf;
using pbx::testing::hypergeometric_pmf;

namespace {

void check_abs(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

}  // namespace

TEST_CASE("bernoulli_pmf examples and domain") {
  CHECK(bernoulli_pmf(0.0).weights() == std::vector<double>{1.0, 0.0});
  CHECK(bernoulli_pmf(1.0).weights() == std::vector<double>{0.0, 1.0});
  CHECK(bernoulli_pmf(0.25).weights() == std::vector<double>{0.75, 0.25});
  CHECK_THROWS_AS(bernoulli_pmf(-0.1), DomainError);
  CHECK_THROWS_AS(bernoulli_pmf(1.5), DomainError);
  CHECK_THROWS_AS(bernoulli_pmf(std::nan("")), DomainError);
}

TEST_CASE("bc_pmf examples") {
  CHECK(bc_pmf(ParamVector{}).weights() == std::vector<double>{1.0});
  CHECK(bc_pmf(ParamVector{0.5, 0.5}).weights() == std::vector<double>{0.25, 0.5, 0.25});

  // Two-draw hypergeometric with two red and two blue balls.
  const double eps = 1.0 / (2.0 * std::sqrt(3.0));
  const auto pmf = bc_pmf(ParamVector{0.5 + eps, 0.5 - eps});
  check_abs(pmf.weights(), hypergeometric_pmf(2, 2, 2), 1e-12);
  check_abs(hypergeometric_pmf(2, 2, 2), {1.0 / 6, 2.0 / 3, 1.0 / 6}, 1e-15);
}

TEST_CASE("hypergeometric factorisation holds for other urns") {
  for (int red = 1; red <= 5; ++red) {
    for (int blue = 1; blue <= 5; ++blue) {
      const double total = red + blue;
      const double eps = std::sqrt(red * blue / (total - 1.0)) / total;
      const double centre = red / total;
      const auto pmf = bc_pmf(ParamVector{centre + eps, centre - eps});
      check_abs(pmf.weights(), hypergeometric_pmf(2, red, blue), 1e-12);
    }
  }
}

TEST_CASE("binomial_pmf examples") {
  CHECK(binomial_pmf(0, 0.7).weights() == std::vector<double>{1.0});
  CHECK(binomial_pmf(2, 0.5).weights() == std::vector<double>{0.25, 0.5, 0.25});
  check_abs(binomial_pmf(3, 0.25).weights(), {27.0 / 64, 27.0 / 64, 9.0 / 64, 1.0 / 64}, 1e-15);
  CHECK_THROWS_AS(binomial_pmf(3, 1.01), DomainError);
  CHECK_THROWS_AS(binomial_pmf(-1, 0.5), DomainError);

  // Direct formula as the reference.
  for (int n : {1, 5, 17, 40}) {
    for (double p : {0.03, 0.4, 0.91}) {
      std::vector<double> want(static_cast<std::size_t>(n) + 1);
      for (int k = 0; k <= n; ++k) {
        want[k] = pbx::testing::choose(n, k) * std::pow(p, k) * std::pow(1 - p, n - k);
      }
      check_abs(binomial_pmf(n, p).weights(), want, 1e-14);
    }
  }
}

TEST_CASE("candidate_pmf examples and errors") {
  CHECK(candidate_pmf({1, 0, {{2, 0.5}}}, 3).weights() == std::vector<double>{0, 0.25, 0.5, 0.25});
  CHECK(candidate_pmf({0, 3, {}}, 3).weights() == std::vector<double>{1, 0, 0, 0});
  CHECK(candidate_pmf({2, 1, {}}, 3).weights() == std::vector<double>{0, 0, 1, 0});
  CHECK_THROWS_AS(candidate_pmf({1, 0, {{2, 0.5}}}, 4), DomainError);
  CHECK_THROWS_AS(candidate_pmf({-1, 0, {}}, 0), DomainError);
  CHECK_THROWS_AS(candidate_pmf({0, 0, {{1, 1.0}}}, 1), DomainError);

  const ExtremalCandidate cand{2, 1, {{3, 0.2}, {1, 0.7}}};
  CHECK(candidate_pmf(cand, 7).weights() == bc_pmf(cand.expand()).weights());
  check_abs(candidate_pmf(cand, 7).weights(), enumerate_pmf(cand.expand().values()), 1e-14);
}

TEST_CASE("expectation examples") {
  CHECK(expectation(Pmf({0.25, 0.5, 0.25}), Payoff({0, 1, 2})) == 1.0);
  CHECK(expectation(Pmf({1.0}), Payoff({7})) == 7.0);
  CHECK(std::abs(expectation(Pmf(hypergeometric_pmf(2, 2, 2)), Payoff({0, 0, 1})) - 1.0 / 6) <= 1e-15);
  CHECK_THROWS_AS(expectation(Pmf({0.5, 0.5}), Payoff({1, 2, 3})), DomainError);
}

TEST_CASE("Pmf clamps rounding noise and rejects invalid weights") {
  const Pmf clean({0.5, 0.5});
  CHECK_FALSE(clean.quality_warning());

  const Pmf clamped({-1e-16, 1.0});
  CHECK(clamped[0] == 0.0);
  CHECK_FALSE(clamped.quality_warning());

  const Pmf renorm({0.5, 0.5 + 1e-11});
  CHECK(renorm.quality_warning());
  CHECK(std::abs(renorm[0] + renorm[1] - 1.0) <= 1e-15);

  CHECK_THROWS_AS(Pmf({0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(Pmf({-0.1, 1.1}), DomainError);
  CHECK_THROWS_AS(Pmf(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(ParamVector({0.2, -0.01}), DomainError);
}

TEST_CASE("bc_pmf properties on random parameter vectors") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> size(0, 12);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = pbx::testing::random_vector(rng, static_cast<std::size_t>(size(rng)), 0.0, 1.0);
    const auto base = bc_pmf(ParamVector(p));

    // Normalisation and nonnegativity.
    CHECK(std::abs(std::accumulate(base.weights().begin(), base.weights().end(), 0.0) - 1.0) <= 1e-12);
    CHECK(std::all_of(base.weights().begin(), base.weights().end(), [](double w) { return w >= 0.0; }));

    // Exact permutation invariance.
    auto shuffled = p;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(bc_pmf(ParamVector(shuffled)).weights() == base.weights());

    // Boundary absorption.
    auto with_zero = p;
    with_zero.push_back(0.0);
    check_abs(bc_pmf(ParamVector(with_zero)).weights(), base.embedded(p.size() + 1).weights(), 1e-15);
    auto with_one = p;
    with_one.push_back(1.0);
    check_abs(bc_pmf(ParamVector(with_one)).weights(), base.shifted(1).weights(), 1e-15);

    // Convolution consistency.
    const auto s = pbx::testing::random_vector(rng, static_cast<std::size_t>(size(rng)), 0.0, 1.0);
    const ParamVector pv(p), sv(s);
    check_abs(bc_pmf(pv.concat(sv)).weights(), base.convolve(bc_pmf(sv)).weights(), 1e-13);

    // Agreement with full enumeration.
    check_abs(base.weights(), enumerate_pmf(p), 1e-13);
  }
}
