#pragma once

#include <span>
#include <vector>

#include "pbx/solver.hpp"

namespace pbx {

/// Permutation invariant, separately affine function on R^n written as
/// f(x) = sum_k elem[k] E_k(x).
struct SymmetricMultiaffine {
  std::vector<double> elem;

  int n() const { return static_cast<int>(elem.size()) - 1; }
  double operator()(std::span<const double> x) const;

  /// Values at the vertices of [a,b]^n: entry m is f at any point with m
  /// coordinates equal to b and the rest equal to a.
  std::vector<double> vertex_values(double a, double b) const;

  /// The unique f on [a,b]^n (a < b) with the given vertex values.
  static SymmetricMultiaffine from_vertex_values(std::span<const double> values, double a,
                                                 double b);
};

struct BoxRequest {
  double a = 0.0;
  double b = 1.0;
  SymmetricMultiaffine f;
  /// Targets for the power sums S_1(x), ..., S_r(x).
  std::vector<double> s_target;
  Direction direction = Direction::Max;
  SolveOptions options;

  int n() const { return f.n(); }
};

/// The equivalent problem on [0,1]^n: payoff g with f(a + (b-a)p) = BC_p g
/// and power-sum targets for p.
struct ReducedProblem {
  Payoff g;
  std::vector<double> s_unit;
  std::vector<double> cumulants;
};

struct BoxResult {
  double value = 0.0;
  /// Maximiser (minimiser) in x-coordinates, ascending.
  std::vector<double> x;
  /// S_l(x) - s_target_l.
  std::vector<double> x_residuals;
  /// The underlying solution on [0,1]^n.
  SolveResult unit;
};

/// Power sums of a + (b-a)p from power sums of p, for l = 1..s_unit.size().
std::vector<double> affine_power_sums(std::span<const double> s_unit, int n, double a, double b);
/// Inverse of affine_power_sums (requires a < b).
std::vector<double> unit_power_sums(std::span<const double> s_box, int n, double a, double b);

ReducedProblem reduce_box(const BoxRequest& req);
BoxResult solve_box(const BoxRequest& req);

}  // namespace pbx
