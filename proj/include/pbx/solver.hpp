#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pbx/distributions.hpp"
#include "pbx/moments.hpp"

namespace pbx {

enum class Direction { Max, Min };

/// Numerical knobs of the extremal search. Only `residual_tol` is part of the
/// result contract; the Newton parameters may be tuned freely.
struct SolveOptions {
  double residual_tol = 1e-10;
  double dedup_tol = 1e-8;
  double boundary_tol = 1e-12;
  /// Candidates whose values differ by at most this are treated as ties.
  double tie_tol = 1e-12;
  /// Width of the band below (above) the optimum reported in `all_optima`.
  double value_tol = 1e-9;
  int max_order = kDefaultMaxOrder;

  int grid_density = 12;
  long max_starts = 20000;
  int newton_max_iter = 200;
  int newton_max_halvings = 40;

  /// Worker threads for the structure fan-out; 0 picks the hardware default.
  int threads = 0;
};

/// Shape of a candidate before its interior values are known:
/// `ones` factors with p = 1, `zeros` with p = 0 and one block per entry of
/// `multiplicities` (non-increasing, each >= 1).
struct Structure {
  int ones = 0;
  int zeros = 0;
  std::vector<int> multiplicities;

  friend bool operator==(const Structure&, const Structure&) = default;
};

/// All structures on n factors with at most min(r, n) blocks, ordered by block
/// count, then ones, then zeros, then multiplicities in decreasing lexicographic order.
std::vector<Structure> enumerate_structures(int n, int r);

/// Interior solutions q of sum_j n_j q_j^l = s_l - ones, l = 1..r.
///
/// Every returned vector has entries in (boundary_tol, 1 - boundary_tol) that
/// are pairwise at least dedup_tol apart, satisfies all r equations to within
/// residual_tol, and is unique up to permutations among equal multiplicities
/// (such entries are returned in ascending order). An empty list means the
/// structure admits no interior solution.
std::vector<std::vector<double>> solve_block_system(std::span<const int> multiplicities,
                                                    std::span<const double> s_target, int ones,
                                                    const SolveOptions& opts = {});

struct SolveRequest {
  int n = 0;
  Payoff g;
  CumulantSpec spec;
  Direction direction = Direction::Max;
  SolveOptions options;
};

struct SolveResult {
  double value = 0.0;
  ExtremalCandidate candidate;
  /// S_l(p) - s_l for l = 1..r, in power-sum coordinates.
  std::vector<double> residuals;
  long structures_examined = 0;
  long roots_found = 0;
  /// Every candidate within value_tol of the optimum, in tie-break order.
  std::vector<ExtremalCandidate> all_optima;
  std::vector<double> all_optima_values;
};

/// Extremum of BC_p g over p in [0,1]^n with the prescribed first r cumulants
/// (or moments), searched over shifted convolutions of at most r binomials.
/// Throws InfeasibleError when no admissible candidate exists.
SolveResult solve_extremal(const SolveRequest& req);

/// Same search with targets already given as power sums s_1..s_r of p.
SolveResult solve_power_sums(int n, const Payoff& g, std::span<const double> s_target,
                             Direction direction, const SolveOptions& opts = {});

/// Strict weak order used for the deterministic tie-break: fewer blocks first,
/// then (ones, zeros, blocks) lexicographically.
bool candidate_key_less(const ExtremalCandidate& lhs, const ExtremalCandidate& rhs);

}  // namespace pbx
