#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pbx/distributions.hpp"
#include "pbx/moments.hpp"
#include "pbx/solver.hpp"

namespace pbx {

/// Brute-force search directly over [0,1]^n, independent of the structured
/// solver. Intended for n up to about 6.
struct OracleConfig {
  int n_starts = 2000;
  std::uint64_t seed = 0x5eed;
  double projection_tol = 1e-10;
  int projection_max_iter = 60;
  int ascent_max_iter = 400;
  double initial_step = 0.25;
  double min_step = 1e-12;
  /// Coordinates this close to 0 or 1 are treated as sitting on the boundary.
  double bound_eps = 1e-12;
  /// Starts whose projected value trails the best by more than this are not
  /// polished; negative polishes every start.
  double polish_gap = -1.0;
};

/// Newton restoration of the power-sum constraints S_l(p) = s_l, l = 1..r,
/// staying inside [0,1]^n. Coordinates that hit the boundary are frozen there.
/// Returns nullopt when the iteration stalls or cannot stay in the box.
std::optional<ParamVector> project_to_constraints(const ParamVector& p,
                                                  std::span<const double> s_target,
                                                  const OracleConfig& cfg = {});

/// Distinct interior coordinate value and how many coordinates share it.
struct InteriorCluster {
  double value = 0.0;
  int count = 0;
};

/// Coordinates not within 1e-6 of {0,1}, sorted and split wherever consecutive
/// values are more than `gap` apart.
std::vector<InteriorCluster> interior_profile(const ParamVector& p, double gap = 1e-4);

struct OracleResult {
  double value = 0.0;
  ParamVector p;
  std::vector<InteriorCluster> profile;
  int feasible_starts = 0;
};

/// Best feasible point found from cfg.n_starts seeded random starts.
/// Throws InfeasibleError if no start could be projected onto the constraints.
OracleResult oracle_optimize(int n, const Payoff& g, std::span<const double> s_target,
                             Direction direction, const OracleConfig& cfg = {});

}  // namespace pbx
