#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "pbx/errors.hpp"
#include "pbx/solver.hpp"

namespace pbx {

namespace {

struct Evaluated {
  ExtremalCandidate candidate;
  double value = 0.0;
};

struct StructureOutcome {
  std::vector<Evaluated> candidates;
  long roots = 0;
};

// Blocks ordered by ascending q; ties in q cannot occur after deduplication.
ExtremalCandidate make_candidate(const Structure& st, const std::vector<double>& q) {
  ExtremalCandidate cand{st.ones, st.zeros, {}};
  for (std::size_t j = 0; j < q.size(); ++j) cand.blocks.push_back(Block{st.multiplicities[j], q[j]});
  std::sort(cand.blocks.begin(), cand.blocks.end(),
            [](const Block& a, const Block& b) { return a.q < b.q || (a.q == b.q && a.size < b.size); });
  return cand;
}

StructureOutcome evaluate_structure(int n, const Payoff& g, std::span<const double> s,
                                    const Structure& st, const SolveOptions& opts) {
  StructureOutcome out;
  const auto roots = solve_block_system(st.multiplicities, s, st.ones, opts);
  out.roots = static_cast<long>(roots.size());
  for (const auto& q : roots) {
    ExtremalCandidate cand = make_candidate(st, q);
    const double value = expectation(candidate_pmf(cand, n), g);
    out.candidates.push_back(Evaluated{std::move(cand), value});
  }
  return out;
}

// Necessary conditions on power sums of a point in [0,1]^n. Violations prove D is empty.
void check_necessary(int n, std::span<const double> s, double tol) {
  const double slack = tol * std::max(1.0, static_cast<double>(n));
  for (std::size_t l = 0; l < s.size(); ++l) {
    if (!std::isfinite(s[l])) {
      throw InfeasibleError(InfeasibleReason::EmptyFeasibleSet, "non-finite target");
    }
    if (s[l] < -slack || s[l] > n + slack) {
      throw InfeasibleError(InfeasibleReason::EmptyFeasibleSet,
                            "power sum S_" + std::to_string(l + 1) + " = " + std::to_string(s[l]) +
                                " outside [0, n]");
    }
    if (l > 0 && s[l] > s[l - 1] + slack) {
      throw InfeasibleError(InfeasibleReason::EmptyFeasibleSet,
                            "power sums must be non-increasing in the order");
    }
  }
  if (s.size() >= 2) {
    const double lower = n == 0 ? 0.0 : s[0] * s[0] / n;
    if (s[1] < lower - slack) {
      throw InfeasibleError(InfeasibleReason::EmptyFeasibleSet,
                            "S_2 below S_1^2 / n (variance bound violated)");
    }
  }
}

int worker_count(const SolveOptions& opts, std::size_t jobs) {
  int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(threads, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(jobs, 1)));
}

}  // namespace

bool candidate_key_less(const ExtremalCandidate& lhs, const ExtremalCandidate& rhs) {
  if (lhs.interior_count() != rhs.interior_count()) return lhs.interior_count() < rhs.interior_count();
  if (lhs.ones != rhs.ones) return lhs.ones < rhs.ones;
  if (lhs.zeros != rhs.zeros) return lhs.zeros < rhs.zeros;
  return std::lexicographical_compare(
      lhs.blocks.begin(), lhs.blocks.end(), rhs.blocks.begin(), rhs.blocks.end(),
      [](const Block& a, const Block& b) { return a.size < b.size || (a.size == b.size && a.q < b.q); });
}

SolveResult solve_power_sums(int n, const Payoff& g, std::span<const double> s_target,
                             Direction direction, const SolveOptions& opts) {
  if (n < 0) throw DomainError("solve: negative n");
  if (g.size() != static_cast<std::size_t>(n) + 1) {
    throw DomainError("solve: payoff must have n+1 = " + std::to_string(n + 1) + " entries");
  }
  const int r = static_cast<int>(s_target.size());
  if (r > opts.max_order) {
    throw DomainError("solve: r = " + std::to_string(r) + " exceeds the configured cap " +
                      std::to_string(opts.max_order));
  }
  check_necessary(n, s_target, opts.residual_tol);

  const auto structures = enumerate_structures(n, r);
  std::vector<StructureOutcome> outcomes(structures.size());

  // Each structure is solved independently into its own slot; the reduction
  // below runs in enumeration order, so the result does not depend on scheduling.
  const int workers = worker_count(opts, structures.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < structures.size(); i = next++) {
      outcomes[i] = evaluate_structure(n, g, s_target, structures[i], opts);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  }

  const double sign = direction == Direction::Max ? 1.0 : -1.0;
  auto better = [&](const Evaluated& a, const Evaluated& b) {
    const double diff = sign * (a.value - b.value);
    if (diff > opts.tie_tol) return true;
    if (diff < -opts.tie_tol) return false;
    return candidate_key_less(a.candidate, b.candidate);
  };

  SolveResult result;
  result.structures_examined = static_cast<long>(structures.size());
  const Evaluated* best = nullptr;
  for (const auto& outcome : outcomes) {
    result.roots_found += outcome.roots;
    for (const auto& ev : outcome.candidates) {
      if (best == nullptr || better(ev, *best)) best = &ev;
    }
  }
  if (best == nullptr) {
    throw InfeasibleError(InfeasibleReason::NoStructureAdmissible,
                          std::to_string(structures.size()) +
                              " structures examined, none met the residual tolerance",
                          result.structures_examined);
  }

  result.value = best->value;
  result.candidate = best->candidate;
  result.residuals.assign(static_cast<std::size_t>(r), 0.0);
  for (int l = 1; l <= r; ++l) {
    double acc = result.candidate.ones;
    for (const Block& b : result.candidate.blocks) acc += b.size * std::pow(b.q, l);
    result.residuals[l - 1] = acc - s_target[l - 1];
  }

  std::vector<const Evaluated*> near;
  for (const auto& outcome : outcomes) {
    for (const auto& ev : outcome.candidates) {
      if (std::abs(ev.value - best->value) <= opts.value_tol) near.push_back(&ev);
    }
  }
  std::stable_sort(near.begin(), near.end(), [&](const Evaluated* a, const Evaluated* b) {
    return candidate_key_less(a->candidate, b->candidate);
  });
  for (const Evaluated* ev : near) {
    result.all_optima.push_back(ev->candidate);
    result.all_optima_values.push_back(ev->value);
  }
  return result;
}

SolveResult solve_extremal(const SolveRequest& req) {
  if (req.spec.r() > req.options.max_order) {
    throw DomainError("solve: r = " + std::to_string(req.spec.r()) +
                      " exceeds the configured cap " + std::to_string(req.options.max_order));
  }
  const auto s = req.spec.to_power_sums();
  return solve_power_sums(req.n, req.g, s, req.direction, req.options);
}

}  // namespace pbx
