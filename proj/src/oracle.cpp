#include "pbx/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pbx/errors.hpp"

namespace pbx {

namespace {

constexpr double kProfileBoundary = 1e-6;
constexpr int kShortPolishIter = 40;
// Screening only ranks starts; the refinement pass runs down to cfg.min_step.
constexpr double kShortPolishMinStep = 1e-6;
constexpr int kRefineCount = 24;

using Vec = Eigen::VectorXd;

// Unchecked Poisson-binomial weights; the oracle calls this in tight loops.
void raw_pmf(const Vec& p, int skip, std::vector<double>& w) {
  w.assign(static_cast<std::size_t>(p.size()) + 1, 0.0);
  w[0] = 1.0;
  std::size_t len = 1;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i == skip) continue;
    const double pi = p[i];
    for (std::size_t k = len; k >= 1; --k) w[k] = w[k] * (1.0 - pi) + w[k - 1] * pi;
    w[0] *= 1.0 - pi;
    ++len;
  }
}

class Objective {
 public:
  Objective(const Payoff& g, Direction dir) : g_(g.values()), sign_(dir == Direction::Max ? 1.0 : -1.0) {}

  // Signed so that the oracle always ascends.
  double value(const Vec& p) const {
    raw_pmf(p, -1, scratch_);
    double total = 0.0;
    for (std::size_t x = 0; x < g_.size(); ++x) total += scratch_[x] * g_[x];
    return sign_ * total;
  }

  // f is affine in each p_i with slope sum_x P_{-i}(x) (g(x+1) - g(x)).
  Vec gradient(const Vec& p) const {
    Vec grad(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      raw_pmf(p, static_cast<int>(i), scratch_);
      double slope = 0.0;
      for (Eigen::Index x = 0; x < p.size(); ++x) slope += scratch_[x] * (g_[x + 1] - g_[x]);
      grad[i] = sign_ * slope;
    }
    return grad;
  }

  double sign() const { return sign_; }

 private:
  const std::vector<double>& g_;
  double sign_;
  mutable std::vector<double> scratch_;
};

Vec constraint_residual(const Vec& p, std::span<const double> s) {
  const auto r = static_cast<Eigen::Index>(s.size());
  Vec f = Vec::Zero(r);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double power = 1.0;
    for (Eigen::Index l = 0; l < r; ++l) {
      power *= p[i];
      f[l] += power;
    }
  }
  for (Eigen::Index l = 0; l < r; ++l) f[l] -= s[l];
  return f;
}

// Jacobian of (S_1, ..., S_r) restricted to the listed columns.
Eigen::MatrixXd constraint_jacobian(const Vec& p, const std::vector<int>& cols, int r) {
  Eigen::MatrixXd jac(r, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    double power = 1.0;
    for (int l = 0; l < r; ++l) {
      jac(l, static_cast<Eigen::Index>(c)) = (l + 1) * power;
      power *= p[cols[c]];
    }
  }
  return jac;
}

// Minimum-norm solution of jac * x = rhs. The Gram route covers full row rank;
// repeated or too few columns fall back to a rank-revealing factorisation.
Vec min_norm_solve(const Eigen::MatrixXd& jac, const Vec& rhs) {
  if (jac.cols() >= jac.rows()) {
    const Eigen::LDLT<Eigen::MatrixXd> gram(jac * jac.transpose());
    if (gram.info() == Eigen::Success && gram.isPositive() && gram.rcond() > 1e-12) {
      return jac.transpose() * gram.solve(rhs);
    }
  }
  return jac.completeOrthogonalDecomposition().solve(rhs);
}

bool at_bound(double v, double eps) { return v <= eps || v >= 1.0 - eps; }

void snap(Vec& p, double eps) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= eps) p[i] = 0.0;
    if (p[i] >= 1.0 - eps) p[i] = 1.0;
  }
}

std::optional<Vec> project(Vec p, std::span<const double> s, const OracleConfig& cfg) {
  const int r = static_cast<int>(s.size());
  snap(p, cfg.bound_eps);
  Vec f = constraint_residual(p, s);
  double norm = f.lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < cfg.projection_max_iter; ++iter) {
    if (norm <= cfg.projection_tol) return p;
    std::vector<int> free;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (!at_bound(p[i], cfg.bound_eps)) free.push_back(static_cast<int>(i));
    }
    if (free.empty()) return std::nullopt;
    const Eigen::MatrixXd jac = constraint_jacobian(p, free, r);
    const Vec step = min_norm_solve(jac, -f);
    if (!step.allFinite()) return std::nullopt;

    bool improved = false;
    double t = 1.0;
    for (int h = 0; h < 40; ++h, t *= 0.5) {
      Vec trial = p;
      for (std::size_t c = 0; c < free.size(); ++c) {
        trial[free[c]] = std::clamp(p[free[c]] + t * step[static_cast<Eigen::Index>(c)], 0.0, 1.0);
      }
      snap(trial, cfg.bound_eps);
      const Vec ft = constraint_residual(trial, s);
      const double tn = ft.lpNorm<Eigen::Infinity>();
      if (tn < norm) {
        p = std::move(trial);
        f = ft;
        norm = tn;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (norm <= cfg.projection_tol) return p;
  return std::nullopt;
}

// Gradient projected onto the tangent space of the constraints, with coordinates
// on the boundary released only when the direction points into the box.
Vec ascent_direction(const Vec& p, const Vec& grad, int r, double eps) {
  const auto n = p.size();
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  Vec dir = Vec::Zero(n);
  for (Eigen::Index round = 0; round <= n; ++round) {
    std::vector<int> cols;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[i]) cols.push_back(static_cast<int>(i));
    }
    dir.setZero();
    if (cols.empty()) return dir;
    Vec g(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) g[static_cast<Eigen::Index>(c)] = grad[cols[c]];
    Vec d = g;
    if (r > 0) {
      const Eigen::MatrixXd jac = constraint_jacobian(p, cols, r);
      d = g - min_norm_solve(jac, jac * g);
    }
    bool changed = false;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const int i = cols[c];
      const double di = d[static_cast<Eigen::Index>(c)];
      if ((p[i] <= eps && di < 0.0) || (p[i] >= 1.0 - eps && di > 0.0)) {
        active[i] = false;
        changed = true;
      }
      dir[i] = di;
    }
    if (!changed) return dir;
  }
  return Vec::Zero(n);
}

struct Polished {
  Vec p;
  double value;
};

Polished polish(Vec p, double value, const Objective& obj, std::span<const double> s,
                const OracleConfig& cfg, int max_iter, double min_step) {
  const int r = static_cast<int>(s.size());
  double t = cfg.initial_step;
  for (int iter = 0; iter < max_iter && t >= min_step; ++iter) {
    const Vec dir = ascent_direction(p, obj.gradient(p), r, cfg.bound_eps);
    const double dn = dir.lpNorm<Eigen::Infinity>();
    if (dn <= 1e-13) break;
    bool accepted = false;
    while (t >= min_step) {
      Vec trial = p + (t / dn) * dir;
      for (Eigen::Index i = 0; i < trial.size(); ++i) trial[i] = std::clamp(trial[i], 0.0, 1.0);
      if (auto projected = project(std::move(trial), s, cfg)) {
        const double tv = obj.value(*projected);
        if (tv > value) {
          p = std::move(*projected);
          value = tv;
          accepted = true;
          t = std::min(2.0 * t, 1.0);
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  return {std::move(p), value};
}

}  // namespace

std::optional<ParamVector> project_to_constraints(const ParamVector& p,
                                                  std::span<const double> s_target,
                                                  const OracleConfig& cfg) {
  Vec start = Eigen::Map<const Vec>(p.values().data(), static_cast<Eigen::Index>(p.size()));
  auto out = project(std::move(start), s_target, cfg);
  if (!out) return std::nullopt;
  return ParamVector(std::vector<double>(out->data(), out->data() + out->size()));
}

std::vector<InteriorCluster> interior_profile(const ParamVector& p, double gap) {
  std::vector<double> interior;
  for (double v : p.values()) {
    if (v > kProfileBoundary && v < 1.0 - kProfileBoundary) interior.push_back(v);
  }
  std::sort(interior.begin(), interior.end());
  std::vector<InteriorCluster> clusters;
  std::size_t begin = 0;
  while (begin < interior.size()) {
    std::size_t end = begin + 1;
    while (end < interior.size() && interior[end] - interior[end - 1] <= gap) ++end;
    const double sum = std::accumulate(interior.begin() + static_cast<std::ptrdiff_t>(begin),
                                       interior.begin() + static_cast<std::ptrdiff_t>(end), 0.0);
    clusters.push_back({sum / static_cast<double>(end - begin), static_cast<int>(end - begin)});
    begin = end;
  }
  return clusters;
}

OracleResult oracle_optimize(int n, const Payoff& g, std::span<const double> s_target,
                             Direction direction, const OracleConfig& cfg) {
  if (n < 0 || g.size() != static_cast<std::size_t>(n) + 1) {
    throw DomainError("oracle_optimize: payoff must have n+1 entries");
  }
  const Objective obj(g, direction);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<Polished> pool;
  for (int start = 0; start < cfg.n_starts; ++start) {
    Vec p(n);
    for (int i = 0; i < n; ++i) p[i] = unif(rng);
    if (auto projected = project(std::move(p), s_target, cfg)) {
      const double v = obj.value(*projected);
      pool.push_back(polish(std::move(*projected), v, obj, s_target, cfg, kShortPolishIter,
                            std::max(cfg.min_step, kShortPolishMinStep)));
    }
  }
  if (pool.empty()) {
    throw InfeasibleError(InfeasibleReason::NoStructureAdmissible,
                          "oracle: no random start could be projected onto the constraints");
  }

  // Stable order keeps the refinement set reproducible for a given seed.
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pool[a].value > pool[b].value; });
  const std::size_t refine = std::min<std::size_t>(order.size(), kRefineCount);

  Polished best = pool[order[0]];
  for (std::size_t k = 0; k < refine; ++k) {
    const Polished& cand = pool[order[k]];
    if (cfg.polish_gap >= 0.0 && best.value - cand.value > cfg.polish_gap) continue;
    Polished done = polish(cand.p, cand.value, obj, s_target, cfg, cfg.ascent_max_iter, cfg.min_step);
    if (done.value > best.value) best = std::move(done);
  }

  OracleResult out;
  out.value = obj.sign() * best.value;
  out.p = ParamVector(std::vector<double>(best.p.data(), best.p.data() + best.p.size()));
  out.profile = interior_profile(out.p);
  out.feasible_starts = static_cast<int>(pool.size());
  return out;
}

}  // namespace pbx
