#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "pbx/errors.hpp"
#include "pbx/solver.hpp"

namespace pbx {

namespace {

// Iterates that wander this far from [0,1] are abandoned.
constexpr double kDivergence = 1e3;

struct BlockSystem {
  std::span<const int> mult;
  std::vector<double> d;  // s_l - ones, l = 1..r

  int unknowns() const { return static_cast<int>(mult.size()); }
  int equations() const { return static_cast<int>(d.size()); }

  // sum_j n_j q_j^l - d_l for l = 1..rows.
  Eigen::VectorXd residual(const Eigen::VectorXd& q, int rows) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(rows);
    for (int j = 0; j < unknowns(); ++j) {
      double power = 1.0;
      for (int l = 0; l < rows; ++l) {
        power *= q[j];
        f[l] += mult[j] * power;
      }
    }
    for (int l = 0; l < rows; ++l) f[l] -= d[l];
    return f;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& q) const {
    const int k = unknowns();
    Eigen::MatrixXd jac(k, k);
    for (int j = 0; j < k; ++j) {
      double power = 1.0;  // q_j^{l}
      for (int l = 0; l < k; ++l) {
        jac(l, j) = (l + 1) * mult[j] * power;
        power *= q[j];
      }
    }
    return jac;
  }
};

// Damped Newton on the square subsystem (first k equations). Returns false on
// stall, singular Jacobian or divergence.
bool newton(const BlockSystem& sys, Eigen::VectorXd& q, const SolveOptions& opts) {
  const int k = sys.unknowns();
  Eigen::VectorXd f = sys.residual(q, k);
  double norm = f.lpNorm<Eigen::Infinity>();
  for (int iter = 0; iter < opts.newton_max_iter; ++iter) {
    if (norm <= 1e-15) return true;
    const Eigen::MatrixXd jac = sys.jacobian(q);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) return false;
    const Eigen::VectorXd step = lu.solve(-f);
    if (!step.allFinite()) return false;

    double t = 1.0;
    bool improved = false;
    for (int h = 0; h <= opts.newton_max_halvings; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = q + t * step;
      const Eigen::VectorXd ft = sys.residual(trial, k);
      const double tn = ft.lpNorm<Eigen::Infinity>();
      if (tn < norm) {
        q = trial;
        f = ft;
        norm = tn;
        improved = true;
        break;
      }
    }
    if (!improved) {
      // Already at rounding level: no further decrease is possible.
      return norm <= opts.residual_tol;
    }
    if (q.cwiseAbs().maxCoeff() > kDivergence) return false;
    if (t == 1.0 && step.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + q.lpNorm<Eigen::Infinity>())) {
      return true;
    }
  }
  return norm <= opts.residual_tol;
}

// Groups of equal multiplicities are contiguous since multiplicities are non-increasing.
void canonicalise(std::span<const int> mult, std::vector<double>& q) {
  std::size_t begin = 0;
  while (begin < q.size()) {
    std::size_t end = begin + 1;
    while (end < q.size() && mult[end] == mult[begin]) ++end;
    std::sort(q.begin() + static_cast<std::ptrdiff_t>(begin),
              q.begin() + static_cast<std::ptrdiff_t>(end));
    begin = end;
  }
}

class RootCollector {
 public:
  RootCollector(const BlockSystem& sys, const SolveOptions& opts) : sys_(sys), opts_(opts) {}

  void offer(std::vector<double> q) {
    for (double v : q) {
      if (!(v > opts_.boundary_tol && v < 1.0 - opts_.boundary_tol)) return;
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
      for (std::size_t j = i + 1; j < q.size(); ++j) {
        if (std::abs(q[i] - q[j]) < opts_.dedup_tol) return;
      }
    }
    const Eigen::VectorXd qv = Eigen::Map<const Eigen::VectorXd>(q.data(), q.size());
    const double res = sys_.residual(qv, sys_.equations()).lpNorm<Eigen::Infinity>();
    if (!(res <= opts_.residual_tol)) return;

    canonicalise(sys_.mult, q);
    for (const auto& root : roots_) {
      double diff = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) diff = std::max(diff, std::abs(root[i] - q[i]));
      if (diff <= opts_.dedup_tol) return;
    }
    roots_.push_back(std::move(q));
  }

  std::vector<std::vector<double>> take() {
    std::sort(roots_.begin(), roots_.end());
    return std::move(roots_);
  }

 private:
  const BlockSystem& sys_;
  const SolveOptions& opts_;
  std::vector<std::vector<double>> roots_;
};

long count_starts(std::span<const int> mult, int m) {
  // Start tuples use pairwise distinct grid indices, ascending within groups
  // of equal multiplicity: m! / (m-k)! / prod(group sizes!).
  const int k = static_cast<int>(mult.size());
  if (m < k) return 0;
  double count = 1.0;
  for (int i = 0; i < k; ++i) count *= (m - i);
  std::size_t begin = 0;
  while (begin < mult.size()) {
    std::size_t end = begin + 1;
    while (end < mult.size() && mult[end] == mult[begin]) ++end;
    for (std::size_t g = 2; g <= end - begin; ++g) count /= static_cast<double>(g);
    begin = end;
  }
  return count > 1e18 ? static_cast<long>(1e18) : static_cast<long>(count + 0.5);
}

void multistart(const BlockSystem& sys, const SolveOptions& opts, RootCollector& roots) {
  const int k = sys.unknowns();
  int m = std::max(opts.grid_density, k);
  while (m > k && count_starts(sys.mult, m) > opts.max_starts) --m;

  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  // Recursive walk over admissible index tuples.
  auto visit = [&](auto&& self, int pos) -> void {
    if (pos == k) {
      Eigen::VectorXd q(k);
      for (int j = 0; j < k; ++j) q[j] = (idx[j] + 0.5) / m;
      if (newton(sys, q, opts)) roots.offer(std::vector<double>(q.data(), q.data() + k));
      return;
    }
    const bool same_group = pos > 0 && sys.mult[pos] == sys.mult[pos - 1];
    for (int i = same_group ? idx[pos - 1] + 1 : 0; i < m; ++i) {
      bool used = false;
      for (int j = 0; j < pos; ++j) used = used || idx[j] == i;
      if (used) continue;
      idx[pos] = i;
      self(self, pos + 1);
    }
  };
  visit(visit, 0);
}

}  // namespace

std::vector<std::vector<double>> solve_block_system(std::span<const int> multiplicities,
                                                    std::span<const double> s_target, int ones,
                                                    const SolveOptions& opts) {
  const int k = static_cast<int>(multiplicities.size());
  const int r = static_cast<int>(s_target.size());
  if (k > r) throw DomainError("solve_block_system: more blocks than equations");
  for (std::size_t j = 0; j < multiplicities.size(); ++j) {
    if (multiplicities[j] < 1 || (j > 0 && multiplicities[j] > multiplicities[j - 1])) {
      throw DomainError("solve_block_system: multiplicities must be positive and non-increasing");
    }
  }

  BlockSystem sys{multiplicities, std::vector<double>(s_target.begin(), s_target.end())};
  for (double& v : sys.d) v -= ones;
  RootCollector roots(sys, opts);

  if (k == 0) {
    roots.offer({});
  } else if (k == 1) {
    roots.offer({sys.d[0] / multiplicities[0]});
  } else if (k == 2 && multiplicities[0] == multiplicities[1]) {
    // q1 + q2 = e1 and q1^2 + q2^2 = p2 give q1 q2 = (e1^2 - p2) / 2.
    const double m = multiplicities[0];
    const double e1 = sys.d[0] / m;
    const double p2 = sys.d[1] / m;
    const double e2 = 0.5 * (e1 * e1 - p2);
    const double disc = e1 * e1 - 4.0 * e2;
    if (disc > 0.0) {
      const double root = std::sqrt(disc);
      const double big = 0.5 * (e1 + std::copysign(root, e1));
      if (big != 0.0) {
        Eigen::VectorXd q(2);
        q << e2 / big, big;
        newton(sys, q, opts);
        roots.offer({q[0], q[1]});
      }
    }
  } else {
    multistart(sys, opts, roots);
  }
  return roots.take();
}

}  // namespace pbx
