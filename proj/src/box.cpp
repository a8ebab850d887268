#include "pbx/box.hpp"

#include <algorithm>
#include <cmath>

#include "pbx/errors.hpp"

namespace pbx {

namespace {

std::vector<double> binomial_row(int r) {
  std::vector<double> row(static_cast<std::size_t>(r) + 1, 1.0);
  for (int k = 1; k < r; ++k) row[k] = row[k - 1] * (r - k + 1) / k;
  return row;
}

}  // namespace

double SymmetricMultiaffine::operator()(std::span<const double> x) const {
  if (x.size() + 1 != elem.size()) throw DomainError("SymmetricMultiaffine: dimension mismatch");
  const auto e = elementary_symmetric(x);
  double total = 0.0;
  for (std::size_t k = 0; k < elem.size(); ++k) total += elem[k] * e[k];
  return total;
}

std::vector<double> SymmetricMultiaffine::vertex_values(double a, double b) const {
  const int dim = n();
  std::vector<double> out(static_cast<std::size_t>(dim) + 1);
  std::vector<double> x(static_cast<std::size_t>(dim), a);
  for (int m = 0; m <= dim; ++m) {
    out[m] = (*this)(x);
    if (m < dim) x[dim - 1 - m] = b;
  }
  return out;
}

SymmetricMultiaffine SymmetricMultiaffine::from_vertex_values(std::span<const double> values,
                                                              double a, double b) {
  if (!(a < b)) throw DomainError("from_vertex_values: need a < b");
  if (values.empty()) throw DomainError("from_vertex_values: empty table");
  const int dim = static_cast<int>(values.size()) - 1;
  const double h = b - a;
  // f(x) = sum_j c_j E_j((x - a)/h) with c the Newton coefficients of the table, and
  // E_j(x - a) = sum_{i<=j} C(n-i, j-i) (-a)^{j-i} E_i(x).
  const auto c = payoff_newton_coeffs(values);
  std::vector<double> elem(static_cast<std::size_t>(dim) + 1, 0.0);
  for (int j = 0; j <= dim; ++j) {
    const double scaled = c[j] / std::pow(h, j);
    for (int i = 0; i <= j; ++i) {
      const auto row = binomial_row(dim - i);
      elem[i] += scaled * row[j - i] * std::pow(-a, j - i);
    }
  }
  return SymmetricMultiaffine{std::move(elem)};
}

std::vector<double> affine_power_sums(std::span<const double> s_unit, int n, double a, double b) {
  const double h = b - a;
  std::vector<double> out(s_unit.size());
  auto unit = [&](int k) { return k == 0 ? static_cast<double>(n) : s_unit[k - 1]; };
  for (int l = 1; l <= static_cast<int>(s_unit.size()); ++l) {
    const auto row = binomial_row(l);
    double acc = 0.0;
    for (int k = 0; k <= l; ++k) acc += row[k] * std::pow(a, l - k) * std::pow(h, k) * unit(k);
    out[l - 1] = acc;
  }
  return out;
}

std::vector<double> unit_power_sums(std::span<const double> s_box, int n, double a, double b) {
  if (!(a < b)) throw DomainError("unit_power_sums: need a < b");
  const double h = b - a;
  std::vector<double> out(s_box.size());
  auto unit = [&](int k) { return k == 0 ? static_cast<double>(n) : out[k - 1]; };
  for (int l = 1; l <= static_cast<int>(s_box.size()); ++l) {
    const auto row = binomial_row(l);
    double acc = s_box[l - 1];
    for (int k = 0; k < l; ++k) acc -= row[k] * std::pow(a, l - k) * std::pow(h, k) * unit(k);
    out[l - 1] = acc / std::pow(h, l);
  }
  return out;
}

ReducedProblem reduce_box(const BoxRequest& req) {
  if (req.f.elem.empty()) throw DomainError("box: empty function");
  if (!(req.a < req.b)) throw DomainError("box: reduction needs a < b");
  ReducedProblem out;
  out.g = Payoff(req.f.vertex_values(req.a, req.b));
  out.s_unit = unit_power_sums(req.s_target, req.n(), req.a, req.b);
  out.cumulants = power_sums_to_cumulants(out.s_unit);
  return out;
}

BoxResult solve_box(const BoxRequest& req) {
  if (req.f.elem.empty()) throw DomainError("box: empty function");
  if (!(req.a <= req.b)) throw DomainError("box: need a <= b");
  if (static_cast<int>(req.s_target.size()) > req.options.max_order) {
    throw DomainError("box: too many power-sum targets for the configured cap");
  }
  const int n = req.n();
  BoxResult out;

  if (req.a == req.b) {
    // Single point: feasible exactly when every target equals n a^l.
    out.x.assign(static_cast<std::size_t>(n), req.a);
    const auto s = power_sums(out.x, static_cast<int>(req.s_target.size()));
    for (std::size_t l = 0; l < s.size(); ++l) {
      const double defect = s[l] - req.s_target[l];
      if (!(std::abs(defect) <= req.options.residual_tol)) {
        throw InfeasibleError(InfeasibleReason::EmptyFeasibleSet,
                              "degenerate box: target S_" + std::to_string(l + 1) +
                                  " differs from n a^l");
      }
      out.x_residuals.push_back(defect);
    }
    out.value = req.f(out.x);
    out.unit.value = out.value;
    out.unit.candidate = ExtremalCandidate{0, n, {}};
    out.unit.residuals = out.x_residuals;
    out.unit.all_optima = {out.unit.candidate};
    out.unit.all_optima_values = {out.value};
    return out;
  }

  const ReducedProblem reduced = reduce_box(req);
  out.unit = solve_power_sums(n, reduced.g, reduced.s_unit, req.direction, req.options);
  out.value = out.unit.value;
  const double h = req.b - req.a;
  const ParamVector unit_point = out.unit.candidate.expand();
  for (double p : unit_point.values()) out.x.push_back(req.a + h * p);
  std::sort(out.x.begin(), out.x.end());
  const auto s = power_sums(out.x, static_cast<int>(req.s_target.size()));
  for (std::size_t l = 0; l < s.size(); ++l) out.x_residuals.push_back(s[l] - req.s_target[l]);
  return out;
}

}  // namespace pbx
