// SMO for the C-SVM dual with second-order working set selection, after the
// LIBSVM solver (Fan, Chen & Lin 2005), without shrinking. Kernel rows are
// computed on demand and kept; every evaluation counts toward the budget.

#include <cmath>
#include <limits>
#include <optional>

#include "afdetect/classify.hpp"
#include "afdetect/error.hpp"

namespace afdetect::classify {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

class KernelRows {
 public:
  explicit KernelRows(const Matrix& x) : x_(x), rows_(x.rows()), diag_(x.rows()) {
    for (std::size_t i = 0; i < x.rows(); ++i) diag_[i] = cubic_kernel(x.row(i), x.row(i));
    evaluations_ = x.rows();
  }

  const std::vector<double>& row(std::size_t i) {
    auto& r = rows_[i];
    if (!r) {
      r.emplace(x_.rows());
      for (std::size_t j = 0; j < x_.rows(); ++j) (*r)[j] = cubic_kernel(x_.row(i), x_.row(j));
      evaluations_ += x_.rows();
    }
    return *r;
  }
  double diag(std::size_t i) const { return diag_[i]; }
  std::size_t evaluations() const { return evaluations_; }

 private:
  const Matrix& x_;
  std::vector<std::optional<std::vector<double>>> rows_;
  std::vector<double> diag_;
  std::size_t evaluations_ = 0;
};

}  // namespace

double cubic_kernel(std::span<const double> u, std::span<const double> v) noexcept {
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  const double base = 1.0 + dot;
  return base * base * base;
}

SvmDualSolution solve_svm_dual(const Matrix& rows, std::span<const Label> labels,
                               const SvmParams& params) {
  const std::size_t n = rows.rows();
  if (labels.size() != n) throw Error(ErrorKind::LengthMismatch, "rows and labels differ in length");
  std::vector<double> y(n);
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = signed_label(labels[i]);
    (y[i] > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw Error(ErrorKind::SingleClass, "SVM needs both classes");
  if (!(params.C > 0.0)) throw Error(ErrorKind::BadConfig, "SVM box constraint must be positive");

  const double C = params.C;
  KernelRows kernel(rows);
  SvmDualSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);  // G = Q alpha - e
  auto& alpha = sol.alpha;

  const auto is_upper = [&](std::size_t t) { return alpha[t] >= C; };
  const auto is_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  while (true) {
    // Working-pair selection.
    double g_max = -kInf;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!is_upper(t) && -grad[t] >= g_max) { g_max = -grad[t]; i = t; }
      } else {
        if (!is_lower(t) && grad[t] >= g_max) { g_max = grad[t]; i = t; }
      }
    }
    double g_max2 = -kInf;
    std::size_t j = n;
    double best_obj = kInf;
    const std::vector<double>* k_i = i < n ? &kernel.row(i) : nullptr;
    for (std::size_t t = 0; t < n; ++t) {
      double grad_diff = 0.0;
      if (y[t] > 0) {
        if (is_lower(t)) continue;
        g_max2 = std::max(g_max2, grad[t]);
        grad_diff = g_max + grad[t];
      } else {
        if (is_upper(t)) continue;
        g_max2 = std::max(g_max2, -grad[t]);
        grad_diff = g_max - grad[t];
      }
      if (!k_i || grad_diff <= 0.0) continue;
      const double quad = kernel.diag(i) + kernel.diag(t) - 2.0 * (*k_i)[t];
      const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
      if (obj <= best_obj) { best_obj = obj; j = t; }
    }
    sol.max_violation = g_max + g_max2;
    if (i == n || j == n || sol.max_violation <= params.tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= params.max_iterations || kernel.evaluations() >= params.max_kernel_evaluations) {
      sol.converged = false;
      break;
    }
    ++sol.iterations;

    // Two-variable analytic update, clipped to the box.
    const std::vector<double>& ki = kernel.row(i);
    const std::vector<double>& kj = kernel.row(j);
    const double qij = y[i] * y[j] * ki[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = kernel.diag(i) + kernel.diag(j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      double quad = kernel.diag(i) + kernel.diag(j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > C) {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    const double d_ai = alpha[i] - old_ai;
    const double d_aj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * ki[t] * d_ai + y[j] * kj[t] * d_aj);
    }
  }

  // Bias from free support vectors, or the midpoint of the feasible interval.
  double upper = kInf, lower = -kInf, free_sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (is_upper(t)) {
      if (y[t] < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (is_lower(t)) {
      if (y[t] > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++n_free;
    }
  }
  const double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : (upper + lower) / 2.0;
  sol.bias = -rho;
  sol.kernel_evaluations = kernel.evaluations();
  return sol;
}

double CubicSvmModel::decision_value(std::span<const double> row) const {
  double sum = bias;
  for (std::size_t i = 0; i < support_vectors.rows(); ++i) {
    sum += dual_coef[i] * cubic_kernel(support_vectors.row(i), row);
  }
  return sum;
}

CubicSvmModel train_cubic_svm(const Matrix& rows, std::span<const Label> labels, const SvmParams& params) {
  const SvmDualSolution sol = solve_svm_dual(rows, labels, params);
  CubicSvmModel model;
  model.C = params.C;
  model.bias = sol.bias;
  model.converged = sol.converged;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    if (sol.alpha[i] > 0.0) {
      model.support_vectors.append_row(rows.row(i));
      model.dual_coef.push_back(sol.alpha[i] * signed_label(labels[i]));
    }
  }
  if (model.support_vectors.rows() == 0) model.support_vectors = Matrix(0, rows.cols());
  return model;
}

}  // namespace afdetect::classify
