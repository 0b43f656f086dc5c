#pragma once

// Bagged CART trees, cubic-kernel SVM (SMO) and random-subspace KNN.
//
// Per-model input contract: trees consume raw features; the SVM and KNN
// consume standardized features (TrainedClassifier handles this). Scores are
// oriented so that larger means "more AF"; the AF decision is score >= 0.5 for
// vote-based models and decision value >= 0 for the SVM.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "afdetect/label.hpp"
#include "afdetect/matrix.hpp"

namespace afdetect::classify {

// ---- standardization ------------------------------------------------------

struct Standardizer {
  static constexpr double kStdFloor = 1e-12;
  std::vector<double> mean;
  std::vector<double> std;  // sample (n - 1), floored at kStdFloor

  std::vector<double> apply(std::span<const double> row) const;
  Matrix apply(const Matrix& rows) const;
  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

/// Throws TooFewRows for fewer than 2 rows.
Standardizer fit_standardizer(const Matrix& rows);

// ---- decision trees -------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  Label label = Label::NAF;
  double af_probability = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeParams {
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
  std::size_t min_leaf = 1;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> row) const;
  Label predict(std::span<const double> row) const { return leaf_for(row).label; }
  std::size_t depth() const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

/// Greedy CART on weighted Gini impurity. Candidate thresholds are midpoints of
/// adjacent distinct values; ties resolve to the lowest feature index, then
/// the lowest threshold. `sample` lists the training rows to use and may
/// repeat rows (bootstrap multiplicity).
DecisionTree train_tree(const Matrix& rows, std::span<const Label> labels,
                        std::span<const std::size_t> sample, const TreeParams& params = {});
DecisionTree train_tree(const Matrix& rows, std::span<const Label> labels,
                        const TreeParams& params = {});

struct BaggingParams {
  std::size_t trees = 30;
  bool bootstrap = true;  // false trains every tree on the full set
  TreeParams tree{};
};

struct BaggedTreesModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> seeds;

  /// Fraction of trees voting AF.
  double score(std::span<const double> row) const;
  Label predict(std::span<const double> row) const { return score(row) >= 0.5 ? Label::AF : Label::NAF; }
  friend bool operator==(const BaggedTreesModel&, const BaggedTreesModel&) = default;
};

BaggedTreesModel train_bagged_trees(const Matrix& rows, std::span<const Label> labels,
                                    const BaggingParams& params, std::uint64_t seed);

// ---- cubic SVM ------------------------------------------------------------

/// (1 + u.v)^3
double cubic_kernel(std::span<const double> u, std::span<const double> v) noexcept;

struct SvmParams {
  double C = 1.0;
  double tol = 1e-3;
  std::size_t max_kernel_evaluations = 1'000'000;
  std::size_t max_iterations = 10'000'000;
};

struct SvmDualSolution {
  std::vector<double> alpha;  // one per training row, in [0, C]
  double bias = 0.0;
  double max_violation = 0.0;  // m(alpha) - M(alpha) at exit
  std::size_t iterations = 0;
  std::size_t kernel_evaluations = 0;
  bool converged = false;
};

/// SMO with second-order working-pair selection on the dual
///   min 1/2 a'Qa - e'a,  0 <= a <= C,  y'a = 0,  Q_ij = y_i y_j K(x_i, x_j),
/// with AF = +1. Stops when the maximal KKT violation is <= tol or a budget is
/// exhausted (converged == false, best iterate returned). Throws SingleClass.
SvmDualSolution solve_svm_dual(const Matrix& rows, std::span<const Label> labels,
                               const SvmParams& params);

struct CubicSvmModel {
  Matrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i
  double bias = 0.0;
  double C = 1.0;
  bool converged = true;

  double decision_value(std::span<const double> row) const;
  Label predict(std::span<const double> row) const {
    return decision_value(row) >= 0.0 ? Label::AF : Label::NAF;
  }
  friend bool operator==(const CubicSvmModel&, const CubicSvmModel&) = default;
};

CubicSvmModel train_cubic_svm(const Matrix& rows, std::span<const Label> labels,
                              const SvmParams& params);

// ---- nearest neighbours ---------------------------------------------------

struct KnnResult {
  Label label = Label::NAF;
  double score = 0.0;  // AF fraction among the k neighbours
};

/// Euclidean k-NN; equal distances go to the lower stored-row index and a
/// split vote goes to AF. Throws BadK unless 1 <= k <= rows.
KnnResult knn_predict(const Matrix& stored, std::span<const Label> labels, std::size_t k,
                      std::span<const double> query);

struct SubspaceParams {
  std::size_t learners = 30;
  std::size_t subspace_dim = 11;
  std::size_t k = 1;
};

struct SubspaceLearner {
  std::vector<std::size_t> features;  // ascending, distinct
  Matrix rows;                        // training rows restricted to `features`
  friend bool operator==(const SubspaceLearner&, const SubspaceLearner&) = default;
};

struct SubspaceKnnModel {
  std::vector<SubspaceLearner> learners;
  std::vector<Label> labels;
  std::vector<std::uint64_t> seeds;
  std::size_t k = 1;

  /// Mean of learner AF votes.
  double score(std::span<const double> row) const;
  Label predict(std::span<const double> row) const { return score(row) >= 0.5 ? Label::AF : Label::NAF; }
  friend bool operator==(const SubspaceKnnModel&, const SubspaceKnnModel&) = default;
};

/// Throws BadSubspace unless 1 <= subspace_dim <= cols and learners >= 1.
SubspaceKnnModel train_subspace_knn(const Matrix& rows, std::span<const Label> labels,
                                    const SubspaceParams& params, std::uint64_t seed);

}  // namespace afdetect::classify
