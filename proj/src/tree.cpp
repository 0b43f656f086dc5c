#include <algorithm>
#include <numeric>

#include "afdetect/classify.hpp"
#include "afdetect/error.hpp"
#include "afdetect/parallel.hpp"
#include "afdetect/random.hpp"

namespace afdetect::classify {

namespace {

constexpr std::uint64_t kStreamBagging = 0xba99;

__extension__ typedef __int128 Wide;

// Minimising weighted Gini is maximising
//   S = (aL^2 + bL^2) / nL + (aR^2 + bR^2) / nR,
// held here as the exact fraction num / den so equal splits compare equal.
struct SplitScore {
  Wide num = -1;
  Wide den = 1;
  bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
};

SplitScore score_split(std::int64_t af_left, std::int64_t naf_left, std::int64_t af_right,
                       std::int64_t naf_right) {
  const Wide n_left = af_left + naf_left;
  const Wide n_right = af_right + naf_right;
  const Wide sq_left = Wide(af_left) * af_left + Wide(naf_left) * naf_left;
  const Wide sq_right = Wide(af_right) * af_right + Wide(naf_right) * naf_right;
  return {sq_left * n_right + sq_right * n_left, n_left * n_right};
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& rows, std::span<const Label> labels, const TreeParams& params)
      : rows_(rows), labels_(labels), params_(params) {}

  DecisionTree build(std::vector<std::size_t> sample) {
    grow(std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> sample, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::int64_t af = 0;
    for (std::size_t i : sample) af += labels_[i] == Label::AF ? 1 : 0;
    const auto n = static_cast<std::int64_t>(sample.size());
    {
      TreeNode& node = tree_.nodes.back();
      node.af_probability = static_cast<double>(af) / static_cast<double>(n);
      node.label = 2 * af >= n ? Label::AF : Label::NAF;
    }

    const bool pure = af == 0 || af == n;
    if (pure || depth >= params_.max_depth) return id;

    const auto min_leaf = static_cast<std::int64_t>(std::max<std::size_t>(params_.min_leaf, 1));
    SplitScore best;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> order(sample);
    for (std::size_t f = 0; f < rows_.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return rows_(a, f) < rows_(b, f); });
      std::int64_t af_left = 0;
      std::int64_t n_left = 0;
      for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
        af_left += labels_[order[pos]] == Label::AF ? 1 : 0;
        ++n_left;
        const double here = rows_(order[pos], f);
        const double next = rows_(order[pos + 1], f);
        if (!(here < next)) continue;
        if (n_left < min_leaf || n - n_left < min_leaf) continue;
        const SplitScore s = score_split(af_left, n_left - af_left, af - af_left,
                                         (n - n_left) - (af - af_left));
        if (s.better_than(best)) {
          best = s;
          best_feature = static_cast<int>(f);
          best_threshold = here + (next - here) / 2.0;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : sample) {
      (rows_(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(i);
    }
    sample.clear();
    sample.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Matrix& rows_;
  std::span<const Label> labels_;
  TreeParams params_;
  DecisionTree tree_;
};

}  // namespace

const TreeNode& DecisionTree::leaf_for(std::span<const double> row) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    const bool go_left = row[static_cast<std::size_t>(node->feature)] <= node->threshold;
    node = &nodes[static_cast<std::size_t>(go_left ? node->left : node->right)];
  }
  return *node;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

DecisionTree train_tree(const Matrix& rows, std::span<const Label> labels,
                        std::span<const std::size_t> sample, const TreeParams& params) {
  if (rows.rows() == 0 || sample.empty()) throw Error(ErrorKind::EmptyInput, "tree needs at least one row");
  if (labels.size() != rows.rows()) throw Error(ErrorKind::LengthMismatch, "rows and labels differ in length");
  return TreeBuilder(rows, labels, params).build({sample.begin(), sample.end()});
}

DecisionTree train_tree(const Matrix& rows, std::span<const Label> labels, const TreeParams& params) {
  std::vector<std::size_t> all(rows.rows());
  std::iota(all.begin(), all.end(), 0);
  return train_tree(rows, labels, all, params);
}

double BaggedTreesModel::score(std::span<const double> row) const {
  std::size_t votes = 0;
  for (const auto& t : trees) votes += t.predict(row) == Label::AF ? 1 : 0;
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

BaggedTreesModel train_bagged_trees(const Matrix& rows, std::span<const Label> labels,
                                    const BaggingParams& params, std::uint64_t seed) {
  if (rows.rows() == 0) throw Error(ErrorKind::EmptyInput, "bagging needs at least one row");
  if (params.trees < 1) throw Error(ErrorKind::BadConfig, "bagging needs at least one tree");
  const std::size_t n = rows.rows();
  BaggedTreesModel model;
  model.trees.resize(params.trees);
  model.seeds.resize(params.trees);
  for (std::size_t t = 0; t < params.trees; ++t) model.seeds[t] = derive_seed(seed, kStreamBagging, t);

  parallel_for(params.trees, [&](std::size_t t) {
    std::vector<std::size_t> sample(n);
    if (params.bootstrap) {
      Rng rng(model.seeds[t]);
      for (auto& s : sample) s = static_cast<std::size_t>(rng.below(n));
    } else {
      std::iota(sample.begin(), sample.end(), 0);
    }
    model.trees[t] = train_tree(rows, labels, sample, params.tree);
  });
  return model;
}

}  // namespace afdetect::classify
