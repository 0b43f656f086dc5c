#include <algorithm>
#include <numeric>

#include "afdetect/classify.hpp"
#include "afdetect/error.hpp"
#include "afdetect/random.hpp"

namespace afdetect::classify {

namespace {

constexpr std::uint64_t kStreamSubspace = 0x50b5;

}  // namespace

KnnResult knn_predict(const Matrix& stored, std::span<const Label> labels, std::size_t k,
                      std::span<const double> query) {
  const std::size_t n = stored.rows();
  if (k < 1 || k > n) {
    throw Error(ErrorKind::BadK, "k = " + std::to_string(k) + " with " + std::to_string(n) + " stored rows");
  }
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    const auto r = stored.row(i);
    for (std::size_t c = 0; c < r.size(); ++c) {
      const double diff = r[c] - query[c];
      d += diff * diff;
    }
    dist[i] = d;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto closer = [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end(), closer);

  std::size_t af_votes = 0;
  for (std::size_t i = 0; i < k; ++i) af_votes += labels[order[i]] == Label::AF ? 1 : 0;
  KnnResult result;
  result.score = static_cast<double>(af_votes) / static_cast<double>(k);
  result.label = 2 * af_votes >= k ? Label::AF : Label::NAF;
  return result;
}

double SubspaceKnnModel::score(std::span<const double> row) const {
  std::size_t votes = 0;
  std::vector<double> projected;
  for (const auto& learner : learners) {
    projected.resize(learner.features.size());
    for (std::size_t c = 0; c < learner.features.size(); ++c) projected[c] = row[learner.features[c]];
    votes += knn_predict(learner.rows, labels, k, projected).label == Label::AF ? 1 : 0;
  }
  return static_cast<double>(votes) / static_cast<double>(learners.size());
}

SubspaceKnnModel train_subspace_knn(const Matrix& rows, std::span<const Label> labels,
                                    const SubspaceParams& params, std::uint64_t seed) {
  const std::size_t p = rows.cols();
  if (params.learners < 1) throw Error(ErrorKind::BadSubspace, "need at least one learner");
  if (params.subspace_dim < 1 || params.subspace_dim > p) {
    throw Error(ErrorKind::BadSubspace, "subspace dimension " + std::to_string(params.subspace_dim) +
                                            " outside [1, " + std::to_string(p) + "]");
  }
  if (params.k < 1 || params.k > rows.rows()) {
    throw Error(ErrorKind::BadK, "k = " + std::to_string(params.k) + " with " +
                                     std::to_string(rows.rows()) + " training rows");
  }
  if (labels.size() != rows.rows()) throw Error(ErrorKind::LengthMismatch, "rows and labels differ in length");

  SubspaceKnnModel model;
  model.k = params.k;
  model.labels.assign(labels.begin(), labels.end());
  for (std::size_t l = 0; l < params.learners; ++l) {
    const std::uint64_t s = derive_seed(seed, kStreamSubspace, l);
    Rng rng(s);
    std::vector<std::size_t> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates: the first subspace_dim slots become the sample.
    for (std::size_t i = 0; i < params.subspace_dim; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(p - i));
      std::swap(pool[i], pool[j]);
    }
    SubspaceLearner learner;
    learner.features.assign(pool.begin(), pool.begin() + static_cast<long>(params.subspace_dim));
    std::sort(learner.features.begin(), learner.features.end());
    learner.rows = Matrix(rows.rows(), learner.features.size());
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      for (std::size_t c = 0; c < learner.features.size(); ++c) learner.rows(r, c) = rows(r, learner.features[c]);
    }
    model.learners.push_back(std::move(learner));
    model.seeds.push_back(s);
  }
  return model;
}

}  // namespace afdetect::classify
