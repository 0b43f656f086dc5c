#include "afdetect/model.hpp"

#include <fstream>
#include <sstream>

#include "afdetect/error.hpp"
#include "json.hpp"

namespace afdetect {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "afdetect.model";

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) throw Error(ErrorKind::BadConfig, "model matrix size mismatch");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  }
  return m;
}

std::vector<int> labels_to_ints(std::span<const Label> labels) {
  std::vector<int> out;
  for (Label l : labels) out.push_back(static_cast<int>(l));
  return out;
}

std::vector<Label> labels_from_json(const json& j) {
  std::vector<Label> out;
  for (int v : j.get<std::vector<int>>()) out.push_back(v == 1 ? Label::AF : Label::NAF);
  return out;
}

json tree_to_json(const classify::DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, static_cast<int>(n.label), n.af_probability});
  }
  return nodes;
}

classify::DecisionTree tree_from_json(const json& j) {
  classify::DecisionTree t;
  for (const auto& n : j) {
    classify::TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.label = n.at(4).get<int>() == 1 ? Label::AF : Label::NAF;
    node.af_probability = n.at(5).get<double>();
    t.nodes.push_back(node);
  }
  return t;
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::BaggedTrees: return "bagged_trees";
    case ModelKind::CubicSvm: return "cubic_svm";
    case ModelKind::SubspaceKnn: return "subspace_knn";
  }
  return "unknown";
}

std::string_view display_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::BaggedTrees: return "Bagged Trees";
    case ModelKind::CubicSvm: return "Cubic SVM";
    case ModelKind::SubspaceKnn: return "Subspace KNN";
  }
  return "Unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind k : {ModelKind::BaggedTrees, ModelKind::CubicSvm, ModelKind::SubspaceKnn}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::BadConfig, "unknown model '" + std::string(name) + "'");
}

double TrainedClassifier::score(std::span<const double> raw_row) const {
  std::vector<double> scaled;
  std::span<const double> row = raw_row;
  if (standardizer) {
    scaled = standardizer->apply(raw_row);
    row = scaled;
  }
  return std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, classify::CubicSvmModel>) {
          return m.decision_value(row);
        } else {
          return m.score(row);
        }
      },
      model);
}

Label TrainedClassifier::predict(std::span<const double> raw_row) const {
  const double s = score(raw_row);
  const double cut = kind == ModelKind::CubicSvm ? 0.0 : 0.5;
  return s >= cut ? Label::AF : Label::NAF;
}

TrainedClassifier fit_classifier(const ModelConfig& cfg, const Matrix& rows,
                                 std::span<const Label> labels, std::uint64_t seed) {
  TrainedClassifier out;
  out.kind = cfg.kind;
  out.seed = seed;
  switch (cfg.kind) {
    case ModelKind::BaggedTrees:
      out.model = classify::train_bagged_trees(rows, labels, cfg.bagging, seed);
      break;
    case ModelKind::CubicSvm: {
      out.standardizer = classify::fit_standardizer(rows);
      auto svm = classify::train_cubic_svm(out.standardizer->apply(rows), labels, cfg.svm);
      if (!svm.converged) out.warnings.push_back("SMO stopped at its budget before reaching tolerance");
      out.model = std::move(svm);
      break;
    }
    case ModelKind::SubspaceKnn:
      out.standardizer = classify::fit_standardizer(rows);
      out.model = classify::train_subspace_knn(out.standardizer->apply(rows), labels, cfg.subspace, seed);
      break;
  }
  return out;
}

std::string serialize_model(const TrainedClassifier& m) {
  json j;
  j["format"] = kFormatName;
  j["version"] = TrainedClassifier::kFormatVersion;
  j["kind"] = to_string(m.kind);
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  if (m.standardizer) {
    j["standardizer"] = {{"mean", m.standardizer->mean}, {"std", m.standardizer->std}};
  } else {
    j["standardizer"] = nullptr;
  }
  json body;
  std::visit(
      [&](const auto& model) {
        using M = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<M, classify::BaggedTreesModel>) {
          body["seeds"] = model.seeds;
          body["trees"] = json::array();
          for (const auto& t : model.trees) body["trees"].push_back(tree_to_json(t));
        } else if constexpr (std::is_same_v<M, classify::CubicSvmModel>) {
          body["support_vectors"] = matrix_to_json(model.support_vectors);
          body["dual_coef"] = model.dual_coef;
          body["bias"] = model.bias;
          body["C"] = model.C;
          body["converged"] = model.converged;
        } else {
          body["k"] = model.k;
          body["labels"] = labels_to_ints(model.labels);
          body["seeds"] = model.seeds;
          body["learners"] = json::array();
          for (const auto& l : model.learners) {
            body["learners"].push_back({{"features", l.features}, {"rows", matrix_to_json(l.rows)}});
          }
        }
      },
      m.model);
  j["model"] = std::move(body);
  return j.dump(1);
}

TrainedClassifier deserialize_model(std::string_view text) {
  TrainedClassifier m;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormatName) throw Error(ErrorKind::BadConfig, "not a model file");
    if (j.at("version").get<int>() != TrainedClassifier::kFormatVersion) {
      throw Error(ErrorKind::BadConfig, "unsupported model format version");
    }
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("standardizer").is_null()) {
      classify::Standardizer st;
      st.mean = j["standardizer"].at("mean").get<std::vector<double>>();
      st.std = j["standardizer"].at("std").get<std::vector<double>>();
      m.standardizer = std::move(st);
    }
    const json& body = j.at("model");
    switch (m.kind) {
      case ModelKind::BaggedTrees: {
        classify::BaggedTreesModel b;
        b.seeds = body.at("seeds").get<std::vector<std::uint64_t>>();
        for (const auto& t : body.at("trees")) b.trees.push_back(tree_from_json(t));
        m.model = std::move(b);
        break;
      }
      case ModelKind::CubicSvm: {
        classify::CubicSvmModel s;
        s.support_vectors = matrix_from_json(body.at("support_vectors"));
        s.dual_coef = body.at("dual_coef").get<std::vector<double>>();
        s.bias = body.at("bias").get<double>();
        s.C = body.at("C").get<double>();
        s.converged = body.at("converged").get<bool>();
        m.model = std::move(s);
        break;
      }
      case ModelKind::SubspaceKnn: {
        classify::SubspaceKnnModel k;
        k.k = body.at("k").get<std::size_t>();
        k.labels = labels_from_json(body.at("labels"));
        k.seeds = body.at("seeds").get<std::vector<std::uint64_t>>();
        for (const auto& l : body.at("learners")) {
          classify::SubspaceLearner learner;
          learner.features = l.at("features").get<std::vector<std::size_t>>();
          learner.rows = matrix_from_json(l.at("rows"));
          k.learners.push_back(std::move(learner));
        }
        m.model = std::move(k);
        break;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadConfig, std::string("malformed model file: ") + e.what());
  }
  return m;
}

void save_model(const std::filesystem::path& path, const TrainedClassifier& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << serialize_model(m) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

TrainedClassifier load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace afdetect
