#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "afdetect/classify.hpp"

namespace afdetect {

enum class ModelKind { BaggedTrees, CubicSvm, SubspaceKnn };

std::string_view to_string(ModelKind kind) noexcept;   // "bagged_trees", ...
std::string_view display_name(ModelKind kind) noexcept;  // "Bagged Trees", ...
ModelKind parse_model_kind(std::string_view name);

struct ModelConfig {
  ModelKind kind = ModelKind::BaggedTrees;
  classify::BaggingParams bagging{};
  classify::SvmParams svm{};
  classify::SubspaceParams subspace{};
};

/// A fitted model together with the preprocessing it expects.
struct TrainedClassifier {
  static constexpr int kFormatVersion = 1;

  ModelKind kind = ModelKind::BaggedTrees;
  std::optional<classify::Standardizer> standardizer;  // SVM and KNN only
  std::variant<classify::BaggedTreesModel, classify::CubicSvmModel, classify::SubspaceKnnModel> model;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  /// Vote fraction (trees, KNN) or SVM decision value; larger means more AF.
  double score(std::span<const double> raw_row) const;
  Label predict(std::span<const double> raw_row) const;
};

TrainedClassifier fit_classifier(const ModelConfig& cfg, const Matrix& rows,
                                 std::span<const Label> labels, std::uint64_t seed);

/// Self-describing JSON; doubles are written in shortest round-trip form, so
/// save -> load -> predict is bit-identical.
std::string serialize_model(const TrainedClassifier& m);
TrainedClassifier deserialize_model(std::string_view text);
void save_model(const std::filesystem::path& path, const TrainedClassifier& m);
TrainedClassifier load_model(const std::filesystem::path& path);

}  // namespace afdetect
