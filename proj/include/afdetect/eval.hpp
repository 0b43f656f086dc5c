#pragma once

// Hold-out and k-fold evaluation. AF is the positive class throughout.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afdetect/label.hpp"
#include "afdetect/matrix.hpp"
#include "afdetect/model.hpp"

namespace afdetect::eval {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fn + fp + tn; }
  /// The same outcome with NAF taken as the positive class.
  ConfusionMatrix swapped() const noexcept { return {tn, fp, fn, tp}; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws LengthMismatch for unequal lengths and EmptyInput for empty input.
ConfusionMatrix confusion_from_predictions(std::span<const Label> actual,
                                           std::span<const Label> predicted);

/// A metric whose denominator is zero is absent rather than zero.
struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

Metrics metrics(const ConfusionMatrix& cm) noexcept;

/// Unwraps an optional metric, throwing UndefinedMetric when absent.
double require_metric(const std::optional<double>& value, const char* name);

/// Fraction in [0, 1] as a percentage with two decimals ("97.94").
std::string format_percent(double fraction);

/// Fold index for every row. Each class is shuffled with its own seeded stream
/// and dealt round-robin; the second class continues where the first stopped
/// so total fold sizes differ by at most one. Throws TooFewPerClass when
/// folds < 2 or any present class has fewer than `folds` rows.
std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t folds,
                                          std::uint64_t seed);

struct CvResult {
  std::vector<double> fold_accuracies;
  std::vector<std::size_t> assignment;

  double mean_accuracy() const;
};

/// Refits standardizer and model per fold on the training portion only.
CvResult kfold_cv(const Matrix& rows, std::span<const Label> labels, const ModelConfig& cfg,
                  std::size_t folds, std::uint64_t seed);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr) from (0,0) to (1,1)
  double auc = 0.0;
};

/// Threshold sweep over distinct scores, descending; tied scores form a single
/// step. Throws SingleClass unless both classes are present, Degenerate for
/// non-finite scores.
RocCurve roc_auc(std::span<const double> scores, std::span<const Label> actual);

struct ExperimentConfig {
  double test_fraction = 0.2;
  std::size_t folds = 10;  // 0 disables cross-validation
  std::uint64_t seed = 0;
  std::vector<ModelConfig> models;
  std::string config_hash;
};

struct EvaluationReport {
  ModelKind kind = ModelKind::BaggedTrees;
  std::string model_name;
  Metrics test;
  double auc = 0.0;
  ConfusionMatrix confusion;
  std::vector<double> cv_fold_accuracies;
  RocCurve roc;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::string> warnings;
};

/// Stratified hold-out split, CV on the training portion, fit on the whole
/// training portion, then test confusion, metrics and ROC. Reports follow the
/// order of `cfg.models`.
std::vector<EvaluationReport> run_experiment(const Matrix& rows, std::span<const Label> labels,
                                             const ExperimentConfig& cfg);

std::string reports_to_json(std::span<const EvaluationReport> reports);
std::string reports_to_table(std::span<const EvaluationReport> reports);

}  // namespace afdetect::eval
