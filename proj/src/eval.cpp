#include "afdetect/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "afdetect/csv.hpp"
#include "afdetect/dataset.hpp"
#include "afdetect/error.hpp"
#include "afdetect/parallel.hpp"
#include "afdetect/random.hpp"
#include "json.hpp"

namespace afdetect::eval {

namespace {

constexpr std::uint64_t kStreamFolds = 0xf01d;
constexpr std::uint64_t kStreamFoldModel = 0xcf;
constexpr std::uint64_t kStreamModel = 0x30de1;
constexpr std::uint64_t kStreamCv = 0xc5;

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string percent_or_dash(const std::optional<double>& v) {
  return v ? format_percent(*v) : std::string("-");
}

}  // namespace

ConfusionMatrix confusion_from_predictions(std::span<const Label> actual,
                                           std::span<const Label> predicted) {
  if (actual.size() != predicted.size()) {
    throw Error(ErrorKind::LengthMismatch, "actual and predicted label counts differ");
  }
  if (actual.empty()) throw Error(ErrorKind::EmptyInput, "no labels to compare");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const bool is_af = actual[i] == Label::AF;
    const bool said_af = predicted[i] == Label::AF;
    if (is_af) {
      ++(said_af ? cm.tp : cm.fn);
    } else {
      ++(said_af ? cm.fp : cm.tn);
    }
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) noexcept {
  return {ratio(cm.tp + cm.tn, cm.total()), ratio(cm.tp, cm.tp + cm.fn), ratio(cm.tn, cm.tn + cm.fp)};
}

double require_metric(const std::optional<double>& value, const char* name) {
  if (!value) throw Error(ErrorKind::UndefinedMetric, std::string(name) + " has a zero denominator");
  return *value;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
  return buf;
}

std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::TooFewPerClass, "cross-validation needs at least 2 folds");
  std::vector<std::size_t> assignment(labels.size(), 0);
  std::size_t next_fold = 0;
  for (Label cls : {Label::AF, Label::NAF}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < folds) {
      throw Error(ErrorKind::TooFewPerClass, "class " + std::string(to_string(cls)) + " has " +
                                                 std::to_string(members.size()) + " rows for " +
                                                 std::to_string(folds) + " folds");
    }
    Rng rng(derive_seed(seed, kStreamFolds, static_cast<std::uint64_t>(cls)));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t idx : members) {
      assignment[idx] = next_fold;
      next_fold = (next_fold + 1) % folds;
    }
  }
  return assignment;
}

double CvResult::mean_accuracy() const {
  if (fold_accuracies.empty()) return 0.0;
  return std::accumulate(fold_accuracies.begin(), fold_accuracies.end(), 0.0) /
         static_cast<double>(fold_accuracies.size());
}

CvResult kfold_cv(const Matrix& rows, std::span<const Label> labels, const ModelConfig& cfg,
                  std::size_t folds, std::uint64_t seed) {
  if (rows.rows() != labels.size()) throw Error(ErrorKind::LengthMismatch, "rows and labels differ");
  CvResult out;
  out.assignment = stratified_folds(labels, folds, seed);
  out.fold_accuracies.assign(folds, 0.0);
  parallel_for(folds, [&](std::size_t f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < labels.size(); ++i) (out.assignment[i] == f ? test : train).push_back(i);
    std::vector<Label> train_labels, test_labels, predicted;
    for (std::size_t i : train) train_labels.push_back(labels[i]);
    const auto model =
        fit_classifier(cfg, rows.select_rows(train), train_labels, derive_seed(seed, kStreamFoldModel, f));
    for (std::size_t i : test) {
      test_labels.push_back(labels[i]);
      predicted.push_back(model.predict(rows.row(i)));
    }
    out.fold_accuracies[f] = *metrics(confusion_from_predictions(test_labels, predicted)).accuracy;
  });
  return out;
}

RocCurve roc_auc(std::span<const double> scores, std::span<const Label> actual) {
  if (scores.size() != actual.size()) throw Error(ErrorKind::LengthMismatch, "scores and labels differ");
  std::size_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw Error(ErrorKind::Degenerate, "non-finite score");
    if (actual[i] == Label::AF) ++pos;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorKind::SingleClass, "ROC needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  double area2 = 0.0;  // twice the area, in units of (1/neg)(1/pos)
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const std::size_t tp0 = tp, fp0 = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i) ++(actual[order[i]] == Label::AF ? tp : fp);
    area2 += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
    roc.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos));
  }
  roc.auc = area2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return roc;
}

std::vector<EvaluationReport> run_experiment(const Matrix& rows, std::span<const Label> labels,
                                             const ExperimentConfig& cfg) {
  if (rows.rows() != labels.size()) throw Error(ErrorKind::LengthMismatch, "rows and labels differ");
  if (cfg.models.empty()) throw Error(ErrorKind::BadConfig, "no models configured");
  const auto split = dataset::stratified_split(labels, cfg.test_fraction, cfg.seed);
  const Matrix train_rows = rows.select_rows(split.train);
  std::vector<Label> train_labels, test_labels;
  for (std::size_t i : split.train) train_labels.push_back(labels[i]);
  for (std::size_t i : split.test) test_labels.push_back(labels[i]);

  std::vector<EvaluationReport> reports(cfg.models.size());
  for (std::size_t m = 0; m < cfg.models.size(); ++m) {
    const ModelConfig& mc = cfg.models[m];
    EvaluationReport& r = reports[m];
    r.kind = mc.kind;
    r.model_name = std::string(display_name(mc.kind));
    r.seed = cfg.seed;
    r.config_hash = cfg.config_hash;
    r.train_size = split.train.size();
    r.test_size = split.test.size();
    const auto stream = static_cast<std::uint64_t>(mc.kind);
    if (cfg.folds > 0) {
      r.cv_fold_accuracies =
          kfold_cv(train_rows, train_labels, mc, cfg.folds, derive_seed(cfg.seed, kStreamCv, stream))
              .fold_accuracies;
    }
    auto model = fit_classifier(mc, train_rows, train_labels, derive_seed(cfg.seed, kStreamModel, stream));
    model.config_hash = cfg.config_hash;
    r.warnings = model.warnings;
    std::vector<double> scores;
    std::vector<Label> predicted;
    for (std::size_t i : split.test) {
      scores.push_back(model.score(rows.row(i)));
      predicted.push_back(model.predict(rows.row(i)));
    }
    r.confusion = confusion_from_predictions(test_labels, predicted);
    r.test = metrics(r.confusion);
    r.roc = roc_auc(scores, test_labels);
    r.auc = r.roc.auc;
  }
  return reports;
}

std::string reports_to_json(std::span<const EvaluationReport> reports) {
  nlohmann::json j;
  j["format"] = "afdetect.report";
  j["version"] = 1;
  if (!reports.empty()) {
    j["config_hash"] = reports.front().config_hash;
    j["seed"] = reports.front().seed;
  }
  nlohmann::json models = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json roc = nlohmann::json::array();
    for (const auto& [fpr, tpr] : r.roc.points) roc.push_back({fpr, tpr});
    models.push_back({
        {"model", to_string(r.kind)},
        {"name", r.model_name},
        {"accuracy", optional_json(r.test.accuracy)},
        {"sensitivity", optional_json(r.test.sensitivity)},
        {"specificity", optional_json(r.test.specificity)},
        {"auc", r.auc},
        {"confusion", {{"tp", r.confusion.tp}, {"fn", r.confusion.fn}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}}},
        {"cv_fold_accuracies", r.cv_fold_accuracies},
        {"train_size", r.train_size},
        {"test_size", r.test_size},
        {"roc", std::move(roc)},
        {"warnings", r.warnings},
    });
  }
  j["models"] = std::move(models);
  return j.dump(2) + "\n";
}

std::string reports_to_table(std::span<const EvaluationReport> reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %9s %12s %12s %7s %8s   %s\n", "Model", "Accuracy", "Sensitivity",
                "Specificity", "AUC", "CV mean", "TP/FN/FP/TN");
  out << line;
  for (const auto& r : reports) {
    std::string cv = "-";
    if (!r.cv_fold_accuracies.empty()) {
      cv = format_percent(std::accumulate(r.cv_fold_accuracies.begin(), r.cv_fold_accuracies.end(), 0.0) /
                          static_cast<double>(r.cv_fold_accuracies.size()));
    }
    std::snprintf(line, sizeof line, "%-14s %9s %12s %12s %7.4f %8s   %zu/%zu/%zu/%zu\n", r.model_name.c_str(),
                  percent_or_dash(r.test.accuracy).c_str(), percent_or_dash(r.test.sensitivity).c_str(),
                  percent_or_dash(r.test.specificity).c_str(), r.auc, cv.c_str(), r.confusion.tp, r.confusion.fn,
                  r.confusion.fp, r.confusion.tn);
    out << line;
  }
  return out.str();
}

}  // namespace afdetect::eval
