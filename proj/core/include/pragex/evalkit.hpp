#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pragex/models.hpp"
#include "pragex/schema.hpp"

namespace pragex {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::size_t discarded = 0;  // DISCARD items, excluded from the four cells

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Predicted positive iff p >= threshold.
Confusion confusion(std::span<const double> scores, std::span<const ALLabel> labels, double threshold = 0.5);

// Positive class is explicitation (TRUE).
struct MetricsRow {
  std::string checkpoint;
  std::string language;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_test = 0;
  std::size_t n_discarded = 0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

// Every ratio with a zero denominator is 0.
MetricsRow metrics(const Confusion& c, std::string checkpoint = {}, std::string language = {});

struct TestSet {
  std::string language;
  std::vector<ModelInput> inputs;
  std::vector<ALLabel> labels;
};

// One row per test set, in input order. Throws EmptyTestSet.
std::vector<MetricsRow> cross_lingual_eval(const BinaryClassifier& model, const std::string& checkpoint,
                                           std::span<const TestSet> tests, double threshold = 0.5);

// checkpoint,language,accuracy,precision,recall,f1,n_test,n_discarded
std::string metrics_csv(std::span<const MetricsRow> rows);
nlohmann::ordered_json metrics_json(std::span<const MetricsRow> rows);
nlohmann::ordered_json metrics_to_json(const MetricsRow& row);
MetricsRow metrics_from_json(const nlohmann::ordered_json& j);

struct CurvePoint {
  MetricsRow row;
  double d_accuracy = 0.0;
  double d_precision = 0.0;
  double d_recall = 0.0;
  double d_f1 = 0.0;
};

// Rows keep their order; deltas are taken against the previous row with the
// same language (0 for the first).
std::vector<CurvePoint> learning_curve(std::span<const MetricsRow> rows);
std::string learning_curve_csv(std::span<const CurvePoint> curve);

}  // namespace pragex
