#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pragex/corpus.hpp"
#include "pragex/dense.hpp"
#include "pragex/schema.hpp"
#include "pragex/tagger.hpp"

namespace pragex {

inline constexpr std::string_view kDefaultSeparator = "⟐SEP⟐";

// source, separator and target joined by single spaces.
struct PackedInstance {
  std::string pair_id;
  std::string text;

  friend bool operator==(const PackedInstance&, const PackedInstance&) = default;
};

PackedInstance pack(const SentencePair& pair, std::string_view separator = kDefaultSeparator);
PackedInstance pack_texts(std::string_view pair_id, std::string_view source, std::string_view target,
                          std::string_view separator = kDefaultSeparator);

struct ClassifierScore {
  double p_positive = 0.0;
};

enum class Feature : std::size_t {
  NullTokens,
  FracNull,
  NullNouns,
  NullPropns,
  NullProns,
  HasNeSrc,
  HasNeTgt,
  LengthRatio,
  ParenthesisInTarget,
  BracketAddition,
  DigitTokenDelta,
  UnitLexiconHits,
};

inline constexpr std::size_t kFeatureCount = 12;

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }

  static const std::array<std::string_view, kFeatureCount>& names();

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

nlohmann::ordered_json features_to_json(const FeatureVector& f);
FeatureVector features_from_json(const nlohmann::ordered_json& j);

// mile, feet, lb, pound, degree, knot, km, kg, m; plural "s" and a leading
// number ("1.6km") are stripped before lookup.
bool is_unit_token(std::string_view token);

FeatureVector featurize(const SentencePair& pair, const AlignmentSet& alignment, const Tagger& tagger);

// Logistic-loss linear model trained by full-batch gradient descent on
// standardized features. Positives are weighted by min(n_neg / n_pos, cap).
//
// Each epoch runs steps_per_epoch gradient steps over the whole training
// set. The objective is L-smooth with
//   L = 0.25 * sum_i w_i (|z_i|^2 + 1) / sum_i w_i + l2
// (z_i standardized rows); any lr < 2 / L keeps the training loss
// non-increasing. lr <= 0 selects 1 / L.
struct BaselineConfig {
  int epochs = 10;
  int steps_per_epoch = 100;
  double lr = 0.0;
  double l2 = 1e-3;
  double max_positive_weight = 10.0;
  std::uint64_t seed = 0;
};

struct LogisticModel {
  std::vector<double> weights;  // in standardized space
  double bias = 0.0;
  std::vector<double> mean;
  std::vector<double> scale;
  double positive_weight = 1.0;
  double learning_rate = 0.0;
  double smoothness = 0.0;
  // Objective before training and after each epoch.
  std::vector<double> epoch_loss;

  // Weight on the raw (unstandardized) feature.
  double raw_weight(std::size_t i) const { return weights[i] / scale[i]; }

  nlohmann::ordered_json to_json() const;
  static LogisticModel from_json(const nlohmann::ordered_json& j);

  friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

// DISCARD rows are dropped before anything else. Throws DegenerateLabels when
// the remaining labels are single-class.
LogisticModel baseline_fit(const DenseMatrix& features, std::span<const ALLabel> labels, const BaselineConfig& config);
std::vector<double> baseline_predict(const LogisticModel& model, const DenseMatrix& features);

struct ModelInput {
  PackedInstance packed;
  FeatureVector features;
};

struct LabeledInput {
  ModelInput input;
  ALLabel label = ALLabel::False;
};

class BinaryClassifier {
 public:
  virtual ~BinaryClassifier() = default;

  virtual std::string kind() const = 0;
  // DISCARD instances are ignored.
  virtual void fit(std::span<const LabeledInput> data, int epochs, std::uint64_t seed) = 0;
  virtual std::vector<ClassifierScore> predict(std::span<const ModelInput> inputs) const = 0;
  virtual bool trained() const = 0;

  virtual nlohmann::ordered_json snapshot() const = 0;
  virtual void restore(const nlohmann::ordered_json& snapshot) = 0;
};

class BaselineClassifier final : public BinaryClassifier {
 public:
  explicit BaselineClassifier(BaselineConfig config = {}) : config_(config) {}

  std::string kind() const override { return "baseline"; }
  void fit(std::span<const LabeledInput> data, int epochs, std::uint64_t seed) override;
  std::vector<ClassifierScore> predict(std::span<const ModelInput> inputs) const override;
  bool trained() const override { return !model_.weights.empty(); }

  nlohmann::ordered_json snapshot() const override;
  void restore(const nlohmann::ordered_json& snapshot) override;

  const LogisticModel& model() const { return model_; }

 private:
  BaselineConfig config_;
  LogisticModel model_;
};

class SentenceEmbedder {
 public:
  virtual ~SentenceEmbedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> embed(const PackedInstance& instance) const = 0;
};

// Signed feature hashing of lowercased tokens and character trigrams, with
// source and target hashed into disjoint salt spaces; L2 normalized.
class HashingEmbedder final : public SentenceEmbedder {
 public:
  explicit HashingEmbedder(std::size_t dimension = 64, std::string separator = std::string(kDefaultSeparator))
      : dimension_(dimension), separator_(std::move(separator)) {}

  std::size_t dimension() const override { return dimension_; }
  std::vector<double> embed(const PackedInstance& instance) const override;

 private:
  std::size_t dimension_;
  std::string separator_;
};

DenseMatrix embed_all(const SentenceEmbedder& embedder, std::span<const PackedInstance> instances);

// Stable 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text, std::uint64_t salt = 0);

}  // namespace pragex
