#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pragex/evalkit.hpp"
#include "pragex/instances.hpp"
#include "pragex/models.hpp"
#include "pragex/rng.hpp"
#include "pragex/strategies.hpp"

namespace pragex {

enum class CheckpointTag { L0, L8, L13, L14 };

std::string_view checkpoint_name(CheckpointTag tag);
CheckpointTag parse_checkpoint(std::string_view name);

struct Checkpoint {
  CheckpointTag tag = CheckpointTag::L0;
  std::size_t round = 0;
  nlohmann::ordered_json model;
  std::size_t labeled_size = 0;
  MetricsRow metrics;
};

struct LabelCounts {
  std::size_t true_count = 0;
  std::size_t false_count = 0;
  std::size_t discard_count = 0;

  std::size_t total() const noexcept { return true_count + false_count + discard_count; }
  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

struct RoundLog {
  std::size_t round = 0;
  std::string phase;  // "combined", "uncertainty" or "augment"
  QueryBatch batch;
  LabelCounts labels;
  std::size_t labeled_size = 0;
  double retrain_seconds = 0.0;
  MetricsRow metrics;
};

// Run manifest. Everything that shapes a run lives here and is stored with
// the state so a run can be replayed.
struct RunManifest {
  std::uint64_t seed = 13;
  StrategyConfig strategy;
  // Strategy groups for the combined rounds, cycled by round.
  std::vector<std::vector<Strategy>> rotation = {
      {Strategy::HighConfidencePositives, Strategy::EmbeddingClusters, Strategy::DiverseSeedExpansion},
      {Strategy::NearestPositiveNeighbors, Strategy::LowConfidence},
      {Strategy::HighConfidencePositives, Strategy::NearestPositiveNeighbors},
      {Strategy::EmbeddingClusters, Strategy::LowConfidence},
  };
  std::size_t combined_rounds = 8;
  std::size_t combined_batch = 100;
  std::size_t uncertainty_rounds = 5;
  std::size_t uncertainty_batch = 50;
  std::size_t seed_size = 100;
  std::size_t test_size = 300;
  std::size_t seed_positives = 33;
  std::size_t augment_size = 1000;
  // Nearest-positive anchors: the most distant few positives early on, all
  // positives from this round onward.
  std::size_t npn_early_anchors = 5;
  std::size_t npn_all_positives_from_round = 3;
  // Control arm: every round samples uniformly at random.
  bool random_control = false;
  int epochs = 10;
  BaselineConfig baseline;
  double eval_threshold = 0.5;
  std::string separator = std::string(kDefaultSeparator);

  std::size_t total_rounds() const noexcept { return combined_rounds + uncertainty_rounds; }

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::ordered_json& j);
};

RunManifest load_manifest(const std::filesystem::path& path);

struct Splits {
  std::vector<AnnotatedRecord> seed;
  std::vector<AnnotatedRecord> test;
  std::vector<AnnotatedRecord> remainder;
};

// Seed gets exactly `seed_positives` TRUE and the rest FALSE records; the
// test set is a uniform draw from everything left. Throws
// InsufficientPositives.
Splits make_splits(const std::vector<AnnotatedRecord>& annotated, Rng& rng, std::size_t seed_size = 100,
                   std::size_t test_size = 300, std::size_t seed_positives = 33);

struct ALState {
  std::size_t round = 0;
  std::map<std::string, AnnotatedRecord> labeled;  // seed and every merged label, DISCARD included
  std::vector<std::string> seed_ids;
  std::vector<std::string> pool;                   // sorted, disjoint from labeled and test
  std::vector<std::string> test;                   // frozen at creation
  std::map<std::string, AnnotatedRecord> test_records;
  std::vector<RoundLog> history;
  std::vector<Checkpoint> checkpoints;
  std::optional<QueryBatch> pending;
  nlohmann::ordered_json model;  // classifier snapshot after the last fit
  Rng rng;
  RunManifest manifest;

  const Checkpoint* checkpoint(CheckpointTag tag) const;
};

// Returns the labels for a batch. Implementations may throw LabelSinkTimeout.
class LabelSink {
 public:
  virtual ~LabelSink() = default;
  virtual std::vector<AnnotatedRecord> label(const QueryBatch& batch, const InstanceStore& store) = 0;
};

// Labels every id with an oracle function; the unattended stand-in for a
// human annotator.
class ScriptedLabelSink final : public LabelSink {
 public:
  using Oracle = std::function<AnnotatedRecord(const Instance&)>;
  explicit ScriptedLabelSink(Oracle oracle) : oracle_(std::move(oracle)) {}
  std::vector<AnnotatedRecord> label(const QueryBatch& batch, const InstanceStore& store) override;

 private:
  Oracle oracle_;
};

// Answers from a fixed set of gold records.
class GoldLabelSink final : public LabelSink {
 public:
  explicit GoldLabelSink(const std::vector<AnnotatedRecord>& gold);
  std::vector<AnnotatedRecord> label(const QueryBatch& batch, const InstanceStore& store) override;

 private:
  std::unordered_map<std::string, AnnotatedRecord> gold_;
};

struct PoolPrediction {
  std::string id;
  double p = 0.0;
  std::string source;
  std::string target;
  std::vector<TokenRange> spans;  // addition spans offered for spot checks
};

nlohmann::ordered_json pool_prediction_to_json(const PoolPrediction& p);

class Engine {
 public:
  Engine(const InstanceStore& store, std::unique_ptr<BinaryClassifier> classifier,
         std::shared_ptr<const SentenceEmbedder> embedder);

  // Splits the annotated records, trains L0 on the seed and records it.
  // pool_ids are the unlabeled instances; remainder records join the pool.
  ALState initialize(const RunManifest& manifest, const std::vector<AnnotatedRecord>& annotated,
                     const std::vector<std::string>& pool_ids);

  // Composes the next batch and parks it in state.pending.
  ALState propose(ALState state);
  // Validates and merges labels for the pending batch, retrains from
  // scratch, evaluates and advances the round. Any invalid label rejects the
  // whole submission (ValidationFailure) and leaves the input state intact.
  ALState apply_labels(ALState state, const std::vector<AnnotatedRecord>& labels);

  ALState run_round(ALState state, LabelSink& sink);
  // Runs every remaining round up to combined + uncertainty rounds.
  ALState run_schedule(ALState state, LabelSink& sink);
  // Uniform sample of extra_n pool instances, labeled, merged, retrained; L14.
  ALState augment(ALState state, LabelSink& sink, std::size_t extra_n);

  std::vector<PoolPrediction> final_predict(const ALState& state, double threshold = 0.5);
  MetricsRow evaluate(const ALState& state, const std::string& checkpoint = {});
  std::vector<double> score(const ALState& state, const std::vector<std::string>& ids);

  const InstanceStore& store() const noexcept { return store_; }

 private:
  QueryBatch compose_for_round(ALState& state, std::size_t round);
  void merge_and_retrain(ALState& state, const QueryBatch& batch, const std::vector<AnnotatedRecord>& labels,
                         const std::string& phase);
  void fit(ALState& state);
  void sync(const ALState& state);
  PoolView pool_view(const ALState& state);
  PositiveSet positives(const ALState& state) const;
  std::span<const double> embedding(const std::string& id) const;

  const InstanceStore& store_;
  std::unique_ptr<BinaryClassifier> classifier_;
  std::shared_ptr<const SentenceEmbedder> embedder_;
  DenseMatrix embeddings_;
  std::unordered_map<std::string, std::size_t> embedding_row_;
  nlohmann::ordered_json synced_model_;
};

// Timing is excluded from the canonical form so replays compare equal.
nlohmann::ordered_json round_log_to_json(const RoundLog& log, bool include_timing = true);
RoundLog round_log_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json state_to_json(const ALState& state);
ALState state_from_json(const nlohmann::ordered_json& j);
void save_state(const ALState& state, const std::filesystem::path& path);
ALState load_state(const std::filesystem::path& path);

}  // namespace pragex
