#include "pragex/engine.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <unordered_set>

#include "pragex/error.hpp"

namespace pragex {

std::string_view checkpoint_name(CheckpointTag tag) {
  switch (tag) {
    case CheckpointTag::L0: return "L0";
    case CheckpointTag::L8: return "L8";
    case CheckpointTag::L13: return "L13";
    case CheckpointTag::L14: return "L14";
  }
  return "L0";
}

CheckpointTag parse_checkpoint(std::string_view name) {
  for (auto t : {CheckpointTag::L0, CheckpointTag::L8, CheckpointTag::L13, CheckpointTag::L14})
    if (checkpoint_name(t) == name) return t;
  throw Error(Errc::InvalidState, "unknown checkpoint '" + std::string(name) + "'");
}

const Checkpoint* ALState::checkpoint(CheckpointTag tag) const {
  for (const auto& c : checkpoints)
    if (c.tag == tag) return &c;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Manifest

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json rot = nlohmann::ordered_json::array();
  for (const auto& group : rotation) {
    nlohmann::ordered_json g = nlohmann::ordered_json::array();
    for (auto s : group) g.push_back(std::string(strategy_name(s)));
    rot.push_back(std::move(g));
  }
  return {
      {"seed", seed},
      {"strategy",
       {{"confidence_threshold", strategy.confidence_threshold},
        {"k_clusters", strategy.k_clusters},
        {"knn_k", strategy.knn_k},
        {"diversity_cutoff", strategy.diversity_cutoff},
        {"kmeans_iterations", strategy.kmeans_iterations},
        {"kmeans_batch", strategy.kmeans_batch},
        {"rng_seed", strategy.rng_seed}}},
      {"rotation", std::move(rot)},
      {"combined_rounds", combined_rounds},
      {"combined_batch", combined_batch},
      {"uncertainty_rounds", uncertainty_rounds},
      {"uncertainty_batch", uncertainty_batch},
      {"seed_size", seed_size},
      {"test_size", test_size},
      {"seed_positives", seed_positives},
      {"augment_size", augment_size},
      {"npn_early_anchors", npn_early_anchors},
      {"npn_all_positives_from_round", npn_all_positives_from_round},
      {"random_control", random_control},
      {"epochs", epochs},
      {"baseline",
       {{"steps_per_epoch", baseline.steps_per_epoch},
        {"lr", baseline.lr},
        {"l2", baseline.l2},
        {"max_positive_weight", baseline.max_positive_weight}}},
      {"eval_threshold", eval_threshold},
      {"separator", separator},
  };
}

RunManifest RunManifest::from_json(const nlohmann::ordered_json& j) {
  RunManifest m;
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  try {
    get("seed", m.seed);
    if (j.contains("strategy")) {
      const auto& s = j.at("strategy");
      auto sget = [&](const char* key, auto& out) {
        if (s.contains(key)) out = s.at(key).get<std::decay_t<decltype(out)>>();
      };
      sget("confidence_threshold", m.strategy.confidence_threshold);
      sget("k_clusters", m.strategy.k_clusters);
      sget("knn_k", m.strategy.knn_k);
      sget("diversity_cutoff", m.strategy.diversity_cutoff);
      sget("kmeans_iterations", m.strategy.kmeans_iterations);
      sget("kmeans_batch", m.strategy.kmeans_batch);
      sget("rng_seed", m.strategy.rng_seed);
    }
    if (j.contains("rotation")) {
      m.rotation.clear();
      for (const auto& g : j.at("rotation")) {
        std::vector<Strategy> group;
        for (const auto& s : g) group.push_back(parse_strategy(s.get<std::string>()));
        m.rotation.push_back(std::move(group));
      }
    }
    get("combined_rounds", m.combined_rounds);
    get("combined_batch", m.combined_batch);
    get("uncertainty_rounds", m.uncertainty_rounds);
    get("uncertainty_batch", m.uncertainty_batch);
    get("seed_size", m.seed_size);
    get("test_size", m.test_size);
    get("seed_positives", m.seed_positives);
    get("augment_size", m.augment_size);
    get("npn_early_anchors", m.npn_early_anchors);
    get("npn_all_positives_from_round", m.npn_all_positives_from_round);
    get("random_control", m.random_control);
    get("epochs", m.epochs);
    if (j.contains("baseline")) {
      const auto& b = j.at("baseline");
      if (b.contains("steps_per_epoch")) m.baseline.steps_per_epoch = b.at("steps_per_epoch").get<int>();
      if (b.contains("lr")) m.baseline.lr = b.at("lr").get<double>();
      if (b.contains("l2")) m.baseline.l2 = b.at("l2").get<double>();
      if (b.contains("max_positive_weight")) m.baseline.max_positive_weight = b.at("max_positive_weight").get<double>();
    }
    get("eval_threshold", m.eval_threshold);
    get("separator", m.separator);
  } catch (const nlohmann::ordered_json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("run manifest: ") + e.what());
  }
  if (!(m.strategy.confidence_threshold > 0.0 && m.strategy.confidence_threshold < 1.0))
    throw Error(Errc::InvalidConfig, "confidence_threshold must lie in (0, 1)");
  if (m.strategy.k_clusters == 0 || m.strategy.knn_k == 0) throw Error(Errc::InvalidConfig, "k_clusters and knn_k must be positive");
  for (const auto& g : m.rotation)
    if (g.size() < 2 || g.size() > 3) throw Error(Errc::InvalidConfig, "each rotation group needs 2 or 3 strategies");
  if (m.rotation.empty() && m.combined_rounds > 0 && !m.random_control)
    throw Error(Errc::InvalidConfig, "rotation is empty");
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  try {
    return RunManifest::from_json(nlohmann::ordered_json::parse(in));
  } catch (const nlohmann::ordered_json::exception& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Splits

Splits make_splits(const std::vector<AnnotatedRecord>& annotated, Rng& rng, std::size_t seed_size,
                   std::size_t test_size, std::size_t seed_positives) {
  if (seed_positives > seed_size) throw Error(Errc::InvalidConfig, "seed_positives exceeds seed_size");
  std::vector<const AnnotatedRecord*> sorted;
  for (const auto& r : annotated) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i]->id == sorted[i - 1]->id) throw Error(Errc::InvalidConfig, "duplicate annotated id " + sorted[i]->id);

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i]->al_label == ALLabel::True) pos.push_back(i);
    else if (sorted[i]->al_label == ALLabel::False) neg.push_back(i);
  }
  const std::size_t seed_negatives = seed_size - seed_positives;
  if (pos.size() < seed_positives || neg.size() < seed_negatives)
    throw Error(Errc::InsufficientPositives, std::to_string(pos.size()) + " positives and " + std::to_string(neg.size()) +
                                                 " negatives; seed needs " + std::to_string(seed_positives) + " and " +
                                                 std::to_string(seed_negatives));
  if (sorted.size() < seed_size + test_size)
    throw Error(Errc::InsufficientPositives, "need " + std::to_string(seed_size + test_size) + " annotated records, got " +
                                                 std::to_string(sorted.size()));

  std::vector<bool> used(sorted.size(), false);
  Splits out;
  for (auto k : rng.sample_indices(pos.size(), seed_positives)) used[pos[k]] = true;
  for (auto k : rng.sample_indices(neg.size(), seed_negatives)) used[neg[k]] = true;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (used[i]) out.seed.push_back(*sorted[i]);
    else rest.push_back(i);
  }
  auto picks = rng.sample_indices(rest.size(), test_size);
  std::sort(picks.begin(), picks.end());
  std::vector<bool> in_test(rest.size(), false);
  for (auto k : picks) in_test[k] = true;
  for (std::size_t k = 0; k < rest.size(); ++k) (in_test[k] ? out.test : out.remainder).push_back(*sorted[rest[k]]);
  return out;
}

// ---------------------------------------------------------------------------
// Label sinks

std::vector<AnnotatedRecord> ScriptedLabelSink::label(const QueryBatch& batch, const InstanceStore& store) {
  std::vector<AnnotatedRecord> out;
  out.reserve(batch.ids.size());
  for (const auto& id : batch.ids) out.push_back(oracle_(store.at(id)));
  return out;
}

GoldLabelSink::GoldLabelSink(const std::vector<AnnotatedRecord>& gold) {
  for (const auto& r : gold) gold_.emplace(r.id, r);
}

std::vector<AnnotatedRecord> GoldLabelSink::label(const QueryBatch& batch, const InstanceStore&) {
  std::vector<AnnotatedRecord> out;
  for (const auto& id : batch.ids) {
    auto it = gold_.find(id);
    if (it == gold_.end()) throw Error(Errc::LabelSinkTimeout, "no gold label for " + id);
    out.push_back(it->second);
  }
  return out;
}

nlohmann::ordered_json pool_prediction_to_json(const PoolPrediction& p) {
  auto spans = nlohmann::ordered_json::array();
  for (const auto& s : p.spans) spans.push_back({{"start", s.start}, {"end", s.end}});
  return {{"id", p.id}, {"p", p.p}, {"source", p.source}, {"target", p.target}, {"spans", std::move(spans)},
          {"dataset", "POOL"}};
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(const InstanceStore& store, std::unique_ptr<BinaryClassifier> classifier,
               std::shared_ptr<const SentenceEmbedder> embedder)
    : store_(store), classifier_(std::move(classifier)), embedder_(std::move(embedder)) {
  if (!classifier_ || !embedder_) throw Error(Errc::InvalidConfig, "engine needs a classifier and an embedder");
  embeddings_ = DenseMatrix(store_.size(), embedder_->dimension());
  for (std::size_t i = 0; i < store_.size(); ++i) {
    const auto& inst = store_.all()[i];
    auto e = embedder_->embed(pack(inst.pair));
    std::copy(e.begin(), e.end(), embeddings_.row(i).begin());
    embedding_row_.emplace(inst.pair.id, i);
  }
}

std::span<const double> Engine::embedding(const std::string& id) const {
  auto it = embedding_row_.find(id);
  if (it == embedding_row_.end()) throw Error(Errc::InvalidState, "no embedding for " + id);
  return embeddings_.row(it->second);
}

void Engine::sync(const ALState& state) {
  if (state.model.is_null()) throw Error(Errc::InvalidState, "state has no trained model");
  if (synced_model_ != state.model) {
    classifier_->restore(state.model);
    synced_model_ = state.model;
  }
}

std::vector<double> Engine::score(const ALState& state, const std::vector<std::string>& ids) {
  sync(state);
  std::vector<ModelInput> inputs;
  inputs.reserve(ids.size());
  for (const auto& id : ids) inputs.push_back(store_.model_input(id, state.manifest.separator));
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& s : classifier_->predict(inputs)) out.push_back(s.p_positive);
  return out;
}

void Engine::fit(ALState& state) {
  std::vector<LabeledInput> data;
  for (const auto& [id, rec] : state.labeled) {
    if (rec.al_label == ALLabel::Discard) continue;
    data.push_back({store_.model_input(id, state.manifest.separator), rec.al_label});
  }
  classifier_->fit(data, state.manifest.epochs, state.manifest.seed ^ (0x9E3779B97F4A7C15ULL * (state.round + 1)));
  state.model = classifier_->snapshot();
  synced_model_ = state.model;
}

MetricsRow Engine::evaluate(const ALState& state, const std::string& checkpoint) {
  const auto p = score(state, state.test);
  std::vector<ALLabel> labels;
  std::set<std::string> pairs;
  for (const auto& id : state.test) {
    labels.push_back(state.test_records.at(id).al_label);
    pairs.insert(corpus_key(id).lang_pair);
  }
  const std::string language = pairs.size() == 1 ? *pairs.begin() : "mixed";
  return metrics(confusion(p, labels, state.manifest.eval_threshold), checkpoint, language);
}

PoolView Engine::pool_view(const ALState& state) {
  PoolView view;
  view.ids = state.pool;
  view.embeddings = DenseMatrix(state.pool.size(), embedder_->dimension());
  for (std::size_t i = 0; i < state.pool.size(); ++i) {
    auto e = embedding(state.pool[i]);
    std::copy(e.begin(), e.end(), view.embeddings.row(i).begin());
  }
  view.scores = score(state, state.pool);
  return view;
}

PositiveSet Engine::positives(const ALState& state) const {
  PositiveSet set;
  set.embeddings = DenseMatrix(0, embedder_->dimension());
  for (const auto& [id, rec] : state.labeled) {
    if (rec.al_label != ALLabel::True) continue;
    set.ids.push_back(id);
    set.embeddings.append_row(embedding(id));
  }
  return set;
}

namespace {

PositiveSet subset(const PositiveSet& all, const std::vector<std::size_t>& rows) {
  PositiveSet out;
  out.embeddings = DenseMatrix(0, all.embeddings.cols());
  for (auto r : rows) {
    out.ids.push_back(all.ids[r]);
    out.embeddings.append_row(all.embeddings.row(r));
  }
  return out;
}

}  // namespace

QueryBatch Engine::compose_for_round(ALState& state, std::size_t round) {
  const auto& m = state.manifest;
  if (state.pool.empty()) throw Error(Errc::EmptyPool, "round " + std::to_string(round));
  const bool combined = round <= m.combined_rounds;
  const std::size_t size = combined ? m.combined_batch : m.uncertainty_batch;

  std::vector<StrategyOutput> outputs;
  if (m.random_control) {
    PoolView view;
    view.ids = state.pool;
    outputs.push_back({std::string(strategy_name(Strategy::Random)), random_sample(view, size, state.rng)});
    return compose_batch(round, size, outputs, state.pool, state.rng);
  }

  const PoolView view = pool_view(state);
  if (!combined) {
    outputs.push_back({std::string(strategy_name(Strategy::Uncertainty)), uncertainty(view, size)});
    return compose_batch(round, size, outputs, state.pool, state.rng);
  }

  const auto all_pos = positives(state);
  const auto& group = m.rotation[(round - 1) % m.rotation.size()];
  for (auto s : group) {
    std::vector<std::string> ids;
    switch (s) {
      case Strategy::HighConfidencePositives:
        ids = high_confidence_positives(view, m.strategy.confidence_threshold, size, state.rng);
        break;
      case Strategy::EmbeddingClusters:
        ids = embedding_clusters(view, m.strategy.k_clusters, size, state.rng, m.strategy.kmeans_iterations,
                                 m.strategy.kmeans_batch);
        break;
      case Strategy::DiverseSeedExpansion:
        if (all_pos.size() > 0) ids = diverse_seed_expansion(view, all_pos, size, m.strategy.knn_k, m.strategy.diversity_cutoff);
        break;
      case Strategy::NearestPositiveNeighbors:
        if (all_pos.size() > 0) {
          if (round < m.npn_all_positives_from_round) {
            auto order = distant_positive_order(all_pos);
            order.resize(std::min(order.size(), m.npn_early_anchors));
            ids = nearest_positive_neighbors(view, subset(all_pos, order), size);
          } else {
            ids = nearest_positive_neighbors(view, all_pos, size);
          }
        }
        break;
      case Strategy::LowConfidence:
        ids = low_confidence(view, size);
        break;
      case Strategy::Uncertainty:
        ids = uncertainty(view, size);
        break;
      case Strategy::Random:
        ids = random_sample(view, size, state.rng);
        break;
    }
    outputs.push_back({std::string(strategy_name(s)), std::move(ids)});
  }
  return compose_batch(round, size, outputs, state.pool, state.rng);
}

ALState Engine::propose(ALState state) {
  if (state.pending) return state;
  if (state.round >= state.manifest.total_rounds())
    throw Error(Errc::InvalidState, "schedule already complete at round " + std::to_string(state.round));
  state.pending = compose_for_round(state, state.round + 1);
  return state;
}

void Engine::merge_and_retrain(ALState& state, const QueryBatch& batch, const std::vector<AnnotatedRecord>& labels,
                               const std::string& phase) {
  std::unordered_set<std::string> expected(batch.ids.begin(), batch.ids.end());
  std::unordered_set<std::string> seen;
  std::vector<std::string> problems;
  for (const auto& r : labels) {
    if (!expected.contains(r.id)) problems.push_back(r.id + ": not in the current batch");
    else if (!seen.insert(r.id).second) problems.push_back(r.id + ": labeled twice");
    if (auto v = validate(r); !v.empty()) problems.push_back(r.id + ": " + format_violations(v));
  }
  for (const auto& id : batch.ids)
    if (!seen.contains(id)) problems.push_back(id + ": no label returned");
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw Error(Errc::ValidationFailure, msg);
  }

  RoundLog log;
  log.phase = phase;
  log.batch = batch;
  for (auto r : labels) {
    switch (r.al_label) {
      case ALLabel::True: ++log.labels.true_count; break;
      case ALLabel::False: ++log.labels.false_count; break;
      case ALLabel::Discard: ++log.labels.discard_count; break;
    }
    r.dataset = Dataset::TRAIN;
    state.labeled.insert_or_assign(r.id, std::move(r));
  }
  std::erase_if(state.pool, [&](const std::string& id) { return expected.contains(id); });

  const auto t0 = std::chrono::steady_clock::now();
  fit(state);
  log.retrain_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log.labeled_size = state.labeled.size();
  log.metrics = evaluate(state);
  log.round = batch.round_index;
  state.history.push_back(std::move(log));
}

ALState Engine::apply_labels(ALState state, const std::vector<AnnotatedRecord>& labels) {
  if (!state.pending) throw Error(Errc::InvalidState, "no batch is pending");
  const QueryBatch batch = *state.pending;
  const bool combined = batch.round_index <= state.manifest.combined_rounds;
  merge_and_retrain(state, batch, labels, combined ? "combined" : "uncertainty");
  state.pending.reset();
  state.round = batch.round_index;

  auto record = [&](CheckpointTag tag) {
    auto& last = state.history.back();
    last.metrics.checkpoint = std::string(checkpoint_name(tag));
    state.checkpoints.push_back({tag, state.round, state.model, state.labeled.size(), last.metrics});
  };
  if (state.round == state.manifest.combined_rounds) record(CheckpointTag::L8);
  if (state.round == state.manifest.total_rounds()) record(CheckpointTag::L13);
  return state;
}

ALState Engine::run_round(ALState state, LabelSink& sink) {
  state = propose(std::move(state));
  const auto labels = sink.label(*state.pending, store_);
  return apply_labels(std::move(state), labels);
}

ALState Engine::run_schedule(ALState state, LabelSink& sink) {
  if (!state.checkpoint(CheckpointTag::L0)) throw Error(Errc::InvalidState, "run_schedule needs the L0 model");
  while (state.round < state.manifest.total_rounds()) state = run_round(std::move(state), sink);
  return state;
}

ALState Engine::augment(ALState state, LabelSink& sink, std::size_t extra_n) {
  if (state.pending) throw Error(Errc::InvalidState, "a round batch is still pending");
  if (state.checkpoint(CheckpointTag::L14)) throw Error(Errc::InvalidState, "L14 already recorded");
  if (state.pool.empty()) throw Error(Errc::EmptyPool, "nothing left to augment with");
  QueryBatch batch;
  batch.round_index = state.round;
  for (auto k : state.rng.sample_indices(state.pool.size(), std::min(extra_n, state.pool.size()))) {
    batch.ids.push_back(state.pool[k]);
    batch.provenance.emplace(state.pool[k], "augment_random");
  }
  const auto labels = sink.label(batch, store_);
  merge_and_retrain(state, batch, labels, "augment");
  auto& last = state.history.back();
  last.metrics.checkpoint = std::string(checkpoint_name(CheckpointTag::L14));
  state.checkpoints.push_back({CheckpointTag::L14, state.round, state.model, state.labeled.size(), last.metrics});
  return state;
}

std::vector<PoolPrediction> Engine::final_predict(const ALState& state, double threshold) {
  const auto p = score(state, state.pool);
  std::vector<PoolPrediction> out;
  for (std::size_t i = 0; i < state.pool.size(); ++i) {
    if (p[i] < threshold) continue;
    const auto& inst = store_.at(state.pool[i]);
    PoolPrediction pred{inst.pair.id, p[i], join_tokens(inst.pair.src_tokens), join_tokens(inst.pair.tgt_tokens), {}};
    for (const auto& s : inst.spans) pred.spans.push_back({s.start, s.end});
    out.push_back(std::move(pred));
  }
  return out;
}

ALState Engine::initialize(const RunManifest& manifest, const std::vector<AnnotatedRecord>& annotated,
                           const std::vector<std::string>& pool_ids) {
  ALState state;
  state.manifest = manifest;
  state.rng = Rng(manifest.seed);
  auto splits = make_splits(annotated, state.rng, manifest.seed_size, manifest.test_size, manifest.seed_positives);

  for (auto& r : splits.seed) {
    if (!store_.contains(r.id)) throw Error(Errc::InvalidState, "seed record " + r.id + " has no instance");
    state.seed_ids.push_back(r.id);
    state.labeled.emplace(r.id, std::move(r));
  }
  for (auto& r : splits.test) {
    if (!store_.contains(r.id)) throw Error(Errc::InvalidState, "test record " + r.id + " has no instance");
    state.test.push_back(r.id);
    state.test_records.emplace(r.id, std::move(r));
  }
  std::set<std::string> pool(pool_ids.begin(), pool_ids.end());
  for (const auto& r : splits.remainder) pool.insert(r.id);
  for (const auto& id : pool) {
    if (state.labeled.contains(id) || state.test_records.contains(id)) continue;
    if (!store_.contains(id)) throw Error(Errc::InvalidState, "pool id " + id + " has no instance");
    state.pool.push_back(id);
  }

  fit(state);
  auto row = evaluate(state, std::string(checkpoint_name(CheckpointTag::L0)));
  state.checkpoints.push_back({CheckpointTag::L0, 0, state.model, state.labeled.size(), row});
  return state;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

using OJson = nlohmann::ordered_json;

OJson batch_to_json(const QueryBatch& b) {
  OJson prov = OJson::array();
  for (const auto& id : b.ids) prov.push_back(b.provenance.at(id));
  return {{"round", b.round_index}, {"ids", b.ids}, {"provenance", std::move(prov)}};
}

QueryBatch batch_from_json(const OJson& j) {
  QueryBatch b;
  b.round_index = j.at("round").get<std::size_t>();
  b.ids = j.at("ids").get<std::vector<std::string>>();
  const auto prov = j.at("provenance").get<std::vector<std::string>>();
  if (prov.size() != b.ids.size()) throw Error(Errc::InvalidState, "batch provenance length mismatch");
  for (std::size_t i = 0; i < b.ids.size(); ++i) b.provenance.emplace(b.ids[i], prov[i]);
  return b;
}

OJson records_to_json(const std::map<std::string, AnnotatedRecord>& records) {
  OJson out = OJson::array();
  for (const auto& [_, r] : records) out.push_back(record_to_json(r));
  return out;
}

std::map<std::string, AnnotatedRecord> records_from_json(const OJson& j) {
  std::map<std::string, AnnotatedRecord> out;
  for (const auto& r : j) {
    auto rec = record_from_json(r);
    out.emplace(rec.id, std::move(rec));
  }
  return out;
}

}  // namespace

OJson round_log_to_json(const RoundLog& log, bool include_timing) {
  OJson j = {
      {"round", log.round},
      {"phase", log.phase},
      {"batch", batch_to_json(log.batch)},
      {"labels", {{"TRUE", log.labels.true_count}, {"FALSE", log.labels.false_count}, {"DISCARD", log.labels.discard_count}}},
      {"labeled_size", log.labeled_size},
      {"metrics", metrics_to_json(log.metrics)},
  };
  if (include_timing) j["retrain_seconds"] = log.retrain_seconds;
  return j;
}

RoundLog round_log_from_json(const OJson& j) {
  RoundLog log;
  log.round = j.at("round").get<std::size_t>();
  log.phase = j.at("phase").get<std::string>();
  log.batch = batch_from_json(j.at("batch"));
  const auto& l = j.at("labels");
  log.labels = {l.at("TRUE").get<std::size_t>(), l.at("FALSE").get<std::size_t>(), l.at("DISCARD").get<std::size_t>()};
  log.labeled_size = j.at("labeled_size").get<std::size_t>();
  log.metrics = metrics_from_json(j.at("metrics"));
  if (j.contains("retrain_seconds")) log.retrain_seconds = j.at("retrain_seconds").get<double>();
  return log;
}

OJson state_to_json(const ALState& s) {
  OJson history = OJson::array();
  for (const auto& h : s.history) history.push_back(round_log_to_json(h));
  OJson checkpoints = OJson::array();
  for (const auto& c : s.checkpoints)
    checkpoints.push_back({{"tag", std::string(checkpoint_name(c.tag))},
                           {"round", c.round},
                           {"labeled_size", c.labeled_size},
                           {"metrics", metrics_to_json(c.metrics)},
                           {"model", c.model}});
  return {
      {"format", "pragex-state/1"},
      {"round", s.round},
      {"rng", {{"seed", s.rng.seed()}, {"counter", s.rng.counter()}}},
      {"manifest", s.manifest.to_json()},
      {"seed_ids", s.seed_ids},
      {"pool", s.pool},
      {"test", s.test},
      {"labeled", records_to_json(s.labeled)},
      {"test_records", records_to_json(s.test_records)},
      {"pending", s.pending ? batch_to_json(*s.pending) : OJson(nullptr)},
      {"model", s.model},
      {"history", std::move(history)},
      {"checkpoints", std::move(checkpoints)},
  };
}

ALState state_from_json(const OJson& j) {
  try {
    if (j.at("format").get<std::string>() != "pragex-state/1") throw Error(Errc::InvalidState, "unknown state format");
    ALState s;
    s.round = j.at("round").get<std::size_t>();
    s.rng = Rng(j.at("rng").at("seed").get<std::uint64_t>(), j.at("rng").at("counter").get<std::uint64_t>());
    s.manifest = RunManifest::from_json(j.at("manifest"));
    s.seed_ids = j.at("seed_ids").get<std::vector<std::string>>();
    s.pool = j.at("pool").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    s.labeled = records_from_json(j.at("labeled"));
    s.test_records = records_from_json(j.at("test_records"));
    if (!j.at("pending").is_null()) s.pending = batch_from_json(j.at("pending"));
    s.model = j.at("model");
    for (const auto& h : j.at("history")) s.history.push_back(round_log_from_json(h));
    for (const auto& c : j.at("checkpoints"))
      s.checkpoints.push_back({parse_checkpoint(c.at("tag").get<std::string>()), c.at("round").get<std::size_t>(),
                               c.at("model"), c.at("labeled_size").get<std::size_t>(), metrics_from_json(c.at("metrics"))});
    return s;
  } catch (const OJson::exception& e) {
    throw Error(Errc::InvalidState, std::string("state file: ") + e.what());
  }
}

void save_state(const ALState& state, const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::FileNotFound, "cannot write " + tmp.string());
    out << state_to_json(state).dump() << '\n';
    if (!out.flush()) throw Error(Errc::FileNotFound, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ALState load_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, path.string());
  try {
    return state_from_json(OJson::parse(in));
  } catch (const OJson::exception& e) {
    throw Error(Errc::InvalidState, path.string() + ": " + e.what());
  }
}

}  // namespace pragex
