#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pragex/dense.hpp"
#include "pragex/rng.hpp"

namespace pragex {

// Unlabeled instances. Row i of embeddings and scores[i] belong to ids[i].
struct PoolView {
  std::vector<std::string> ids;
  DenseMatrix embeddings;
  std::vector<double> scores;  // current p_positive

  std::size_t size() const noexcept { return ids.size(); }
};

struct PositiveSet {
  std::vector<std::string> ids;
  DenseMatrix embeddings;

  std::size_t size() const noexcept { return ids.size(); }
};

enum class Strategy {
  HighConfidencePositives,
  EmbeddingClusters,
  DiverseSeedExpansion,
  NearestPositiveNeighbors,
  LowConfidence,
  Uncertainty,
  Random,
};

std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);

struct StrategyConfig {
  double confidence_threshold = 0.8;
  std::size_t k_clusters = 20;
  std::size_t knn_k = 5;
  double diversity_cutoff = 0.95;
  int kmeans_iterations = 50;
  std::size_t kmeans_batch = 256;
  std::uint64_t rng_seed = 0;
};

// Uniform sample of min(n, #{p >= tau}) ids among those with p >= tau.
std::vector<std::string> high_confidence_positives(const PoolView& pool, double tau, std::size_t n, Rng& rng);

struct KMeansResult {
  DenseMatrix centroids;
  std::vector<std::size_t> assignment;  // pool row -> centroid
};

// Mini-batch k-means (per-centre learning rate 1 / count) with k-means++
// seeding. k is clamped to the number of rows.
KMeansResult minibatch_kmeans(const DenseMatrix& points, std::size_t k, int iterations, std::size_t batch, Rng& rng);

// Representative nearest each final centroid, clusters visited largest
// first; further passes take the next-nearest member of each cluster until n
// ids are chosen or the pool is exhausted.
std::vector<std::string> embedding_clusters(const PoolView& pool, std::size_t k, std::size_t n, Rng& rng,
                                            int iterations = 50, std::size_t batch = 256);

// Positive rows ordered by mean cosine distance to the other positives,
// most distant first (ties by id).
std::vector<std::size_t> distant_positive_order(const PositiveSet& positives);

// ceil(n / knn_k) most distant positives act as anchors; each walks its pool
// neighbours by cosine similarity and skips any candidate more similar than
// the cutoff to one already chosen. Throws NoPositives.
std::vector<std::string> diverse_seed_expansion(const PoolView& pool, const PositiveSet& positives, std::size_t n,
                                                std::size_t knn_k = 5, double diversity_cutoff = 0.95);

// Pool ranked by minimum cosine distance to any positive, ties by id.
// Throws NoPositives.
std::vector<std::string> nearest_positive_neighbors(const PoolView& pool, const PositiveSet& positives, std::size_t n);

// Smallest max(p, 1 - p) first, ties by id.
std::vector<std::string> low_confidence(const PoolView& pool, std::size_t n);

// Smallest |p - 0.5| first, ties by id.
std::vector<std::string> uncertainty(const PoolView& pool, std::size_t n);

std::vector<std::string> random_sample(const PoolView& pool, std::size_t n, Rng& rng);

struct StrategyOutput {
  std::string strategy;
  std::vector<std::string> ids;
};

struct QueryBatch {
  std::size_t round_index = 0;
  std::vector<std::string> ids;
  std::map<std::string, std::string> provenance;  // id -> strategy name

  friend bool operator==(const QueryBatch&, const QueryBatch&) = default;
};

inline constexpr std::string_view kBackfillProvenance = "random_backfill";

// Equal split, remainder to the first strategies (100 over 3 -> 34/33/33).
std::vector<std::size_t> split_quotas(std::size_t total, std::size_t parts);

// Each output contributes up to its quota; ids already taken by an earlier
// strategy, or not in the pool, are dropped. Any shortfall is backfilled by
// uniform sampling from the rest of the pool. Throws EmptyPool.
QueryBatch compose_batch(std::size_t round_index, std::size_t size, std::span<const StrategyOutput> outputs,
                         std::span<const std::string> pool_ids, Rng& rng);

}  // namespace pragex
