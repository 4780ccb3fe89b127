#include "pragex/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_set>

#include "pragex/error.hpp"

namespace pragex {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::HighConfidencePositives: return "high_confidence_positives";
    case Strategy::EmbeddingClusters: return "embedding_clusters";
    case Strategy::DiverseSeedExpansion: return "diverse_seed_expansion";
    case Strategy::NearestPositiveNeighbors: return "nearest_positive_neighbors";
    case Strategy::LowConfidence: return "low_confidence";
    case Strategy::Uncertainty: return "uncertainty";
    case Strategy::Random: return "random";
  }
  return "random";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::HighConfidencePositives, Strategy::EmbeddingClusters, Strategy::DiverseSeedExpansion,
                 Strategy::NearestPositiveNeighbors, Strategy::LowConfidence, Strategy::Uncertainty, Strategy::Random})
    if (strategy_name(s) == name) return s;
  // Short aliases used in run manifests.
  if (name == "HCP") return Strategy::HighConfidencePositives;
  if (name == "CLUST") return Strategy::EmbeddingClusters;
  if (name == "DIVERSE") return Strategy::DiverseSeedExpansion;
  if (name == "NPN") return Strategy::NearestPositiveNeighbors;
  if (name == "LOWCONF") return Strategy::LowConfidence;
  if (name == "UNCERT") return Strategy::Uncertainty;
  if (name == "RANDOM") return Strategy::Random;
  throw Error(Errc::InvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> ids_of(const PoolView& pool, const std::vector<std::size_t>& rows) {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(pool.ids[r]);
  return out;
}

// Rows sorted by (key, id); only the first n are materialized.
template <typename Key>
std::vector<std::size_t> rank_rows(const PoolView& pool, std::size_t n, Key key) {
  std::vector<std::size_t> rows(pool.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> keys(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) keys[i] = key(i);
  n = std::min(n, rows.size());
  std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n), rows.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (keys[a] != keys[b]) return keys[a] < keys[b];
                      return pool.ids[a] < pool.ids[b];
                    });
  rows.resize(n);
  return rows;
}

void require_scores(const PoolView& pool) {
  if (pool.scores.size() != pool.size()) throw Error(Errc::InvalidState, "pool scores do not cover the pool");
}

}  // namespace

std::vector<std::string> high_confidence_positives(const PoolView& pool, double tau, std::size_t n, Rng& rng) {
  require_scores(pool);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (pool.scores[i] >= tau) eligible.push_back(i);
  std::vector<std::size_t> rows;
  for (auto k : rng.sample_indices(eligible.size(), std::min(n, eligible.size()))) rows.push_back(eligible[k]);
  return ids_of(pool, rows);
}

KMeansResult minibatch_kmeans(const DenseMatrix& points, std::size_t k, int iterations, std::size_t batch, Rng& rng) {
  const std::size_t n = points.rows();
  KMeansResult out;
  if (n == 0 || k == 0) return out;
  k = std::min(k, n);
  const std::size_t dim = points.cols();

  // k-means++ seeding.
  out.centroids = DenseMatrix(0, dim);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t first = static_cast<std::size_t>(rng.uniform_index(n));
  out.centroids.append_row(points.row(first));
  while (out.centroids.rows() < k) {
    auto last = out.centroids.row(out.centroids.rows() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points.row(i), last));
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(rng.uniform_index(n));
    } else {
      double u = rng.uniform01() * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        u -= nearest[pick];
        if (u < 0.0) break;
      }
    }
    out.centroids.append_row(points.row(pick));
  }

  auto closest = [&](std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double d = squared_distance(x, out.centroids.row(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    return best;
  };

  std::vector<double> counts(k, 0.0);
  const std::size_t b = std::min(batch, n);
  for (int it = 0; it < iterations; ++it) {
    const auto sample = rng.sample_indices(n, b);
    std::vector<std::size_t> assigned(sample.size());
    for (std::size_t s = 0; s < sample.size(); ++s) assigned[s] = closest(points.row(sample[s]));
    for (std::size_t s = 0; s < sample.size(); ++s) {
      const std::size_t c = assigned[s];
      counts[c] += 1.0;
      const double eta = 1.0 / counts[c];
      auto centre = out.centroids.row(c);
      auto x = points.row(sample[s]);
      for (std::size_t j = 0; j < dim; ++j) centre[j] = (1.0 - eta) * centre[j] + eta * x[j];
    }
  }
  out.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.assignment[i] = closest(points.row(i));
  return out;
}

std::vector<std::string> embedding_clusters(const PoolView& pool, std::size_t k, std::size_t n, Rng& rng,
                                            int iterations, std::size_t batch) {
  if (pool.size() == 0 || n == 0) return {};
  const auto km = minibatch_kmeans(pool.embeddings, k, iterations, batch, rng);
  const std::size_t kk = km.centroids.rows();

  // Members of each cluster ordered by distance to their centroid.
  std::vector<std::vector<std::size_t>> members(kk);
  for (std::size_t i = 0; i < pool.size(); ++i) members[km.assignment[i]].push_back(i);
  auto by_distance = [&](std::size_t c) {
    return [&, c](std::size_t a, std::size_t b) {
      const double da = squared_distance(pool.embeddings.row(a), km.centroids.row(c));
      const double db = squared_distance(pool.embeddings.row(b), km.centroids.row(c));
      if (da != db) return da < db;
      return pool.ids[a] < pool.ids[b];
    };
  };
  for (std::size_t c = 0; c < kk; ++c) std::sort(members[c].begin(), members[c].end(), by_distance(c));

  std::vector<std::size_t> order(kk);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return members[a].size() > members[b].size(); });

  std::vector<std::size_t> chosen;
  std::vector<bool> taken(pool.size(), false);
  // First pass: the pool instance nearest each centroid, even when that
  // instance sits in another centroid's cluster.
  for (auto c : order) {
    std::vector<std::size_t> all(pool.size());
    std::iota(all.begin(), all.end(), 0);
    const auto rep = *std::min_element(all.begin(), all.end(), by_distance(c));
    if (!taken[rep]) {
      taken[rep] = true;
      chosen.push_back(rep);
      if (chosen.size() == n) return ids_of(pool, chosen);
    }
  }
  std::vector<std::size_t> cursor(kk, 0);
  bool progress = true;
  while (chosen.size() < n && progress) {
    progress = false;
    for (auto c : order) {
      auto& m = members[c];
      while (cursor[c] < m.size() && taken[m[cursor[c]]]) ++cursor[c];
      if (cursor[c] == m.size()) continue;
      taken[m[cursor[c]]] = true;
      chosen.push_back(m[cursor[c]]);
      progress = true;
      if (chosen.size() == n) break;
    }
  }
  return ids_of(pool, chosen);
}

std::vector<std::size_t> distant_positive_order(const PositiveSet& positives) {
  const std::size_t p = positives.size();
  std::vector<double> mean(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    if (p == 1) break;
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j)
      if (j != i) s += cosine_distance(positives.embeddings.row(i), positives.embeddings.row(j));
    mean[i] = s / static_cast<double>(p - 1);
  }
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (mean[a] != mean[b]) return mean[a] > mean[b];
    return positives.ids[a] < positives.ids[b];
  });
  return order;
}

std::vector<std::string> diverse_seed_expansion(const PoolView& pool, const PositiveSet& positives, std::size_t n,
                                                std::size_t knn_k, double diversity_cutoff) {
  if (positives.size() == 0) throw Error(Errc::NoPositives, "diverse seed expansion needs a labeled positive");
  if (n == 0 || pool.size() == 0) return {};
  if (knn_k == 0) throw Error(Errc::InvalidConfig, "knn_k must be positive");
  const auto order = distant_positive_order(positives);
  const std::size_t anchors = std::min((n + knn_k - 1) / knn_k, positives.size());
  const std::size_t quota = (n + anchors - 1) / anchors;

  std::vector<std::size_t> chosen;
  std::vector<bool> taken(pool.size(), false);
  for (std::size_t a = 0; a < anchors && chosen.size() < n; ++a) {
    auto anchor = positives.embeddings.row(order[a]);
    auto ranked = rank_rows(pool, pool.size(), [&](std::size_t i) { return -cosine_similarity(pool.embeddings.row(i), anchor); });
    std::size_t got = 0;
    for (auto r : ranked) {
      if (got == quota || chosen.size() == n) break;
      if (taken[r]) continue;
      const bool redundant = std::any_of(chosen.begin(), chosen.end(), [&](std::size_t s) {
        return cosine_similarity(pool.embeddings.row(r), pool.embeddings.row(s)) > diversity_cutoff;
      });
      if (redundant) continue;
      taken[r] = true;
      chosen.push_back(r);
      ++got;
    }
  }
  return ids_of(pool, chosen);
}

std::vector<std::string> nearest_positive_neighbors(const PoolView& pool, const PositiveSet& positives, std::size_t n) {
  if (positives.size() == 0) throw Error(Errc::NoPositives, "nearest positive neighbours needs a labeled positive");
  return ids_of(pool, rank_rows(pool, n, [&](std::size_t i) {
                  double best = std::numeric_limits<double>::infinity();
                  for (std::size_t p = 0; p < positives.size(); ++p)
                    best = std::min(best, cosine_distance(pool.embeddings.row(i), positives.embeddings.row(p)));
                  return best;
                }));
}

std::vector<std::string> low_confidence(const PoolView& pool, std::size_t n) {
  require_scores(pool);
  return ids_of(pool, rank_rows(pool, n, [&](std::size_t i) { return std::max(pool.scores[i], 1.0 - pool.scores[i]); }));
}

std::vector<std::string> uncertainty(const PoolView& pool, std::size_t n) {
  require_scores(pool);
  return ids_of(pool, rank_rows(pool, n, [&](std::size_t i) { return std::abs(pool.scores[i] - 0.5); }));
}

std::vector<std::string> random_sample(const PoolView& pool, std::size_t n, Rng& rng) {
  std::vector<std::size_t> rows = rng.sample_indices(pool.size(), std::min(n, pool.size()));
  return ids_of(pool, rows);
}

std::vector<std::size_t> split_quotas(std::size_t total, std::size_t parts) {
  if (parts == 0) return {};
  std::vector<std::size_t> q(parts, total / parts);
  for (std::size_t i = 0; i < total % parts; ++i) ++q[i];
  return q;
}

QueryBatch compose_batch(std::size_t round_index, std::size_t size, std::span<const StrategyOutput> outputs,
                         std::span<const std::string> pool_ids, Rng& rng) {
  if (pool_ids.empty()) throw Error(Errc::EmptyPool, "round " + std::to_string(round_index));
  QueryBatch batch;
  batch.round_index = round_index;
  const std::unordered_set<std::string> pool(pool_ids.begin(), pool_ids.end());
  const std::size_t target = std::min(size, pool.size());

  const auto quotas = split_quotas(target, outputs.size());
  for (std::size_t s = 0; s < outputs.size(); ++s) {
    std::size_t used = 0;
    for (const auto& id : outputs[s].ids) {
      if (used == quotas[s]) break;
      if (!pool.contains(id) || batch.provenance.contains(id)) continue;
      batch.ids.push_back(id);
      batch.provenance.emplace(id, outputs[s].strategy);
      ++used;
    }
  }
  if (batch.ids.size() < target) {
    std::vector<std::string> rest;
    for (const auto& id : pool_ids)
      if (!batch.provenance.contains(id)) rest.push_back(id);
    for (auto k : rng.sample_indices(rest.size(), target - batch.ids.size())) {
      batch.ids.push_back(rest[k]);
      batch.provenance.emplace(rest[k], std::string(kBackfillProvenance));
    }
  }
  return batch;
}

}  // namespace pragex
