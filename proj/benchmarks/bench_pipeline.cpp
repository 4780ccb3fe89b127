#include <benchmark/benchmark.h>

#include <random>

#include "pragex/engine.hpp"
#include "pragex/extraction.hpp"
#include "pragex/strategies.hpp"
#include "pragex/synthetic.hpp"

namespace pragex {
namespace {

const SyntheticData& corpus() {
  static const SyntheticData data = [] {
    SyntheticConfig c;
    c.seed = 1;
    return generate_synthetic(c);
  }();
  return data;
}

void BM_ExtractCorpus(benchmark::State& st) {
  std::vector<SentencePair> pairs;
  AlignmentMap links;
  for (const auto& inst : corpus().instances) {
    pairs.push_back(inst.pair);
    links.emplace(inst.pair.id, inst.alignment);
  }
  const Corpus c(std::move(pairs));
  const auto& tagger = synthetic_tagger();
  for (auto _ : st) benchmark::DoNotOptimize(extract_corpus(c, links, tagger));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(c.size()));
}
BENCHMARK(BM_ExtractCorpus)->Unit(benchmark::kMillisecond);

void BM_Featurize(benchmark::State& st) {
  const auto& insts = corpus().instances;
  const auto& tagger = synthetic_tagger();
  std::size_t i = 0;
  for (auto _ : st) {
    const auto& inst = insts[i++ % insts.size()];
    benchmark::DoNotOptimize(featurize(inst.pair, inst.alignment, tagger));
  }
}
BENCHMARK(BM_Featurize);

void BM_BaselineFit(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  std::vector<LabeledInput> data;
  const auto& d = corpus();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& inst = d.instances[i % d.instances.size()];
    data.push_back({{pack_texts(inst.pair.id, inst.pair.src_text, inst.pair.tgt_text), inst.features},
                    synthetic_rule(inst) ? ALLabel::True : ALLabel::False});
  }
  for (auto _ : st) {
    BaselineClassifier c;
    c.fit(data, 10, 13);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_BaselineFit)->Arg(100)->Arg(1150)->Unit(benchmark::kMillisecond);

PoolView random_pool(std::size_t n, std::size_t dim) {
  std::mt19937 gen(5);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u;
  PoolView pool;
  pool.embeddings = DenseMatrix(0, dim);
  std::vector<double> row(dim);
  for (std::size_t i = 0; i < n; ++i) {
    pool.ids.push_back("p" + std::to_string(i));
    pool.scores.push_back(u(gen));
    for (auto& v : row) v = nd(gen);
    pool.embeddings.append_row(row);
  }
  return pool;
}

void BM_Uncertainty(benchmark::State& st) {
  const auto pool = random_pool(static_cast<std::size_t>(st.range(0)), 64);
  for (auto _ : st) benchmark::DoNotOptimize(uncertainty(pool, 100));
}
BENCHMARK(BM_Uncertainty)->Arg(5000);

void BM_NearestPositiveNeighbors(benchmark::State& st) {
  const auto pool = random_pool(static_cast<std::size_t>(st.range(0)), 64);
  const auto pos_pool = random_pool(50, 64);
  PositiveSet pos{pos_pool.ids, pos_pool.embeddings};
  for (auto _ : st) benchmark::DoNotOptimize(nearest_positive_neighbors(pool, pos, 100));
}
BENCHMARK(BM_NearestPositiveNeighbors)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_MinibatchKMeans(benchmark::State& st) {
  const auto pool = random_pool(5000, 64);
  for (auto _ : st) {
    Rng rng(3);
    benchmark::DoNotOptimize(minibatch_kmeans(pool.embeddings, static_cast<std::size_t>(st.range(0)), 50, 256, rng));
  }
}
BENCHMARK(BM_MinibatchKMeans)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_EngineRound(benchmark::State& st) {
  const auto& d = corpus();
  const InstanceStore store(d.instances);
  ScriptedLabelSink oracle(synthetic_oracle);
  RunManifest manifest;
  Engine engine(store, std::make_unique<BaselineClassifier>(manifest.baseline),
                std::make_shared<HashingEmbedder>(64, manifest.separator));
  const auto init = engine.initialize(manifest, d.annotated, d.pool_ids);
  for (auto _ : st) benchmark::DoNotOptimize(engine.run_round(init, oracle));
}
BENCHMARK(BM_EngineRound)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace pragex

BENCHMARK_MAIN();
