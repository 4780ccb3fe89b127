// pragex: command-line front end for extraction, the active-learning loop,
// evaluation and the annotation service.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <pthread.h>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "pragex/annotation_store.hpp"
#include "pragex/corpus.hpp"
#include "pragex/encoder_adapter.hpp"
#include "pragex/engine.hpp"
#include "pragex/error.hpp"
#include "pragex/evalkit.hpp"
#include "pragex/extraction.hpp"
#include "pragex/instances.hpp"
#include "pragex/journal.hpp"
#include "pragex/records_io.hpp"
#include "pragex/service.hpp"
#include "pragex/synthetic.hpp"

namespace fs = std::filesystem;
using namespace pragex;

namespace {

struct ModelOptions {
  std::string encoder_cmd;
  std::string encoder_workdir = "encoder_work";
  int encoder_timeout_s = 1800;
};

void add_model_options(CLI::App* cmd, ModelOptions& m) {
  cmd->add_option("--encoder-cmd", m.encoder_cmd,
                  std::string("External encoder command; defaults to $") + kEncoderCommandEnv +
                      ", and the built-in baseline is used when neither is set");
  cmd->add_option("--encoder-workdir", m.encoder_workdir, "Scratch directory for encoder exchange files");
  cmd->add_option("--encoder-timeout", m.encoder_timeout_s, "Encoder call timeout in seconds");
}

std::unique_ptr<BinaryClassifier> make_classifier(const ModelOptions& m, const RunManifest& manifest) {
  std::string cmd = m.encoder_cmd;
  if (cmd.empty()) {
    if (const char* env = std::getenv(kEncoderCommandEnv)) cmd = env;
  }
  if (cmd.empty()) return std::make_unique<BaselineClassifier>(manifest.baseline);
  EncoderAdapterConfig cfg;
  cfg.command = cmd;
  cfg.work_dir = m.encoder_workdir;
  cfg.timeout = std::chrono::seconds(m.encoder_timeout_s);
  return std::make_unique<EncoderAdapterClassifier>(cfg);
}

std::shared_ptr<const SentenceEmbedder> make_embedder(const RunManifest& manifest) {
  return std::make_shared<HashingEmbedder>(64, manifest.separator);
}

Json candidate_to_json(const Candidate& c) {
  Json spans = Json::array();
  for (const auto& s : c.spans) spans.push_back({{"start", s.start}, {"end", s.end}, {"tokens", s.tokens}});
  Json hits = Json::array();
  for (const auto& h : c.ne_hits)
    hits.push_back({{"side", std::string(side_name(h.side))},
                    {"label", h.label},
                    {"start", h.range.start},
                    {"end", h.range.end}});
  return {{"pair_id", c.pair_id},
          {"dataset", std::string(dataset_name(c.dataset))},
          {"spans", std::move(spans)},
          {"ne_hits", std::move(hits)},
          {"content_hits", c.content_hits}};
}

std::string phase_for(const RunManifest& manifest, std::size_t round) {
  return round <= manifest.combined_rounds ? "combined" : "uncertainty";
}

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------- extract

struct ExtractArgs {
  std::string src, tgt, align_a, align_b, langs = "en-de", tagger, domain = "TED", combine = "union";
  std::string out, instances_out;
  unsigned threads = 1;
};

int run_extract(const ExtractArgs& a) {
  const auto dash = a.langs.find('-');
  if (dash == std::string::npos) throw Error(Errc::InvalidConfig, "--langs must look like en-de");
  const std::string src_lang = a.langs.substr(0, dash), tgt_lang = a.langs.substr(dash + 1);

  std::unique_ptr<LexiconTagger> owned;
  const Tagger* tagger = nullptr;
  if (a.tagger == "synthetic") {
    tagger = &synthetic_tagger();
  } else if (a.tagger.rfind("lexicon:", 0) == 0) {
    owned = std::make_unique<LexiconTagger>(LexiconTagger::from_file(a.tagger.substr(8)));
    tagger = owned.get();
  } else {
    throw Error(Errc::InvalidConfig, "--tagger must be lexicon:<path> or synthetic");
  }

  const auto corpus = load_parallel(a.src, a.tgt, src_lang, tgt_lang, parse_domain(a.domain));
  AlignmentMap alignments = load_alignments(a.align_a, corpus, AlignerTool::A);
  if (!a.align_b.empty()) {
    const auto mode = a.combine == "intersection" ? AlignmentCombine::Intersection : AlignmentCombine::Union;
    alignments = combine_alignment_maps(alignments, load_alignments(a.align_b, corpus, AlignerTool::B), mode);
  }

  const auto set = extract_corpus(corpus, alignments, *tagger, {a.threads});
  std::vector<Json> rows;
  for (const auto& c : set.candidates) rows.push_back(candidate_to_json(c));
  write_jsonl(rows, a.out);

  if (!a.instances_out.empty()) {
    std::map<std::string, const Candidate*> by_id;
    for (const auto& c : set.candidates) by_id[c.pair_id] = &c;
    std::vector<Instance> instances;
    for (const auto& pair : corpus.pairs()) {
      auto inst = make_instance(pair, alignments.at(pair.id), *tagger);
      if (auto it = by_id.find(pair.id); it != by_id.end()) inst.candidate = *it->second;
      instances.push_back(std::move(inst));
    }
    write_instances(instances, a.instances_out);
  }

  std::cerr << Json{{"n_pairs", set.stats.n_pairs},
                    {"n_candidates", set.stats.n_candidates},
                    {"rate", set.stats.rate}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- synth

int run_synth(const SyntheticConfig& cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto data = generate_synthetic(cfg);
  write_instances(data.instances, out_dir / "instances.jsonl");
  write_records(data.annotated, out_dir / "annotated.jsonl");
  std::cerr << Json{{"instances", data.instances.size()},
                    {"pool", data.pool_ids.size()},
                    {"annotated", data.annotated.size()}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- AL loop

// The engine keeps a reference to the store, so the store is pinned on the heap.
struct Session {
  std::unique_ptr<InstanceStore> instances;
  ALState state;
  std::unique_ptr<Engine> engine;
};

Session open_session(const fs::path& state_path, const fs::path& instances, const ModelOptions& m) {
  Session s;
  s.instances = std::make_unique<InstanceStore>(read_instances(instances));
  s.state = load_state(state_path);
  s.engine = std::make_unique<Engine>(*s.instances, make_classifier(m, s.state.manifest), make_embedder(s.state.manifest));
  return s;
}

int run_seed(const std::string& manifest_path, const fs::path& instances, const fs::path& annotated,
             const fs::path& state_path, const ModelOptions& m) {
  const RunManifest manifest = manifest_path.empty() ? RunManifest{} : load_manifest(manifest_path);
  InstanceStore store(read_instances(instances));
  const auto gold = read_records(annotated);
  std::set<std::string> annotated_ids;
  for (const auto& r : gold) annotated_ids.insert(r.id);
  std::vector<std::string> pool;
  for (const auto& inst : store.all())
    if (!annotated_ids.contains(inst.pair.id)) pool.push_back(inst.pair.id);

  Engine engine(store, make_classifier(m, manifest), make_embedder(manifest));
  const auto state = engine.initialize(manifest, gold, pool);
  save_state(state, state_path);
  print_json(metrics_to_json(state.checkpoints.front().metrics));
  return 0;
}

std::unique_ptr<LabelSink> make_sink(const std::string& oracle, bool synthetic) {
  if (synthetic) return std::make_unique<ScriptedLabelSink>(synthetic_oracle);
  if (oracle.empty()) throw Error(Errc::InvalidConfig, "an --oracle file or --synthetic-oracle is required");
  return std::make_unique<GoldLabelSink>(read_records(oracle));
}

int run_round(const fs::path& state_path, const fs::path& instances, bool propose, const std::string& labels,
              const std::string& tasks_out, const ModelOptions& m) {
  auto s = open_session(state_path, instances, m);
  if (propose == !labels.empty()) throw Error(Errc::InvalidConfig, "give exactly one of --propose or --labels");
  if (propose) {
    s.state = s.engine->propose(std::move(s.state));
    save_state(s.state, state_path);
    std::vector<Json> rows;
    for (const auto& t : tasks_for_batch(*s.state.pending, *s.instances)) rows.push_back(task_to_json(t));
    if (!tasks_out.empty()) write_jsonl(rows, tasks_out);
    std::cerr << "round " << s.state.pending->round_index << ": " << rows.size() << " tasks\n";
    return 0;
  }
  s.state = s.engine->apply_labels(std::move(s.state), read_records(labels));
  save_state(s.state, state_path);
  print_json(round_log_to_json(s.state.history.back()));
  return 0;
}

int run_schedule(const fs::path& state_path, const fs::path& instances, const std::string& oracle,
                 bool synthetic, const ModelOptions& m) {
  auto s = open_session(state_path, instances, m);
  auto sink = make_sink(oracle, synthetic);
  s.state = s.engine->run_schedule(std::move(s.state), *sink);
  save_state(s.state, state_path);
  Json rows = Json::array();
  for (const auto& c : s.state.checkpoints) rows.push_back(metrics_to_json(c.metrics));
  print_json(rows);
  return 0;
}

int run_augment(const fs::path& state_path, const fs::path& instances, const std::string& oracle, bool synthetic,
                std::size_t n, const ModelOptions& m) {
  auto s = open_session(state_path, instances, m);
  auto sink = make_sink(oracle, synthetic);
  s.state = s.engine->augment(std::move(s.state), *sink, n == 0 ? s.state.manifest.augment_size : n);
  save_state(s.state, state_path);
  print_json(metrics_to_json(s.state.checkpoints.back().metrics));
  return 0;
}

int run_predict(const fs::path& state_path, const fs::path& instances, double threshold, const fs::path& out,
                const ModelOptions& m) {
  auto s = open_session(state_path, instances, m);
  std::vector<Json> rows;
  for (const auto& p : s.engine->final_predict(s.state, threshold)) rows.push_back(pool_prediction_to_json(p));
  write_jsonl(rows, out);
  std::cerr << rows.size() << " of " << s.state.pool.size() << " pool pairs predicted positive\n";
  return 0;
}

// Each *.jsonl file under tests_dir is one test set named after its stem.
int run_eval(const fs::path& state_path, const fs::path& instances, const fs::path& tests_dir,
             const std::string& checkpoint, const std::string& out, const std::string& curve_out,
             const ModelOptions& m) {
  InstanceStore store(read_instances(instances));
  const auto state = load_state(state_path);

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(tests_dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(Errc::EmptyTestSet, "no *.jsonl test sets in " + tests_dir.string());

  std::vector<TestSet> tests;
  for (const auto& f : files) {
    TestSet t;
    t.language = f.stem().string();
    for (const auto& r : read_records(f)) {
      if (!store.contains(r.id)) throw Error(Errc::InvalidConfig, f.string() + ": unknown instance " + r.id);
      t.inputs.push_back(store.model_input(r.id, state.manifest.separator));
      t.labels.push_back(r.al_label);
    }
    tests.push_back(std::move(t));
  }

  std::vector<MetricsRow> rows;
  for (const auto& c : state.checkpoints) {
    const auto name = std::string(checkpoint_name(c.tag));
    if (!checkpoint.empty() && name != checkpoint) continue;
    auto model = make_classifier(m, state.manifest);
    model->restore(c.model);
    auto part = cross_lingual_eval(*model, name, tests, state.manifest.eval_threshold);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw Error(Errc::InvalidConfig, "no matching checkpoint in state");

  const auto csv = metrics_csv(rows);
  if (out.empty()) std::cout << csv;
  else write_file_atomic(out, csv);
  if (!curve_out.empty()) write_file_atomic(curve_out, learning_curve_csv(learning_curve(rows)));
  return 0;
}

int run_stats(const std::vector<std::string>& files) {
  std::vector<AnnotatedRecord> all;
  for (const auto& f : files) {
    auto part = read_records(f);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  std::cout << format_stats_table(corpus_stats(all));
  return 0;
}

// ---------------------------------------------------------------- serve

// Brings the label journal in line with the engine state after a restart.
// The advance handler saves the engine state before the store closes its
// round, so the engine may be one step ahead of the journal but never
// behind it.
void reconcile(Engine& engine, ALState& state, AnnotationStore& store, const InstanceStore& instances,
               const fs::path& state_path) {
  const auto total = state.manifest.total_rounds();
  if (!state.pending && state.round < total) {
    state = engine.propose(std::move(state));
    save_state(state, state_path);
  }
  if (store.has_round()) {
    if (state.pending && store.round() == state.pending->round_index) return;
    if (store.open_count() > 0)
      throw Error(Errc::InvalidState, "journal round " + std::to_string(store.round()) +
                                          " still has open tasks but the engine has moved on");
    store.close_round();
  }
  if (state.pending)
    store.open_round(state.pending->round_index, phase_for(state.manifest, state.pending->round_index),
                     tasks_for_batch(*state.pending, instances));
}

struct ServeArgs {
  std::string state, instances, dir, host = "127.0.0.1", static_dir, port_file;
  int port = 8080;
  std::size_t snapshot_every = 64;
};

int run_serve(const ServeArgs& a, const ModelOptions& m) {
  // Signals are taken by a dedicated thread so shutdown runs outside a
  // signal handler.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  auto s = open_session(a.state, a.instances, m);
  AnnotationStore store({a.dir, a.snapshot_every});
  reconcile(*s.engine, s.state, store, *s.instances, a.state);

  AdvanceHandler advance = [&](const std::vector<AnnotatedRecord>& labels) -> std::optional<NextRound> {
    auto next = s.engine->apply_labels(s.state, labels);
    save_state(next, a.state);
    if (next.round < next.manifest.total_rounds()) {
      next = s.engine->propose(std::move(next));
      save_state(next, a.state);
    }
    s.state = std::move(next);
    if (!s.state.pending) return std::nullopt;
    const auto r = s.state.pending->round_index;
    return NextRound{r, phase_for(s.state.manifest, r), tasks_for_batch(*s.state.pending, *s.instances)};
  };

  ServiceOptions opts;
  opts.host = a.host;
  opts.port = a.port;
  opts.static_dir = a.static_dir;
  AnnotationServer server(store, advance, opts);
  const int port = server.bind();
  if (!a.port_file.empty()) write_file_atomic(a.port_file, std::to_string(port) + "\n");
  std::cerr << "listening on " << a.host << ":" << port << "\n";

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  waiter.detach();
  server.listen();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pragex: pragmatic explicitation extraction and active learning"};
  app.require_subcommand(1);
  ModelOptions model;

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Extract explicitation candidates from aligned bitext");
  extract->add_option("--src", ex.src, "Source sentences, one per line")->required();
  extract->add_option("--tgt", ex.tgt, "Target sentences, one per line")->required();
  extract->add_option("--align-a", ex.align_a, "Pharaoh alignments from the first aligner")->required();
  extract->add_option("--align-b", ex.align_b, "Pharaoh alignments from the second aligner");
  extract->add_option("--combine", ex.combine, "How to combine two aligners")
      ->check(CLI::IsMember({"union", "intersection"}));
  extract->add_option("--langs", ex.langs, "Language pair, e.g. en-de");
  extract->add_option("--tagger", ex.tagger, "lexicon:<tsv> or synthetic")->required();
  extract->add_option("--domain", ex.domain, "TED, EUR or SYNTH");
  extract->add_option("--threads", ex.threads, "Worker threads");
  extract->add_option("--out", ex.out, "Candidate JSONL output")->required();
  extract->add_option("--instances-out", ex.instances_out, "Also write every pair as an instance JSONL");

  SyntheticConfig syn;
  std::string synth_out = "synthetic";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with a hidden labeling rule");
  synth->add_option("--seed", syn.seed);
  synth->add_option("--pool-size", syn.pool_size);
  synth->add_option("--pool-positive-rate", syn.pool_positive_rate);
  synth->add_option("--annotated-size", syn.annotated_size);
  synth->add_option("--annotated-positive-rate", syn.annotated_positive_rate);
  synth->add_option("--out-dir", synth_out);

  std::string state_path, instances_path, manifest_path, annotated_path, oracle, labels, tasks_out;
  bool synthetic_oracle_flag = false, propose = false;

  auto* seed = app.add_subcommand("seed", "Split the annotated set, train L0 and write the initial state");
  seed->add_option("--manifest", manifest_path, "Run manifest JSON (defaults used when omitted)");
  seed->add_option("--instances", instances_path)->required();
  seed->add_option("--annotated", annotated_path, "Gold records for the extracted candidates")->required();
  seed->add_option("--state", state_path)->required();
  add_model_options(seed, model);

  auto* round = app.add_subcommand("round", "Propose the next batch or merge its labels");
  round->add_option("--state", state_path)->required();
  round->add_option("--instances", instances_path)->required();
  round->add_flag("--propose", propose);
  round->add_option("--labels", labels, "Labeled records for the pending batch");
  round->add_option("--tasks-out", tasks_out, "Write proposed tasks as JSONL");
  add_model_options(round, model);

  auto* schedule = app.add_subcommand("schedule", "Run every remaining round against an oracle");
  std::size_t augment_n = 0;
  double threshold = 0.5;
  std::string out, curve_out, tests_dir, checkpoint;
  for (auto* cmd : {schedule, app.add_subcommand("augment", "Label a uniform pool sample and record L14")}) {
    cmd->add_option("--state", state_path)->required();
    cmd->add_option("--instances", instances_path)->required();
    cmd->add_option("--oracle", oracle, "Gold records answering every query");
    cmd->add_flag("--synthetic-oracle", synthetic_oracle_flag, "Answer with the synthetic labeling rule");
    add_model_options(cmd, model);
  }
  auto* augment = app.get_subcommand("augment");
  augment->add_option("--n", augment_n, "Sample size (manifest value when 0)");

  auto* predict = app.add_subcommand("predict", "Score the remaining pool with the final model");
  predict->add_option("--state", state_path)->required();
  predict->add_option("--instances", instances_path)->required();
  predict->add_option("--threshold", threshold)->check(CLI::Range(0.0, 1.0));
  predict->add_option("--out", out)->required();
  add_model_options(predict, model);

  auto* eval = app.add_subcommand("eval", "Evaluate checkpoints on per-language test sets");
  eval->add_option("--state", state_path)->required();
  eval->add_option("--instances", instances_path)->required();
  eval->add_option("--tests", tests_dir, "Directory of <language>.jsonl record files")->required();
  eval->add_option("--checkpoint", checkpoint, "Only this checkpoint (L0, L8, L13, L14)");
  eval->add_option("--out", out, "Metrics CSV (stdout when omitted)");
  eval->add_option("--curve-out", curve_out, "Learning-curve CSV with deltas");
  add_model_options(eval, model);

  std::vector<std::string> stats_files;
  auto* stats = app.add_subcommand("stats", "Per-corpus record counts");
  stats->add_option("records", stats_files, "Record JSONL files")->required();

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Serve the annotation REST API for the current round");
  serve->add_option("--state", sv.state)->required();
  serve->add_option("--instances", sv.instances)->required();
  serve->add_option("--dir", sv.dir, "Journal and snapshot directory")->required();
  serve->add_option("--host", sv.host);
  serve->add_option("--port", sv.port, "0 picks a free port");
  serve->add_option("--port-file", sv.port_file, "Write the bound port here once listening");
  serve->add_option("--static", sv.static_dir, "Directory served at /");
  serve->add_option("--snapshot-every", sv.snapshot_every);
  add_model_options(serve, model);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return run_extract(ex);
    if (*synth) return run_synth(syn, synth_out);
    if (*seed) return run_seed(manifest_path, instances_path, annotated_path, state_path, model);
    if (*round) return run_round(state_path, instances_path, propose, labels, tasks_out, model);
    if (*schedule) return run_schedule(state_path, instances_path, oracle, synthetic_oracle_flag, model);
    if (*augment) return run_augment(state_path, instances_path, oracle, synthetic_oracle_flag, augment_n, model);
    if (*predict) return run_predict(state_path, instances_path, threshold, out, model);
    if (*eval) return run_eval(state_path, instances_path, tests_dir, checkpoint, out, curve_out, model);
    if (*stats) return run_stats(stats_files);
    if (*serve) return run_serve(sv, model);
  } catch (const std::exception& e) {
    std::cerr << "pragex: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
