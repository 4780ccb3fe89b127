#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <map>

#include "process_support.hpp"
#include "test_support.hpp"

namespace pragex {
namespace {

using namespace std::chrono_literals;
using nlohmann::ordered_json;
using testing::fixture;
using testing::TempDir;

const std::string kCli = PRAGEX_CLI;

// id -> "start-end start-end ..." from the hand-written expectation file.
std::map<std::string, std::string> expected_candidates() {
  std::map<std::string, std::string> out;
  for (const auto& line : testing::lines_of(fixture("bitext/candidates.expected"))) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

TEST(Cli, ExtractMatchesHandAnnotatedCandidates) {
  TempDir dir;
  const auto b = fixture("bitext");
  const auto out = dir / "cand.jsonl";
  ASSERT_EQ(testing::run({kCli, "extract", "--src", (b / "src.en").string(), "--tgt", (b / "tgt.de").string(),
                          "--align-a", (b / "align_a.txt").string(), "--align-b", (b / "align_b.txt").string(),
                          "--tagger", "lexicon:" + (b / "lexicon.tsv").string(), "--langs", "en-de", "--out",
                          out.string()},
                         dir / "log"),
            0)
      << testing::slurp(dir / "log");
  std::map<std::string, std::string> got;
  for (const auto& line : testing::lines_of(out)) {
    const auto j = ordered_json::parse(line);
    std::string spans;
    for (const auto& s : j.at("spans")) {
      if (!spans.empty()) spans += ' ';
      spans += std::to_string(s.at("start").get<int>()) + "-" + std::to_string(s.at("end").get<int>());
    }
    got[j.at("pair_id")] = spans;
  }
  EXPECT_EQ(got, expected_candidates());
}

TEST(Cli, StatsAndErrors) {
  TempDir dir;
  testing::spit(dir / "r.jsonl",
                R"j({"id":"ted-en2de-1","source":"a","target":"b ( c )","spans":[{"start":1,"end":4,"source":null,"types":["MEAS_CONV"]}],"types":["MEAS_CONV"],"styles":["A"],"dataset":"POOL","al_label":"TRUE"})j"
                "\n"
                R"({"id":"ted-en2de-2","source":"a","target":"b","spans":[],"types":[],"styles":[],"dataset":"EXTR","al_label":"FALSE"})"
                "\n");
  ASSERT_EQ(testing::run({kCli, "stats", (dir / "r.jsonl").string()}, dir / "log"), 0) << testing::slurp(dir / "log");
  EXPECT_EQ(testing::slurp(dir / "log"), "corpus\tPOOL\tEXTR\tTRAIN\tENT\tSYS\tLING\tADD\nTED-DE\t1\t1\t0\t0\t1\t0\t0\n");
  EXPECT_EQ(testing::run({kCli, "stats", (dir / "missing.jsonl").string()}, dir / "err"), 2);
  EXPECT_NE(testing::slurp(dir / "err").find("FileNotFound"), std::string::npos);
  EXPECT_NE(testing::run({kCli, "no-such-command"}, dir / "err2"), 0);
}

// A seeded run served over HTTP, killed without warning mid-round and
// restarted on the same journal.
class ServeRun {
 public:
  ServeRun() {
    const auto syn = dir_ / "syn";
    must({kCli, "synth", "--seed", "3", "--pool-size", "600", "--annotated-size", "400", "--out-dir", syn.string()});
    testing::spit(dir_ / "manifest.json",
                  R"({"combined_rounds":2,"combined_batch":10,"uncertainty_rounds":1,"uncertainty_batch":5,)"
                  R"("augment_size":20,"epochs":3})");
    instances_ = (syn / "instances.jsonl").string();
    must({kCli, "seed", "--manifest", (dir_ / "manifest.json").string(), "--instances", instances_, "--annotated",
          (syn / "annotated.jsonl").string(), "--state", (dir_ / "state.json").string()});
  }
  ~ServeRun() {
    if (pid_ > 0) testing::kill_hard(pid_);
  }

  void start() {
    const auto port_file = dir_ / "port";
    std::filesystem::remove(port_file);
    pid_ = testing::spawn({kCli, "serve", "--state", (dir_ / "state.json").string(), "--instances", instances_,
                           "--dir", (dir_ / "journal").string(), "--port", "0", "--port-file", port_file.string(),
                           "--snapshot-every", "4"},
                          dir_ / "serve.log");
    ASSERT_GT(pid_, 0);
    ASSERT_TRUE(testing::wait_for_file(port_file, 60s)) << testing::slurp(dir_ / "serve.log");
    client_ = std::make_unique<httplib::Client>("127.0.0.1", std::stoi(testing::slurp(port_file)));
    client_->set_read_timeout(120s);
  }
  void crash() {
    testing::kill_hard(pid_);
    pid_ = -1;
  }

  std::pair<int, ordered_json> get(const std::string& path) {
    auto r = client_->Get(path.c_str());
    if (!r) return {-1, {}};
    return {r->status, ordered_json::parse(r->body)};
  }
  std::pair<int, ordered_json> post(const std::string& path, const ordered_json& body) {
    auto r = client_->Post(path.c_str(), body.dump(), "application/json");
    if (!r) return {-1, {}};
    return {r->status, ordered_json::parse(r->body)};
  }

 private:
  void must(const std::vector<std::string>& argv) {
    ASSERT_EQ(testing::run(argv, dir_ / "setup.log"), 0) << testing::slurp(dir_ / "setup.log");
  }

  TempDir dir_;
  std::string instances_;
  pid_t pid_ = -1;
  std::unique_ptr<httplib::Client> client_;
};

ordered_json false_labels(const ordered_json& tasks, std::size_t from, std::size_t to) {
  ordered_json out = ordered_json::array();
  for (std::size_t i = from; i < to; ++i) out.push_back({{"task_id", tasks[i].at("task_id")}, {"al_label", "FALSE"}});
  return out;
}

TEST(Cli, ServeSurvivesKillAndReplaysJournal) {
  ServeRun run;
  run.start();
  const auto tasks = run.get("/tasks/next?n=100").second.at("tasks");
  ASSERT_EQ(tasks.size(), 10u);
  ASSERT_EQ(run.post("/labels", false_labels(tasks, 0, 3)).first, 200);
  ASSERT_EQ(run.post("/labels", false_labels(tasks, 3, 6)).first, 200);
  const auto before = run.get("/progress").second;
  EXPECT_EQ(before.at("open"), 4);

  run.crash();
  run.start();
  EXPECT_EQ(run.get("/progress").second, before);
  const auto rest = run.get("/tasks/next?n=100").second.at("tasks");
  ASSERT_EQ(rest.size(), 4u);
  EXPECT_EQ(rest[0].at("task_id"), tasks[6].at("task_id"));

  // A client retrying an acknowledged submission sees a duplicate.
  const auto [status, retry] = run.post("/labels", false_labels(tasks, 0, 1));
  EXPECT_EQ(status, 200);
  EXPECT_EQ(retry.at("results")[0].at("status"), "duplicate");

  ASSERT_EQ(run.post("/labels", false_labels(tasks, 6, 10)).first, 200);
  const auto [adv, body] = run.post("/rounds/advance", ordered_json::object());
  ASSERT_EQ(adv, 200) << body.dump();
  EXPECT_EQ(body.at("round"), 2);

  run.crash();
  run.start();
  const auto after = run.get("/progress").second;
  EXPECT_EQ(after.at("round"), 2);
  EXPECT_EQ(after.at("open"), 10);
  EXPECT_EQ(after.at("totals").at("FALSE"), 10);
}

}  // namespace
}  // namespace pragex
