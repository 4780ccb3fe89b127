#include "pragex/annotation_store.hpp"

#include <fstream>
#include <variant>

#include "pragex/error.hpp"
#include "pragex/models.hpp"

namespace pragex {

Json task_to_json(const AnnotationTask& task) {
  Json spans = Json::array();
  for (const auto& s : task.spans) spans.push_back({{"start", s.start}, {"end", s.end}});
  return {{"task_id", task.task_id}, {"source", task.source},         {"target", task.target},
          {"spans", std::move(spans)}, {"provenance", task.provenance}, {"round", task.round}};
}

AnnotationTask task_from_json(const Json& j) {
  AnnotationTask t;
  t.task_id = j.at("task_id").get<std::string>();
  t.source = j.at("source").get<std::string>();
  t.target = j.at("target").get<std::string>();
  for (const auto& s : j.at("spans")) t.spans.push_back({s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()});
  t.provenance = j.at("provenance").get<std::string>();
  t.round = j.at("round").get<std::size_t>();
  return t;
}

std::vector<AnnotationTask> tasks_for_batch(const QueryBatch& batch, const InstanceStore& store) {
  std::vector<AnnotationTask> out;
  out.reserve(batch.ids.size());
  for (const auto& id : batch.ids) {
    const auto& inst = store.at(id);
    AnnotationTask t{id, join_tokens(inst.pair.src_tokens), join_tokens(inst.pair.tgt_tokens), {}, batch.provenance.at(id),
                     batch.round_index};
    for (const auto& s : inst.spans) t.spans.push_back({s.start, s.end});
    out.push_back(std::move(t));
  }
  return out;
}

std::string_view submission_status_name(SubmissionStatus s) {
  switch (s) {
    case SubmissionStatus::Accepted: return "accepted";
    case SubmissionStatus::Duplicate: return "duplicate";
    case SubmissionStatus::Rejected: return "rejected";
    case SubmissionStatus::UnknownTask: return "unknown_task";
    case SubmissionStatus::Conflict: return "conflict";
  }
  return "rejected";
}

Json submission_result_to_json(const SubmissionResult& r) {
  Json violations = Json::array();
  for (const auto& v : r.violations) violations.push_back({{"path", v.path}, {"message", v.message}});
  return {{"task_id", r.task_id}, {"status", std::string(submission_status_name(r.status))},
          {"violations", std::move(violations)}};
}

std::uint64_t submission_hash(const AnnotatedRecord& record) {
  auto j = record_to_json(record);
  Json content = {{"al_label", j["al_label"]}, {"spans", j["spans"]}, {"types", j["types"]}, {"styles", j["styles"]}};
  return fnv1a(content.dump());
}

namespace {

// Merges the client's label fields into the task to form a full record.
std::variant<AnnotatedRecord, std::vector<Violation>> to_record(const AnnotationTask& task, const Json& payload) {
  if (!payload.is_object()) return std::vector<Violation>{{"", "submission must be an object"}};
  if (!payload.contains("al_label")) return std::vector<Violation>{{"al_label", "missing"}};
  Json j = {
      {"id", task.task_id},
      {"source", task.source},
      {"target", task.target},
      {"spans", payload.value("spans", Json::array())},
      {"types", payload.value("types", Json::array())},
      {"styles", payload.value("styles", Json::array())},
      {"dataset", "TRAIN"},
      {"al_label", payload.at("al_label")},
  };
  try {
    auto record = record_from_json(j);
    auto violations = validate(record);
    if (!violations.empty()) return violations;
    return record;
  } catch (const Error& e) {
    return std::vector<Violation>{{"", e.what()}};
  }
}

void count(LabelCounts& c, ALLabel label) {
  switch (label) {
    case ALLabel::True: ++c.true_count; break;
    case ALLabel::False: ++c.false_count; break;
    case ALLabel::Discard: ++c.discard_count; break;
  }
}

Json counts_json(const LabelCounts& c) {
  return {{"TRUE", c.true_count}, {"FALSE", c.false_count}, {"DISCARD", c.discard_count}, {"total", c.total()}};
}

}  // namespace

AnnotationStore::AnnotationStore(Options options) : options_(std::move(options)) {
  std::filesystem::create_directories(options_.dir);
  const auto snapshot_path = options_.dir / "snapshot.json";
  std::size_t skip = 0;
  if (std::filesystem::exists(snapshot_path)) {
    std::ifstream in(snapshot_path, std::ios::binary);
    try {
      const auto snap = Json::parse(in);
      skip = snap.at("events").get<std::size_t>();
      load_state(snap.at("state"));
    } catch (const Json::exception& e) {
      throw Error(Errc::InvalidState, snapshot_path.string() + ": " + e.what());
    }
  }
  const auto journal_path = options_.dir / "journal.jsonl";
  const auto contents = read_journal(journal_path);
  if (contents.events.size() < skip)
    throw Error(Errc::InvalidState, "snapshot covers " + std::to_string(skip) + " events but the journal holds " +
                                        std::to_string(contents.events.size()));
  events_ = skip;
  for (std::size_t i = skip; i < contents.events.size(); ++i) {
    apply(contents.events[i]);
    ++events_;
  }
  journal_ = std::make_unique<Journal>(journal_path);
}

void AnnotationStore::commit(const Json& event) {
  journal_->append(event);
  apply(event);
  ++events_;
  if (options_.snapshot_every > 0 && ++since_snapshot_ >= options_.snapshot_every) snapshot();
}

void AnnotationStore::apply(const Json& event) {
  const auto type = event.at("event").get<std::string>();
  if (type == "round_opened") {
    round_ = event.at("round").get<std::size_t>();
    phase_ = event.at("phase").get<std::string>();
    round_open_ = true;
    tasks_.clear();
    task_index_.clear();
    labels_.clear();
    for (const auto& t : event.at("tasks")) {
      task_index_.emplace(t.at("task_id").get<std::string>(), tasks_.size());
      tasks_.push_back(task_from_json(t));
    }
    counts_[round_];
  } else if (type == "label") {
    Label l;
    l.record = record_from_json(event.at("record"));
    l.hash = event.at("hash").get<std::uint64_t>();
    l.annotator = event.value("annotator", "");
    l.timestamp = event.value("timestamp", "");
    count(counts_[round_], l.record.al_label);
    labels_.insert_or_assign(event.at("task_id").get<std::string>(), std::move(l));
  } else if (type == "round_closed") {
    for (auto& [id, l] : labels_) archive_.insert_or_assign(id, l.record);
    labels_.clear();
    tasks_.clear();
    task_index_.clear();
    round_open_ = false;
  } else {
    throw Error(Errc::InvalidState, "unknown journal event '" + type + "'");
  }
}

void AnnotationStore::open_round(std::size_t round, const std::string& phase, std::vector<AnnotationTask> tasks) {
  if (round_open_) throw Error(Errc::InvalidState, "round " + std::to_string(round_) + " is still open");
  Json jt = Json::array();
  for (const auto& t : tasks) jt.push_back(task_to_json(t));
  commit({{"event", "round_opened"}, {"round", round}, {"phase", phase}, {"tasks", std::move(jt)}});
}

std::vector<SubmissionResult> AnnotationStore::submit(const std::vector<Submission>& submissions) {
  std::vector<SubmissionResult> results;
  results.reserve(submissions.size());
  for (const auto& sub : submissions) {
    SubmissionResult r{sub.task_id, SubmissionStatus::Rejected, {}};
    auto it = task_index_.find(sub.task_id);
    if (!round_open_ || it == task_index_.end()) {
      r.status = SubmissionStatus::UnknownTask;
      results.push_back(std::move(r));
      continue;
    }
    auto converted = to_record(tasks_[it->second], sub.payload);
    if (auto* v = std::get_if<std::vector<Violation>>(&converted)) {
      r.violations = std::move(*v);
      results.push_back(std::move(r));
      continue;
    }
    auto& record = std::get<AnnotatedRecord>(converted);
    const auto hash = submission_hash(record);
    if (auto done = labels_.find(sub.task_id); done != labels_.end()) {
      r.status = done->second.hash == hash ? SubmissionStatus::Duplicate : SubmissionStatus::Conflict;
      if (r.status == SubmissionStatus::Conflict)
        r.violations.push_back({"task_id", "task already labeled with different content"});
      results.push_back(std::move(r));
      continue;
    }
    commit({{"event", "label"},
            {"task_id", sub.task_id},
            {"hash", hash},
            {"record", record_to_json(record)},
            {"annotator", sub.payload.value("annotator", "")},
            {"timestamp", sub.payload.value("timestamp", "")}});
    r.status = SubmissionStatus::Accepted;
    results.push_back(std::move(r));
  }
  return results;
}

void AnnotationStore::close_round() {
  if (!round_open_) throw Error(Errc::InvalidState, "no round is open");
  if (open_count() > 0) throw Error(Errc::InvalidState, std::to_string(open_count()) + " tasks are still open");
  commit({{"event", "round_closed"}, {"round", round_}});
}

std::size_t AnnotationStore::open_count() const { return tasks_.size() - labels_.size(); }

std::vector<AnnotationTask> AnnotationStore::next_tasks(std::size_t n) const {
  std::vector<AnnotationTask> out;
  for (const auto& t : tasks_) {
    if (out.size() >= n) break;
    if (!labels_.contains(t.task_id)) out.push_back(t);
  }
  return out;
}

std::vector<AnnotatedRecord> AnnotationStore::round_labels() const {
  if (open_count() > 0) throw Error(Errc::InvalidState, std::to_string(open_count()) + " tasks are still open");
  std::vector<AnnotatedRecord> out;
  for (const auto& t : tasks_) out.push_back(labels_.at(t.task_id).record);
  return out;
}

std::optional<AnnotationTask> AnnotationStore::task(const std::string& id) const {
  auto it = task_index_.find(id);
  if (it == task_index_.end()) return std::nullopt;
  return tasks_[it->second];
}

std::optional<AnnotatedRecord> AnnotationStore::record(const std::string& id) const {
  if (auto it = labels_.find(id); it != labels_.end()) return it->second.record;
  if (auto it = archive_.find(id); it != archive_.end()) return it->second;
  return std::nullopt;
}

Json AnnotationStore::progress() const {
  Json rounds = Json::array();
  LabelCounts total;
  for (const auto& [r, c] : counts_) {
    auto row = counts_json(c);
    row["round"] = r;
    rounds.push_back(std::move(row));
    total.true_count += c.true_count;
    total.false_count += c.false_count;
    total.discard_count += c.discard_count;
  }
  return {{"round", round_},
          {"open", round_open_ ? open_count() : 0},
          {"resolved", labels_.size()},
          {"rounds", std::move(rounds)},
          {"totals", counts_json(total)}};
}

Json AnnotationStore::current_round() const {
  std::map<std::string, std::size_t> provenance;
  for (const auto& t : tasks_) ++provenance[t.provenance];
  return {{"round", round_},       {"phase", phase_},
          {"open", round_open_},   {"batch_size", tasks_.size()},
          {"open_tasks", round_open_ ? open_count() : 0}, {"resolved", labels_.size()},
          {"provenance", provenance}};
}

Json AnnotationStore::state_json() const {
  Json tasks = Json::array();
  for (const auto& t : tasks_) tasks.push_back(task_to_json(t));
  Json labels = Json::array();
  for (const auto& [id, l] : labels_)
    labels.push_back({{"task_id", id}, {"hash", l.hash}, {"record", record_to_json(l.record)},
                      {"annotator", l.annotator}, {"timestamp", l.timestamp}});
  Json archive = Json::array();
  for (const auto& [_, r] : archive_) archive.push_back(record_to_json(r));
  Json counts = Json::array();
  for (const auto& [r, c] : counts_) {
    auto row = counts_json(c);
    row["round"] = r;
    counts.push_back(std::move(row));
  }
  return {{"round", round_},     {"phase", phase_},    {"round_open", round_open_}, {"tasks", std::move(tasks)},
          {"labels", std::move(labels)}, {"archive", std::move(archive)}, {"counts", std::move(counts)}};
}

void AnnotationStore::load_state(const Json& s) {
  round_ = s.at("round").get<std::size_t>();
  phase_ = s.at("phase").get<std::string>();
  round_open_ = s.at("round_open").get<bool>();
  for (const auto& t : s.at("tasks")) {
    task_index_.emplace(t.at("task_id").get<std::string>(), tasks_.size());
    tasks_.push_back(task_from_json(t));
  }
  for (const auto& l : s.at("labels"))
    labels_.emplace(l.at("task_id").get<std::string>(),
                    Label{record_from_json(l.at("record")), l.at("hash").get<std::uint64_t>(),
                          l.at("annotator").get<std::string>(), l.at("timestamp").get<std::string>()});
  for (const auto& r : s.at("archive")) {
    auto rec = record_from_json(r);
    archive_.emplace(rec.id, std::move(rec));
  }
  for (const auto& c : s.at("counts"))
    counts_[c.at("round").get<std::size_t>()] = {c.at("TRUE").get<std::size_t>(), c.at("FALSE").get<std::size_t>(),
                                                 c.at("DISCARD").get<std::size_t>()};
}

void AnnotationStore::snapshot() {
  write_file_atomic(options_.dir / "snapshot.json", Json{{"events", events_}, {"state", state_json()}}.dump());
  since_snapshot_ = 0;
}

}  // namespace pragex
