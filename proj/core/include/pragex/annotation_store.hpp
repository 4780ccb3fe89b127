#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pragex/engine.hpp"
#include "pragex/journal.hpp"
#include "pragex/records_io.hpp"
#include "pragex/schema.hpp"

namespace pragex {

// One queried record waiting for a human label. The task id is the record
// id: a record leaves the pool when queried, so it is asked for at most once.
struct AnnotationTask {
  std::string task_id;
  std::string source;
  std::string target;
  std::vector<TokenRange> spans;
  std::string provenance;
  std::size_t round = 0;

  friend bool operator==(const AnnotationTask&, const AnnotationTask&) = default;
};

Json task_to_json(const AnnotationTask& task);
AnnotationTask task_from_json(const Json& j);

// Builds the tasks for a pending engine batch.
std::vector<AnnotationTask> tasks_for_batch(const QueryBatch& batch, const InstanceStore& store);

// Client payload: {task_id, al_label, spans?, types?, styles?, annotator?, timestamp?}
struct Submission {
  std::string task_id;
  Json payload;
};

enum class SubmissionStatus { Accepted, Duplicate, Rejected, UnknownTask, Conflict };

std::string_view submission_status_name(SubmissionStatus s);

struct SubmissionResult {
  std::string task_id;
  SubmissionStatus status = SubmissionStatus::Rejected;
  std::vector<Violation> violations;
};

Json submission_result_to_json(const SubmissionResult& r);

// Hash over the label content only (label, spans, types, styles), so a
// retried POST with a different timestamp is still recognised.
std::uint64_t submission_hash(const AnnotatedRecord& record);

// Label state for the human side of the loop. Every mutation is journaled
// before it takes effect; the state is a fold over the journal, optionally
// started from a snapshot. Not synchronised: callers serialise writers.
class AnnotationStore {
 public:
  struct Options {
    std::filesystem::path dir;
    std::size_t snapshot_every = 64;  // events between snapshots, 0 disables
  };

  explicit AnnotationStore(Options options);

  // Journals a new round. InvalidState while a round is still open.
  void open_round(std::size_t round, const std::string& phase, std::vector<AnnotationTask> tasks);
  std::vector<SubmissionResult> submit(const std::vector<Submission>& submissions);
  // Journals the close of the current round; InvalidState with open tasks.
  void close_round();

  bool has_round() const noexcept { return round_open_; }
  std::size_t round() const noexcept { return round_; }
  const std::string& phase() const noexcept { return phase_; }
  std::size_t open_count() const;
  std::vector<AnnotationTask> next_tasks(std::size_t n) const;
  // Labels of the current round in task order. InvalidState while open.
  std::vector<AnnotatedRecord> round_labels() const;

  std::optional<AnnotationTask> task(const std::string& id) const;
  std::optional<AnnotatedRecord> record(const std::string& id) const;

  Json progress() const;
  Json current_round() const;
  std::size_t events_applied() const noexcept { return events_; }

  void snapshot();
  Json state_json() const;

 private:
  struct Label {
    AnnotatedRecord record;
    std::uint64_t hash = 0;
    std::string annotator;
    std::string timestamp;
  };

  void apply(const Json& event);
  void commit(const Json& event);
  void load_state(const Json& state);

  Options options_;
  std::unique_ptr<Journal> journal_;
  std::size_t events_ = 0;
  std::size_t since_snapshot_ = 0;

  std::size_t round_ = 0;
  std::string phase_;
  bool round_open_ = false;
  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::size_t> task_index_;
  std::map<std::string, Label> labels_;  // current round
  std::map<std::string, AnnotatedRecord> archive_;  // closed rounds
  std::map<std::size_t, LabelCounts> counts_;
};

}  // namespace pragex
