#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pragex/annotation_store.hpp"

namespace pragex {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path static_dir;  // served at "/" when set
  std::string cors_origin = "*";
};

struct NextRound {
  std::size_t round = 0;
  std::string phase;
  std::vector<AnnotationTask> tasks;
};

// Called by POST /rounds/advance with the finished round's labels in task
// order. Merges them into the learner and returns the next round, or nullopt
// when the schedule is complete. May throw Error(ValidationFailure).
using AdvanceHandler = std::function<std::optional<NextRound>(const std::vector<AnnotatedRecord>&)>;

// JSON API over an AnnotationStore:
//   GET  /rounds/current      round metadata
//   GET  /tasks/next?n=K      up to K open tasks
//   POST /labels              {"submissions": [...]} or a bare array; per-item
//                             results, 422 if any failed validation, 404 if
//                             any named an unknown task
//   POST /rounds/advance      409 while tasks are open
//   GET  /progress            label counts per round
//   GET  /records/{id}        labeled record or open task, else 404
//   POST /render              bracket preview of a record
// Readers share a lock; label acceptance and advancing are exclusive.
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, AdvanceHandler advance, ServiceOptions options = {});
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  // Binds the socket and returns the port actually used.
  int bind();
  // Serves until stop(); binds first if needed.
  void listen();
  // listen() on a background thread; returns once the server accepts.
  void start();
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace pragex
