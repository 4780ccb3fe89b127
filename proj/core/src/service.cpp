#include "pragex/service.hpp"

#include <httplib.h>

#include <shared_mutex>
#include <thread>

#include "pragex/error.hpp"

namespace pragex {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationStore& store;
  AdvanceHandler advance;
  ServiceOptions options;
  httplib::Server server;
  std::shared_mutex mutex;
  std::thread thread;
  bool bound = false;

  Impl(AnnotationStore& s, AdvanceHandler a, ServiceOptions o)
      : store(s), advance(std::move(a)), options(std::move(o)) {}

  void routes();
};

void AnnotationServer::Impl::routes() {
  server.set_default_headers({
      {"Access-Control-Allow-Origin", options.cors_origin},
      {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
      {"Access-Control-Allow-Headers", "Content-Type"},
  });
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, e.code() == Errc::ValidationFailure ? 422 : 500, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"ok", true}}); });

  server.Get("/rounds/current", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex);
    send_json(res, 200, store.current_round());
  });

  server.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
    std::size_t n = 1;
    if (req.has_param("n")) {
      try {
        n = std::stoul(req.get_param_value("n"));
      } catch (const std::exception&) {
        return send_error(res, 400, "n must be a non-negative integer");
      }
    }
    std::shared_lock lock(mutex);
    Json tasks = Json::array();
    for (const auto& t : store.next_tasks(n)) tasks.push_back(task_to_json(t));
    send_json(res, 200, {{"round", store.round()}, {"tasks", std::move(tasks)}});
  });

  server.Post("/labels", [this](const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::exception& e) {
      return send_error(res, 400, std::string("malformed JSON: ") + e.what());
    }
    const Json& items = body.is_object() && body.contains("submissions") ? body.at("submissions") : body;
    if (!items.is_array()) return send_error(res, 400, "expected an array of submissions");
    std::vector<Submission> subs;
    for (const auto& item : items) {
      if (!item.is_object() || !item.contains("task_id") || !item.at("task_id").is_string())
        return send_error(res, 400, "every submission needs a string task_id");
      subs.push_back({item.at("task_id").get<std::string>(), item});
    }
    std::vector<SubmissionResult> results;
    {
      std::unique_lock lock(mutex);
      results = store.submit(subs);
    }
    int status = 200;
    Json out = Json::array();
    for (const auto& r : results) {
      if (r.status == SubmissionStatus::UnknownTask) status = 404;
      else if (status == 200 && r.status == SubmissionStatus::Rejected) status = 422;
      else if (status == 200 && r.status == SubmissionStatus::Conflict) status = 409;
      out.push_back(submission_result_to_json(r));
    }
    send_json(res, status, {{"results", std::move(out)}});
  });

  server.Post("/rounds/advance", [this](const httplib::Request&, httplib::Response& res) {
    std::unique_lock lock(mutex);
    if (!store.has_round()) return send_error(res, 409, "no round is open");
    if (const auto open = store.open_count(); open > 0)
      return send_json(res, 409, {{"error", "round has open tasks"}, {"open_tasks", open}});
    const auto labels = store.round_labels();
    const auto next = advance(labels);
    const auto finished = store.round();
    store.close_round();
    if (next) store.open_round(next->round, next->phase, next->tasks);
    send_json(res, 200, {{"advanced_from", finished}, {"round", store.round()}, {"complete", !next.has_value()}});
  });

  server.Get("/progress", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex);
    send_json(res, 200, store.progress());
  });

  server.Get(R"(/records/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    std::shared_lock lock(mutex);
    if (auto r = store.record(id)) return send_json(res, 200, {{"status", "labeled"}, {"record", record_to_json(*r)}});
    if (auto t = store.task(id)) return send_json(res, 200, {{"status", "open"}, {"task", task_to_json(*t)}});
    send_error(res, 404, "unknown record " + id);
  });

  server.Post("/render", [](const httplib::Request& req, httplib::Response& res) {
    AnnotatedRecord record;
    try {
      record = record_from_json(Json::parse(req.body));
    } catch (const Json::exception& e) {
      return send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const Error& e) {
      return send_error(res, 422, e.what());
    }
    if (auto v = validate(record); !v.empty()) {
      Json violations = Json::array();
      for (const auto& x : v) violations.push_back({{"path", x.path}, {"message", x.message}});
      return send_json(res, 422, {{"violations", std::move(violations)}});
    }
    const auto b = render_brackets(record);
    send_json(res, 200, {{"source", b.source}, {"target", b.target}});
  });

  if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir.string()))
    throw Error(Errc::InvalidConfig, "static directory not found: " + options.static_dir.string());
}

AnnotationServer::AnnotationServer(AnnotationStore& store, AdvanceHandler advance, ServiceOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(advance), std::move(options))) {
  impl_->routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind() {
  if (impl_->bound) return port_;
  const auto& o = impl_->options;
  if (o.port == 0) {
    port_ = impl_->server.bind_to_any_port(o.host);
  } else {
    port_ = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  if (port_ < 0) throw Error(Errc::InvalidConfig, "cannot bind " + o.host + ":" + std::to_string(o.port));
  impl_->bound = true;
  return port_;
}

void AnnotationServer::listen() {
  bind();
  impl_->server.listen_after_bind();
}

void AnnotationServer::start() {
  bind();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void AnnotationServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace pragex
