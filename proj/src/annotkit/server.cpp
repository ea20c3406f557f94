#include "annotkit/server.hpp"

#include <mutex>

#include "annotkit/error.hpp"
#include "annotkit/formats.hpp"
#include "httplib.h"

namespace annotkit {

ResolutionSession::ResolutionSession(Project& project, std::string stage)
    : project_(project), stage_(std::move(stage)), merged_(project.load_merged(stage_)) {
  if (project_.is_applied(stage_)) fail(ErrorCode::state, "stage " + stage_ + " has already been applied");
  for (std::size_t d = 0; d < merged_.size(); ++d) {
    for (std::size_t c = 0; c < merged_[d].conflicts.size(); ++c) index_.emplace(merged_[d].conflicts[c].conflict_id, std::pair{d, c});
  }
  for (auto& r : project_.load_resolutions(stage_)) {
    if (index_.count(r.conflict_id)) resolutions_.insert_or_assign(r.conflict_id, std::move(r));
  }
}

Json ResolutionSession::state_locked() const {
  std::size_t with_conflicts = 0;
  for (const auto& m : merged_) with_conflicts += m.conflicts.empty() ? 0 : 1;
  return Json{{"stage", stage_},
              {"iteration", project_.iteration_count()},
              {"documents", merged_.size()},
              {"documents_with_conflicts", with_conflicts},
              {"conflicts_total", index_.size()},
              {"conflicts_resolved", resolutions_.size()},
              {"complete", resolutions_.size() == index_.size()}};
}

Json ResolutionSession::state() const {
  std::shared_lock lock(mutex_);
  return state_locked();
}

Json ResolutionSession::conflicts() const {
  std::shared_lock lock(mutex_);
  Json docs = Json::array();
  for (auto m : merged_) {
    if (m.conflicts.empty()) continue;
    for (auto& c : m.conflicts) {
      const auto it = resolutions_.find(c.conflict_id);
      if (it != resolutions_.end()) c.resolution = it->second;
    }
    docs.push_back({{"document", formats::to_json(project_.documents().at(m.doc_id))}, {"merged", formats::to_json(m)}});
  }
  Json out = state_locked();
  out["items"] = std::move(docs);
  return out;
}

Json ResolutionSession::submit(const Json& body) {
  if (!body.is_array()) fail(ErrorCode::parse, "expected a JSON array of resolutions");
  std::unique_lock lock(mutex_);
  auto next = resolutions_;
  Json accepted = Json::array();
  Json rejected = Json::array();
  for (std::size_t i = 0; i < body.size(); ++i) {
    Json id = body[i].is_object() && body[i].contains("conflict_id") ? body[i]["conflict_id"] : Json(nullptr);
    try {
      auto r = formats::resolution_from_json(body[i]);
      const auto it = index_.find(r.conflict_id);
      if (it == index_.end()) fail(ErrorCode::reference, "unknown conflict_id '" + r.conflict_id + "'");
      const auto& m = merged_[it->second.first];
      const auto report = check_resolution(m.conflicts[it->second.second], r, project_.documents().at(m.doc_id),
                                           project_.manifest().schema);
      if (!report.empty()) fail(ErrorCode::validation, describe(report));
      accepted.push_back(r.conflict_id);
      next.insert_or_assign(r.conflict_id, std::move(r));
    } catch (const Error& e) {
      rejected.push_back({{"index", i}, {"conflict_id", id}, {"code", error_code_name(e.code())}, {"message", e.what()}});
    }
  }
  if (!accepted.empty()) {
    std::vector<Resolution> ordered;
    for (const auto& m : merged_) {
      for (const auto& c : m.conflicts) {
        const auto it = next.find(c.conflict_id);
        if (it != next.end()) ordered.push_back(it->second);
      }
    }
    project_.save_resolutions(stage_, ordered);
    resolutions_ = std::move(next);
  }
  Json out = state_locked();
  out["accepted"] = std::move(accepted);
  out["rejected"] = std::move(rejected);
  return out;
}

Json ResolutionSession::document(const std::string& id) const {
  const auto it = project_.documents().find(id);
  if (it == project_.documents().end()) return nullptr;
  return formats::to_json(it->second);
}

bool ResolutionSession::complete() const {
  std::shared_lock lock(mutex_);
  return resolutions_.size() == index_.size();
}

struct ResolveServer::Impl {
  httplib::Server http;
};

namespace {

void send_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  const int status = code == ErrorCode::reference ? 404 : code == ErrorCode::internal ? 500 : 400;
  send_json(res, Json{{"error", {{"code", error_code_name(code)}, {"message", message}}}}, status);
}

}  // namespace

ResolveServer::ResolveServer(Project& project, const std::string& stage, const std::string& host, int port)
    : session_(project, stage), impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  http.Get("/api/state", [this](const httplib::Request&, httplib::Response& res) { send_json(res, session_.state()); });
  http.Get("/api/conflicts", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, session_.conflicts());
  });
  http.Get(R"(/api/doc/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const auto doc = session_.document(req.matches[1]);
    if (doc.is_null()) return send_error(res, ErrorCode::reference, "unknown doc_id '" + req.matches[1].str() + "'");
    send_json(res, doc);
  });
  http.Post("/api/resolutions", [this](const httplib::Request& req, httplib::Response& res) {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      return send_error(res, ErrorCode::parse, std::string("malformed JSON: ") + e.what());
    }
    try {
      send_json(res, session_.submit(body));
    } catch (const Error& e) {
      return send_error(res, e.code(), e.what());
    }
    if (session_.complete()) impl_->http.stop();
  });
  http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorCode::internal, e.what());
    }
  });

  port_ = port == 0 ? http.bind_to_any_port(host) : (http.bind_to_port(host, port) ? port : -1);
  if (port_ < 0) fail(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port));
  if (session_.complete()) return;  // nothing to resolve; never starts listening
  thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

ResolveServer::~ResolveServer() {
  stop();
  wait();
}

void ResolveServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void ResolveServer::stop() { impl_->http.stop(); }

}  // namespace annotkit
