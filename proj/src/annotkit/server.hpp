#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "annotkit/merge.hpp"
#include "annotkit/project.hpp"

namespace annotkit {

// In-memory view of one merged stage and its partial resolutions. Readers take
// a shared lock and see a consistent snapshot; submissions are serialized and
// persisted before they become visible.
class ResolutionSession {
 public:
  ResolutionSession(Project& project, std::string stage);

  Json state() const;
  Json conflicts() const;
  // Accepts valid items, rejects the rest with per-item errors. Last write wins.
  Json submit(const Json& body);
  // Null when the id is unknown.
  Json document(const std::string& id) const;
  bool complete() const;

 private:
  Json state_locked() const;

  Project& project_;
  std::string stage_;
  std::vector<MergedDocument> merged_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> index_;  // conflict_id → (doc, conflict)
  std::map<std::string, Resolution> resolutions_;
  mutable std::shared_mutex mutex_;
};

// Serves the resolution API on 127.0.0.1 until stop() or until every conflict
// is resolved.
class ResolveServer {
 public:
  ResolveServer(Project& project, const std::string& stage, const std::string& host, int port);
  ~ResolveServer();

  int port() const { return port_; }
  void wait();
  void stop();
  const ResolutionSession& session() const { return session_; }

 private:
  struct Impl;
  ResolutionSession session_;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace annotkit
