#include "annotkit/annotkit.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "annotkit/error.hpp"
#include "annotkit/formats.hpp"
#include "annotkit/project.hpp"
#include "annotkit/server.hpp"

struct annotkit_project {
  std::unique_ptr<annotkit::Project> impl;
};

struct annotkit_server {
  std::unique_ptr<annotkit::ResolveServer> impl;
};

namespace {

thread_local std::string last_error;

char* duplicate(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
annotkit_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return ANNOTKIT_OK;
  } catch (const annotkit::Error& e) {
    last_error = e.what();
    return static_cast<annotkit_status>(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("malformed JSON: ") + e.what();
    return ANNOTKIT_E_PARSE;
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return ANNOTKIT_E_IO;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return ANNOTKIT_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return ANNOTKIT_E_INTERNAL;
  }
}

void require(bool ok, const char* message) {
  if (!ok) annotkit::fail(annotkit::ErrorCode::invalid_argument, message);
}

}  // namespace

extern "C" {

const char* annotkit_version(void) { return "0.1.0"; }

const char* annotkit_status_name(annotkit_status status) {
  if (status == ANNOTKIT_OK) return "OK";
  if (status < ANNOTKIT_E_INVALID_ARGUMENT || status > ANNOTKIT_E_INTERNAL) return "E_UNKNOWN";
  return annotkit::error_code_name(static_cast<annotkit::ErrorCode>(status));
}

const char* annotkit_last_error(void) { return last_error.c_str(); }

void annotkit_free(char* string) { std::free(string); }

annotkit_status annotkit_init(const char* root, const char* manifest_json, char** report) {
  return guarded([&] {
    require(root && manifest_json, "root and manifest are required");
    const auto manifest = annotkit::formats::manifest_from_json(annotkit::Json::parse(manifest_json));
    const auto out = annotkit::Project::init(root, manifest);
    if (report) *report = duplicate(out.dump());
  });
}

annotkit_status annotkit_open(const char* root, annotkit_project** project) {
  return guarded([&] {
    require(root && project, "root and project are required");
    *project = nullptr;
    auto handle = std::make_unique<annotkit_project>();
    handle->impl = std::make_unique<annotkit::Project>(root);
    *project = handle.release();
  });
}

void annotkit_close(annotkit_project* project) { delete project; }

annotkit_status annotkit_run(annotkit_project* project, const char* command, const char* args_json, char** report) {
  return guarded([&] {
    require(project && command && report, "project, command and report are required");
    *report = nullptr;
    const auto args = args_json ? annotkit::Json::parse(args_json) : annotkit::Json::object();
    *report = duplicate(project->impl->run(command, args).dump());
  });
}

annotkit_status annotkit_server_start(annotkit_project* project, const annotkit_server_options* options,
                                      annotkit_server** server) {
  return guarded([&] {
    require(project && server, "project and server are required");
    *server = nullptr;
    const std::string host = options && options->host ? options->host : "127.0.0.1";
    const int port = options ? options->port : 0;
    const std::string stage = options && options->stage ? options->stage : project->impl->pending_stage();
    auto handle = std::make_unique<annotkit_server>();
    handle->impl = std::make_unique<annotkit::ResolveServer>(*project->impl, stage, host, port);
    *server = handle.release();
  });
}

int annotkit_server_port(const annotkit_server* server) { return server ? server->impl->port() : -1; }

void annotkit_server_wait(annotkit_server* server) {
  if (server) server->impl->wait();
}

void annotkit_server_stop(annotkit_server* server) {
  if (server) server->impl->stop();
}

annotkit_status annotkit_server_state(const annotkit_server* server, char** state) {
  return guarded([&] {
    require(server && state, "server and state are required");
    *state = duplicate(server->impl->session().state().dump());
  });
}

void annotkit_server_destroy(annotkit_server* server) { delete server; }

}  // extern "C"
