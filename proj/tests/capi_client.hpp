#pragma once

// Thin RAII client over the C API, for tests that drive the shared library.

#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include <unistd.h>

#include "annotkit/annotkit.h"
#include "json.hpp"

namespace annotkit::testing {

using Json = nlohmann::ordered_json;

struct CallError : std::runtime_error {
  CallError(annotkit_status s, const std::string& message) : std::runtime_error(message), status(s) {}
  annotkit_status status;
};

inline void check_call(annotkit_status status) {
  if (status != ANNOTKIT_OK) throw CallError(status, annotkit_last_error());
}

inline Json take(char* raw) {
  Json j = Json::parse(raw);
  annotkit_free(raw);
  return j;
}

inline Json init_store(const std::filesystem::path& root, const Json& manifest) {
  char* raw = nullptr;
  check_call(annotkit_init(root.c_str(), manifest.dump().c_str(), &raw));
  return take(raw);
}

class Store {
 public:
  explicit Store(const std::filesystem::path& root) { check_call(annotkit_open(root.c_str(), &handle_)); }
  ~Store() { annotkit_close(handle_); }
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  Json run(const std::string& command, const Json& args = Json::object()) {
    char* raw = nullptr;
    check_call(annotkit_run(handle_, command.c_str(), args.dump().c_str(), &raw));
    return take(raw);
  }

  annotkit_project* handle() { return handle_; }

 private:
  annotkit_project* handle_ = nullptr;
};

// Relative path → content for every regular file under `root`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::FILE* f = std::fopen(entry.path().c_str(), "rb");
    std::string content;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) content.append(buf, n);
    std::fclose(f);
    files[std::filesystem::relative(entry.path(), root).generic_string()] = content;
  }
  return files;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("annotkit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace annotkit::testing
