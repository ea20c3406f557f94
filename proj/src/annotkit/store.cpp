#include "annotkit/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "annotkit/error.hpp"
#include "json.hpp"

namespace annotkit {

namespace fs = std::filesystem;

namespace {

constexpr const char* kJournal = ".journal";
constexpr const char* kTempSuffix = ".tmp";

void write_synced(const fs::path& path, const std::string& content) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorCode::io, "cannot write " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < content.size()) {
    const auto n = ::write(fd, content.data() + done, content.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string reason = std::strerror(errno);
      ::close(fd);
      fail(ErrorCode::io, "cannot write " + path.string() + ": " + reason);
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

fs::path temp_of(const fs::path& path) { return path.string() + kTempSuffix; }

void publish(const fs::path& root, const nlohmann::json& journal) {
  for (const auto& entry : journal) {
    const fs::path target = root / entry.at("path").get<std::string>();
    std::error_code ec;
    if (entry.at("op") == "write") {
      const auto temp = temp_of(target);
      if (fs::exists(temp)) fs::rename(temp, target, ec);
      if (ec) fail(ErrorCode::io, "cannot publish " + target.string() + ": " + ec.message());
    } else {
      fs::remove(target, ec);
    }
  }
}

}  // namespace

StoreLock::StoreLock(const fs::path& root) {
  const auto path = root / ".lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) fail(ErrorCode::io, "cannot open " + path.string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    fail(ErrorCode::locked, "store " + root.string() + " is in use by another command");
  }
}

StoreLock::~StoreLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

void Transaction::write(const fs::path& rel, const std::string& content) { changes_[rel] = content; }

void Transaction::remove(const fs::path& rel) { changes_[rel] = std::nullopt; }

void Transaction::commit() {
  if (changes_.empty()) return;
  nlohmann::json journal = nlohmann::json::array();
  for (const auto& [rel, content] : changes_) {
    const auto target = root_ / rel;
    if (content) {
      fs::create_directories(target.parent_path());
      write_synced(temp_of(target), *content);
    }
    journal.push_back({{"op", content ? "write" : "remove"}, {"path", rel.generic_string()}});
  }
  const auto journal_path = root_ / kJournal;
  write_synced(temp_of(journal_path), journal.dump());
  std::error_code ec;
  fs::rename(temp_of(journal_path), journal_path, ec);
  if (ec) fail(ErrorCode::io, "cannot publish journal: " + ec.message());
  publish(root_, journal);
  fs::remove(journal_path, ec);
  changes_.clear();
}

void recover_store(const fs::path& root) {
  const auto journal_path = root / kJournal;
  if (fs::exists(journal_path)) {
    nlohmann::json journal;
    try {
      journal = nlohmann::json::parse(read_text(journal_path));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::internal, "corrupt journal " + journal_path.string() + ": " + e.what());
    }
    publish(root, journal);
    fs::remove(journal_path);
  }
  // Anything still staged belongs to a batch that never reached its journal.
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == kTempSuffix) fs::remove(entry.path());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace annotkit
