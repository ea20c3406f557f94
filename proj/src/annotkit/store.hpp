#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace annotkit {

// Exclusive advisory lock on <root>/.lock, held for the object's lifetime.
class StoreLock {
 public:
  explicit StoreLock(const std::filesystem::path& root);
  ~StoreLock();
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

// Stages whole-file replacements and deletions, then publishes them together.
//
// Every file is first written as <name>.tmp. commit() records the batch in a
// journal, which is itself published by rename; after that point recover()
// finishes an interrupted batch, and before it the store is untouched.
class Transaction {
 public:
  explicit Transaction(std::filesystem::path root) : root_(std::move(root)) {}

  // Paths are relative to the store root.
  void write(const std::filesystem::path& rel, const std::string& content);
  void remove(const std::filesystem::path& rel);
  bool empty() const { return changes_.empty(); }

  void commit();

 private:
  std::filesystem::path root_;
  std::map<std::filesystem::path, std::optional<std::string>> changes_;
};

// Completes or discards a transaction left by an interrupted command.
void recover_store(const std::filesystem::path& root);

std::string read_text(const std::filesystem::path& path);

}  // namespace annotkit
