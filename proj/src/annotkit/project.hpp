#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "annotkit/core.hpp"
#include "annotkit/merge.hpp"
#include "annotkit/partition.hpp"
#include "annotkit/store.hpp"
#include "json.hpp"

namespace annotkit {

using Json = nlohmann::ordered_json;

// Stage names: "test" for the held-out set, then "iter-0001", "iter-0002", ...
std::string stage_name(int number);

// An open store. Holds the store lock until destroyed.
//
// Commands take their arguments as a JSON object and return a JSON report with
// at least "command", "summary" and "warnings".
class Project {
 public:
  // Creates a store in `root`, which must be absent or empty.
  static Json init(const std::filesystem::path& root, const ProjectManifest& manifest);

  explicit Project(std::filesystem::path root);

  Json run(const std::string& command, const Json& args);

  const std::filesystem::path& root() const { return root_; }
  const ProjectManifest& manifest() const { return manifest_; }
  const std::map<std::string, Document>& documents() const { return docs_; }

  // Stage awaiting resolution: the latest merged, unapplied stage.
  std::string pending_stage() const;
  std::vector<MergedDocument> load_merged(const std::string& stage) const;
  std::vector<Resolution> load_resolutions(const std::string& stage) const;
  void save_resolutions(const std::string& stage, const std::vector<Resolution>& resolutions);
  bool is_applied(const std::string& stage) const;
  int iteration_count() const;

 private:
  Json add_docs(const Json& args);
  Json status(const Json& args);
  Json plan(const Json& args);
  Json export_tasks(const Json& args);
  Json import_annotations(const Json& args);
  Json merge(const Json& args);
  Json apply(const Json& args);
  Json agreement(const Json& args);
  Json eval(const Json& args);
  Json curve(const Json& args);
  Json monitor_split(const Json& args);
  Json resplit(const Json& args);
  Json weak_label(const Json& args);
  Json bootstrap(const Json& args);
  Json select(const Json& args);
  Json adjust(const Json& args);
  Json guidelines(const Json& args);

  std::vector<std::string> stages() const;
  std::string resolve_stage(const Json& args) const;
  BatchPlan load_plan(const std::string& stage) const;
  std::map<std::string, AnnotationSet> load_stage_annotations(const std::string& stage) const;
  AnnotationSet load_set(const std::filesystem::path& rel, const std::string& annotator) const;
  // All resolved annotations across stage pools, keyed by doc_id.
  std::map<std::string, Annotation> resolved() const;
  std::vector<std::string> unannotated() const;
  const Document& document(const std::string& id) const;
  void write_manifest(Transaction& txn) const;

  std::filesystem::path root_;
  StoreLock lock_;
  ProjectManifest manifest_;
  std::vector<Document> doc_order_;
  std::map<std::string, Document> docs_;
};

}  // namespace annotkit
