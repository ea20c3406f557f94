#include "annotkit/project.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "annotkit/accelerate.hpp"
#include "annotkit/agreement.hpp"
#include "annotkit/error.hpp"
#include "annotkit/formats.hpp"
#include "annotkit/metrics.hpp"
#include "annotkit/monitor.hpp"
#include "annotkit/rng.hpp"
#include "annotkit/schema_ops.hpp"
#include "annotkit/text.hpp"

namespace annotkit {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kDocs = "docs.jsonl";
constexpr const char* kCurve = "curve.csv";
constexpr const char* kMonitor = "monitor.json";
constexpr const char* kTestStage = "test";

fs::path plan_path(const std::string& stage) { return fs::path("plans") / (stage + ".json"); }
fs::path merge_path(const std::string& stage) { return fs::path("merges") / (stage + ".json"); }
fs::path resolutions_path(const std::string& stage) { return fs::path("resolutions") / (stage + ".json"); }
fs::path pool_path(const std::string& stage) { return fs::path("pool") / (stage + ".jsonl"); }
fs::path annotations_path(const std::string& stage, const std::string& annotator) {
  return fs::path("annotations") / stage / (annotator + ".jsonl");
}
fs::path preannotations_path(const std::string& source) { return fs::path("preannotations") / (source + ".jsonl"); }

std::string pretty(const formats::Json& j) { return j.dump(2) + "\n"; }

std::string number(double v) { return formats::Json(v).dump(); }

// Accumulates one command's report.
class Report {
 public:
  explicit Report(const std::string& command) { body_["command"] = command; }

  formats::Json& operator[](const char* key) { return body_[key]; }
  void warn(std::string message) { warnings_.push_back(std::move(message)); }

  formats::Json finish(const std::string& summary) {
    body_["summary"] = summary;
    body_["warnings"] = warnings_;
    return std::move(body_);
  }

 private:
  formats::Json body_ = formats::Json::object();
  std::vector<std::string> warnings_;
};

template <typename T>
T arg_or(const formats::Json& args, const char* key, T fallback) {
  const auto it = args.find(key);
  if (it == args.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::invalid_argument, std::string("argument '") + key + "' has the wrong type");
  }
}

template <typename T>
T required(const formats::Json& args, const char* key) {
  const auto it = args.find(key);
  if (it == args.end() || it->is_null()) fail(ErrorCode::invalid_argument, std::string("missing argument '") + key + "'");
  return arg_or<T>(args, key, T{});
}

std::vector<std::string> read_id_list(const fs::path& path) {
  const auto j = formats::read_json_file(path);
  if (!j.is_array()) fail(ErrorCode::parse, path.string() + ": expected a JSON array of doc ids");
  std::vector<std::string> ids;
  for (const auto& v : j) {
    if (!v.is_string()) fail(ErrorCode::parse, path.string() + ": expected a JSON array of doc ids");
    ids.push_back(v.get<std::string>());
  }
  return ids;
}

void write_output_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

Annotation relabeled(Annotation a, const std::string& annotator) {
  a.annotator = annotator;
  return a;
}

const fs::path& checked_root(const fs::path& root) {
  if (!fs::exists(root / kManifest)) fail(ErrorCode::io, "not a project store: " + (root / kManifest).string() + " missing");
  return root;
}

}  // namespace

std::string stage_name(int number) {
  if (number == 0) return kTestStage;
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter-%04d", number);
  return buf;
}

Json Project::init(const fs::path& root, const ProjectManifest& manifest) {
  if (fs::exists(root)) {
    if (!fs::is_directory(root)) fail(ErrorCode::invalid_argument, root.string() + " is not a directory");
    if (!fs::is_empty(root)) fail(ErrorCode::state, "init requires an empty directory: " + root.string());
  }
  const auto report = validate_manifest(manifest);
  if (!report.empty()) fail(ErrorCode::validation, "invalid project: " + describe(report));
  if (!manifest.test_doc_ids.empty() || !manifest.adjustments.empty()) {
    fail(ErrorCode::invalid_argument, "a new project starts without test documents or adjustments");
  }
  fs::create_directories(root);
  StoreLock lock(root);
  Transaction txn(root);
  txn.write(kManifest, pretty(formats::to_json(manifest)));
  txn.write(kDocs, "");
  txn.commit();

  Report out("init");
  out["root"] = root.string();
  out["manifest"] = formats::to_json(manifest);
  std::string summary = "initialized " + std::string(to_string(manifest.schema.task_kind)) + " project";
  if (!manifest.schema.classes.empty()) summary += " with classes " + join(manifest.schema.classes, ", ");
  return out.finish(summary);
}

Project::Project(fs::path root) : root_(std::move(root)), lock_(checked_root(root_)) {
  recover_store(root_);
  manifest_ = formats::manifest_from_json(formats::read_json_file(root_ / kManifest));
  const auto report = validate_manifest(manifest_);
  if (!report.empty()) fail(ErrorCode::validation, "invalid manifest: " + describe(report));
  if (fs::exists(root_ / kDocs)) doc_order_ = formats::read_documents(root_ / kDocs);
  for (const auto& d : doc_order_) docs_.emplace(d.id, d);
  (void)stages();  // enforces dense iteration numbering
}

Json Project::run(const std::string& command, const Json& args) {
  using Handler = Json (Project::*)(const Json&);
  static const std::map<std::string, Handler> handlers{
      {"add-docs", &Project::add_docs},
      {"status", &Project::status},
      {"plan", &Project::plan},
      {"export-tasks", &Project::export_tasks},
      {"import-annotations", &Project::import_annotations},
      {"merge", &Project::merge},
      {"apply-resolutions", &Project::apply},
      {"agreement", &Project::agreement},
      {"eval", &Project::eval},
      {"curve", &Project::curve},
      {"monitor-split", &Project::monitor_split},
      {"resplit", &Project::resplit},
      {"weak-label", &Project::weak_label},
      {"bootstrap", &Project::bootstrap},
      {"select", &Project::select},
      {"adjust", &Project::adjust},
      {"guidelines", &Project::guidelines},
  };
  const auto it = handlers.find(command);
  if (it == handlers.end()) fail(ErrorCode::invalid_argument, "unknown command '" + command + "'");
  if (!args.is_object()) fail(ErrorCode::invalid_argument, "command arguments must be a JSON object");
  return (this->*(it->second))(args);
}

// ---------------------------------------------------------------------------
// Store reading

std::vector<std::string> Project::stages() const {
  std::vector<std::string> out;
  if (fs::exists(root_ / plan_path(kTestStage))) out.push_back(kTestStage);
  std::set<int> numbers;
  if (fs::exists(root_ / "plans")) {
    for (const auto& entry : fs::directory_iterator(root_ / "plans")) {
      const auto stem = entry.path().stem().string();
      if (entry.path().extension() != ".json" || stem == kTestStage) continue;
      int n = 0;
      if (std::sscanf(stem.c_str(), "iter-%d", &n) != 1 || stage_name(n) != stem || n < 1) {
        fail(ErrorCode::validation, "unexpected plan file " + entry.path().string());
      }
      numbers.insert(n);
    }
  }
  int expected = 1;
  for (const int n : numbers) {
    if (n != expected) fail(ErrorCode::validation, "iteration plans are not dense: " + stage_name(expected) + " missing");
    out.push_back(stage_name(n));
    ++expected;
  }
  return out;
}

int Project::iteration_count() const {
  const auto all = stages();
  return static_cast<int>(std::count_if(all.begin(), all.end(), [](const auto& s) { return s != kTestStage; }));
}

std::string Project::resolve_stage(const Json& args) const {
  const auto all = stages();
  if (all.empty()) fail(ErrorCode::state, "no stage has been planned yet");
  const auto stage = arg_or<std::string>(args, "stage", all.back());
  if (std::find(all.begin(), all.end(), stage) == all.end()) fail(ErrorCode::reference, "unknown stage '" + stage + "'");
  return stage;
}

BatchPlan Project::load_plan(const std::string& stage) const {
  return formats::plan_from_json(formats::read_json_file(root_ / plan_path(stage)));
}

AnnotationSet Project::load_set(const fs::path& rel, const std::string& annotator) const {
  AnnotationSet set(annotator);
  if (!fs::exists(root_ / rel)) return set;
  for (auto& a : formats::read_annotations(root_ / rel)) set.put(std::move(a));
  return set;
}

std::map<std::string, AnnotationSet> Project::load_stage_annotations(const std::string& stage) const {
  std::map<std::string, AnnotationSet> sets;
  for (const auto& annotator : manifest_.annotators) {
    if (fs::exists(root_ / annotations_path(stage, annotator))) {
      sets.emplace(annotator, load_set(annotations_path(stage, annotator), annotator));
    }
  }
  return sets;
}

bool Project::is_applied(const std::string& stage) const { return fs::exists(root_ / pool_path(stage)); }

std::vector<MergedDocument> Project::load_merged(const std::string& stage) const {
  if (!fs::exists(root_ / merge_path(stage))) fail(ErrorCode::state, "stage " + stage + " has not been merged");
  const auto j = formats::read_json_file(root_ / merge_path(stage));
  std::vector<MergedDocument> merged;
  for (const auto& m : j) merged.push_back(formats::merged_from_json(m));
  return merged;
}

std::vector<Resolution> Project::load_resolutions(const std::string& stage) const {
  if (!fs::exists(root_ / resolutions_path(stage))) return {};
  return formats::read_resolutions(root_ / resolutions_path(stage));
}

void Project::save_resolutions(const std::string& stage, const std::vector<Resolution>& resolutions) {
  Json j = Json::array();
  for (const auto& r : resolutions) j.push_back(formats::to_json(r));
  Transaction txn(root_);
  txn.write(resolutions_path(stage), pretty(j));
  txn.commit();
}

std::string Project::pending_stage() const {
  const auto all = stages();
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    if (fs::exists(root_ / merge_path(*it)) && !is_applied(*it)) return *it;
  }
  fail(ErrorCode::state, "no merged stage is awaiting resolution");
}

std::map<std::string, Annotation> Project::resolved() const {
  std::map<std::string, Annotation> out;
  for (const auto& stage : stages()) {
    if (!is_applied(stage)) continue;
    for (auto& a : formats::read_annotations(root_ / pool_path(stage))) out.insert_or_assign(a.doc_id, std::move(a));
  }
  return out;
}

std::vector<std::string> Project::unannotated() const {
  const auto done = resolved();
  const std::set<std::string> test(manifest_.test_doc_ids.begin(), manifest_.test_doc_ids.end());
  std::vector<std::string> out;
  for (const auto& [id, _] : docs_) {
    if (!test.count(id) && !done.count(id)) out.push_back(id);
  }
  return out;
}

const Document& Project::document(const std::string& id) const {
  const auto it = docs_.find(id);
  if (it == docs_.end()) fail(ErrorCode::reference, "unknown doc_id '" + id + "'");
  return it->second;
}

void Project::write_manifest(Transaction& txn) const { txn.write(kManifest, pretty(formats::to_json(manifest_))); }

// ---------------------------------------------------------------------------
// Lifecycle

Json Project::add_docs(const Json& args) {
  const fs::path file = required<std::string>(args, "file");
  std::vector<Document> added;
  std::set<std::string> seen;
  formats::read_jsonl(file, [&](std::size_t, const formats::Json& j) {
    auto d = formats::document_from_json(j);
    const auto report = validate_document(d, manifest_.schema);
    if (!report.empty()) fail(ErrorCode::validation, describe(report));
    if (docs_.count(d.id) || !seen.insert(d.id).second) fail(ErrorCode::conflict, "duplicate doc id '" + d.id + "'");
    added.push_back(std::move(d));
  });
  auto all = doc_order_;
  all.insert(all.end(), added.begin(), added.end());
  Transaction txn(root_);
  txn.write(kDocs, formats::documents_jsonl(all));
  txn.commit();
  doc_order_ = std::move(all);
  for (const auto& d : added) docs_.emplace(d.id, d);

  Report out("add-docs");
  out["added"] = added.size();
  out["documents"] = docs_.size();
  return out.finish("added " + std::to_string(added.size()) + " documents (" + std::to_string(docs_.size()) + " total)");
}

Json Project::status(const Json&) {
  Report out("status");
  const auto all = stages();
  const auto done = resolved();
  const std::set<std::string> test(manifest_.test_doc_ids.begin(), manifest_.test_doc_ids.end());
  std::size_t train = 0;
  std::size_t test_labeled = 0;
  for (const auto& [id, _] : done) (test.count(id) ? test_labeled : train) += 1;
  const int iteration = iteration_count();
  out["iteration"] = iteration;
  out["documents"] = docs_.size();
  out["annotated"] = train;
  out["unannotated"] = unannotated().size();
  out["test"] = test.size();
  out["test_annotated"] = test_labeled;

  Json stage_states = Json::array();
  for (const auto& s : all) {
    const char* state = is_applied(s) ? "applied" : fs::exists(root_ / merge_path(s)) ? "merged" : "planned";
    stage_states.push_back({{"stage", s}, {"state", state}});
  }
  out["stages"] = stage_states;

  std::string metric = "none";
  out["last_metric"] = nullptr;
  if (fs::exists(root_ / kCurve)) {
    std::ifstream in(root_ / kCurve);
    const auto curve = read_curve_csv(in);
    if (!curve.empty()) {
      const auto& last = curve.back();
      out["last_metric"] = {{"name", last.metric_name}, {"value", last.metric_value}};
      metric = last.metric_name + " " + number(last.metric_value);
    }
  }
  std::string divergence = "none";
  out["last_divergence"] = nullptr;
  if (fs::exists(root_ / kMonitor)) {
    const auto m = formats::read_json_file(root_ / kMonitor);
    out["last_divergence"] = m.at("divergence");
    divergence = m.at("divergence").dump();
  }
  std::ostringstream summary;
  summary << "iteration " << iteration << ", " << train << " annotated; " << unannotated().size() << " unannotated, "
          << test_labeled << "/" << test.size() << " test annotated; last metric: " << metric
          << "; last divergence: " << divergence;
  return out.finish(summary.str());
}

// ---------------------------------------------------------------------------
// Batches

Json Project::plan(const Json& args) {
  Report out("plan");
  const auto mode = parse_plan_mode(arg_or<std::string>(args, "mode", "simple"));
  const bool test = arg_or<bool>(args, "test", false);
  const auto all = stages();
  const int number = test ? 0 : iteration_count() + 1;
  const auto stage = stage_name(number);
  const auto size = arg_or<std::size_t>(args, "size", manifest_.batch_size);
  if (size == 0) fail(ErrorCode::invalid_argument, "size must be ≥ 1");
  const auto seed = arg_or<std::uint64_t>(args, "seed", manifest_.seed + static_cast<std::uint64_t>(number));

  std::vector<std::string> candidates;
  if (test) {
    if (!all.empty()) fail(ErrorCode::state, "the test set must be planned first and only once");
    for (const auto& [id, _] : docs_) candidates.push_back(id);
  } else {
    if (std::find(all.begin(), all.end(), kTestStage) == all.end()) {
      fail(ErrorCode::state, "create the test set first with plan --test");
    }
    if (number > 1 && !is_applied(stage_name(number - 1))) {
      fail(ErrorCode::state, "stage " + stage_name(number - 1) + " has not been applied");
    }
    candidates = unannotated();
  }

  std::vector<std::string> batch;
  if (args.contains("docs") && !args.at("docs").is_null()) {
    const std::set<std::string> eligible(candidates.begin(), candidates.end());
    std::set<std::string> taken;
    std::size_t skipped = 0;
    for (const auto& id : read_id_list(arg_or<std::string>(args, "docs", ""))) {
      if (!eligible.count(id) || !taken.insert(id).second) {
        ++skipped;
        continue;
      }
      if (batch.size() < size) batch.push_back(id);
    }
    if (skipped) out.warn(std::to_string(skipped) + " listed documents are unknown, annotated, held out or repeated; skipped");
  } else {
    Rng rng(seed);
    batch = candidates;
    rng.shuffle(batch);
    if (batch.size() > size) batch.resize(size);
  }
  if (batch.empty()) fail(ErrorCode::state, "no unannotated documents left to plan");
  if (batch.size() < size) {
    out.warn("only " + std::to_string(batch.size()) + " documents available; planning the remainder instead of " +
             std::to_string(size));
  }
  std::sort(batch.begin(), batch.end());

  BatchPlan plan;
  switch (mode) {
    case PlanMode::simple: plan = split_batch(batch, manifest_.annotators, seed); break;
    case PlanMode::review: plan = assign_review(split_batch(batch, manifest_.annotators, seed)); break;
    case PlanMode::cross: plan = assign_cross(batch, manifest_.annotators, seed); break;
  }
  plan.iteration = number;

  Transaction txn(root_);
  txn.write(plan_path(stage), pretty(formats::to_json(plan)));
  if (test) {
    manifest_.test_doc_ids = batch;
    write_manifest(txn);
  }
  txn.commit();

  out["stage"] = stage;
  out["seed"] = seed;
  out["plan"] = formats::to_json(plan);
  Json load = Json::object();
  for (const auto& [annotator, docs] : annotate_tasks(plan)) load[annotator] = docs.size();
  for (const auto& [annotator, docs] : review_tasks(plan)) {
    load[annotator] = load.value(annotator, std::size_t{0}) + docs.size();
  }
  out["workload"] = load;
  return out.finish("planned " + stage + ": " + std::to_string(batch.size()) + " documents, " + to_string(mode) +
                    " mode, " + std::to_string(plan.assignments.size()) + " assignments");
}

Json Project::export_tasks(const Json& args) {
  Report out("export-tasks");
  const auto annotator = required<std::string>(args, "annotator");
  if (std::find(manifest_.annotators.begin(), manifest_.annotators.end(), annotator) == manifest_.annotators.end()) {
    fail(ErrorCode::reference, "unknown annotator '" + annotator + "'");
  }
  const auto stage = resolve_stage(args);
  const auto plan = load_plan(stage);
  const auto sets = load_stage_annotations(stage);
  const auto weak = load_set(preannotations_path("weak"), "weak");
  const auto model = load_set(preannotations_path("model"), "model");

  Json tasks = Json::array();
  std::size_t awaiting = 0;
  for (const auto role : {Role::annotate, Role::review}) {
    for (const auto& assignment : plan.assignments) {
      if (assignment.role != role) continue;
      if (std::find(assignment.annotators.begin(), assignment.annotators.end(), annotator) == assignment.annotators.end()) {
        continue;
      }
      // The reviewed annotator owns the matching annotate assignment of the same part.
      std::string reviewed;
      if (role == Role::review) {
        for (const auto& a : plan.assignments) {
          if (a.role == Role::annotate && a.part.index == assignment.part.index) reviewed = a.annotators.at(0);
        }
      }
      for (const auto& id : assignment.part.doc_ids) {
        const auto& d = document(id);
        Json task;
        task["doc_id"] = id;
        task["text"] = d.text;
        if (d.text_b) task["text_b"] = *d.text_b;
        task["role"] = to_string(role);
        Json pre = Json::array();
        if (role == Role::review) {
          const auto it = sets.find(reviewed);
          const Annotation* a = it == sets.end() ? nullptr : it->second.find(id);
          if (a) pre.push_back(formats::to_json(*a));
          else ++awaiting;
        }
        if (const auto* a = model.find(id)) pre.push_back(formats::to_json(*a));
        if (const auto* a = weak.find(id)) pre.push_back(formats::to_json(*a));
        task["pre_annotations"] = pre;
        tasks.push_back(task);
      }
    }
  }
  if (awaiting) out.warn(std::to_string(awaiting) + " review tasks lack the reviewed annotation; import it first");
  if (args.contains("out") && !args.at("out").is_null()) {
    std::string content;
    for (const auto& t : tasks) content += formats::dump_line(t) + "\n";
    write_output_file(arg_or<std::string>(args, "out", ""), content);
  }
  out["stage"] = stage;
  out["annotator"] = annotator;
  out["count"] = tasks.size();
  out["tasks"] = tasks;
  return out.finish(std::to_string(tasks.size()) + " tasks for " + annotator + " in " + stage);
}

Json Project::import_annotations(const Json& args) {
  Report out("import-annotations");
  const fs::path file = required<std::string>(args, "file");
  const auto stage = resolve_stage(args);
  if (is_applied(stage)) fail(ErrorCode::state, "stage " + stage + " has already been applied");
  if (fs::exists(root_ / merge_path(stage))) fail(ErrorCode::state, "stage " + stage + " has already been merged");
  const auto plan = load_plan(stage);

  std::string annotator;
  std::vector<Annotation> incoming;
  std::set<std::string> assigned;
  formats::read_jsonl(file, [&](std::size_t, const formats::Json& j) {
    auto a = formats::annotation_from_json(j);
    if (annotator.empty()) {
      annotator = a.annotator;
      if (std::find(manifest_.annotators.begin(), manifest_.annotators.end(), annotator) == manifest_.annotators.end()) {
        fail(ErrorCode::reference, "unknown annotator '" + annotator + "'");
      }
      for (const auto& assignment : plan.assignments) {
        if (std::find(assignment.annotators.begin(), assignment.annotators.end(), annotator) != assignment.annotators.end()) {
          assigned.insert(assignment.part.doc_ids.begin(), assignment.part.doc_ids.end());
        }
      }
    } else if (a.annotator != annotator) {
      fail(ErrorCode::validation, "one file per annotator: found '" + a.annotator + "' after '" + annotator + "'");
    }
    if (a.provenance != Provenance::human) {
      fail(ErrorCode::validation, "imported annotations must have provenance human");
    }
    if (!assigned.count(a.doc_id)) {
      fail(ErrorCode::reference, "doc '" + a.doc_id + "' is not assigned to " + annotator + " in " + stage);
    }
    const auto report = validate_annotation(a, document(a.doc_id), manifest_.schema);
    if (!report.empty()) fail(ErrorCode::validation, describe(report));
    incoming.push_back(std::move(a));
  });
  if (incoming.empty()) fail(ErrorCode::invalid_argument, file.string() + " contains no annotations");

  auto set = load_set(annotations_path(stage, annotator), annotator);
  for (auto& a : incoming) set.put(std::move(a));
  Transaction txn(root_);
  txn.write(annotations_path(stage, annotator), formats::annotations_jsonl(set));
  txn.commit();

  out["stage"] = stage;
  out["annotator"] = annotator;
  out["imported"] = incoming.size();
  out["annotated"] = set.size();
  out["assigned"] = assigned.size();
  return out.finish("imported " + std::to_string(incoming.size()) + " annotations for " + annotator + " in " + stage +
                    " (" + std::to_string(set.size()) + "/" + std::to_string(assigned.size()) + " assigned)");
}

// ---------------------------------------------------------------------------
// Conflicts

Json Project::merge(const Json& args) {
  Report out("merge");
  const auto stage = resolve_stage(args);
  if (is_applied(stage)) fail(ErrorCode::state, "stage " + stage + " has already been applied");
  const auto plan = load_plan(stage);
  const auto sets = load_stage_annotations(stage);
  const MergeOptions options{manifest_.score_tolerance};

  auto subset = [&](const std::string& annotator, const std::vector<std::string>& ids) {
    AnnotationSet part(annotator);
    const auto it = sets.find(annotator);
    if (it == sets.end()) return part;
    for (const auto& id : ids) {
      if (const auto* a = it->second.find(id)) part.put(*a);
    }
    return part;
  };

  std::vector<MergedDocument> merged;
  for (const auto& assignment : plan.assignments) {
    const auto& ids = assignment.part.doc_ids;
    std::map<std::string, Document> part_docs;
    for (const auto& id : ids) part_docs.emplace(id, document(id));
    if (plan.mode == PlanMode::simple) {
      const auto& annotator = assignment.annotators.at(0);
      const auto set = subset(annotator, ids);
      std::vector<std::string> missing;
      for (const auto& id : ids) {
        if (!set.contains(id)) missing.push_back(id);
      }
      if (!missing.empty()) fail(ErrorCode::validation, "coverage mismatch; missing in " + annotator + ": " + join(missing, " "));
      for (const auto& id : ids) merged.push_back(pass_through(*set.find(id)));
    } else if (plan.mode == PlanMode::cross) {
      auto part = merge_part(subset(assignment.annotators.at(0), ids), subset(assignment.annotators.at(1), ids),
                             part_docs, manifest_.schema, options);
      merged.insert(merged.end(), part.begin(), part.end());
    } else if (assignment.role == Role::review) {
      std::string annotator;
      for (const auto& a : plan.assignments) {
        if (a.role == Role::annotate && a.part.index == assignment.part.index) annotator = a.annotators.at(0);
      }
      auto part = merge_part(subset(annotator, ids), subset(assignment.annotators.at(0), ids), part_docs,
                             manifest_.schema, options);
      merged.insert(merged.end(), part.begin(), part.end());
    }
  }
  std::sort(merged.begin(), merged.end(), [](const auto& x, const auto& y) { return x.doc_id < y.doc_id; });

  std::set<std::string> ids;
  std::map<std::string, std::size_t> by_kind;
  Json merged_json = Json::array();
  for (const auto& m : merged) {
    for (const auto& c : m.conflicts) {
      ids.insert(c.conflict_id);
      ++by_kind[to_string(c.kind)];
    }
    merged_json.push_back(formats::to_json(m));
  }
  std::vector<Resolution> kept;
  std::size_t stale = 0;
  for (auto& r : load_resolutions(stage)) {
    if (ids.count(r.conflict_id)) kept.push_back(std::move(r));
    else ++stale;
  }
  if (stale) out.warn(std::to_string(stale) + " stored resolutions no longer match a conflict; discarded");

  Transaction txn(root_);
  txn.write(merge_path(stage), pretty(merged_json));
  if (stale) {
    Json j = Json::array();
    for (const auto& r : kept) j.push_back(formats::to_json(r));
    txn.write(resolutions_path(stage), pretty(j));
  }
  txn.commit();

  out["stage"] = stage;
  out["documents"] = merged.size();
  out["conflicts"] = ids.size();
  Json kinds = Json::object();
  for (const auto& [kind, n] : by_kind) kinds[kind] = n;
  out["conflicts_by_kind"] = kinds;
  out["conflict_ids"] = std::vector<std::string>(ids.begin(), ids.end());
  return out.finish("merged " + stage + ": " + std::to_string(merged.size()) + " documents, " +
                    std::to_string(ids.size()) + " conflicts");
}

Json Project::apply(const Json& args) {
  Report out("apply-resolutions");
  const auto stage = args.contains("stage") ? resolve_stage(args) : pending_stage();
  if (is_applied(stage)) fail(ErrorCode::state, "stage " + stage + " has already been applied");
  const auto merged = load_merged(stage);

  std::map<std::string, const Conflict*> conflicts;
  for (const auto& m : merged) {
    for (const auto& c : m.conflicts) conflicts.emplace(c.conflict_id, &c);
  }
  std::map<std::string, Resolution> chosen;
  for (auto& r : load_resolutions(stage)) chosen.insert_or_assign(r.conflict_id, std::move(r));
  std::size_t from_file = 0;
  if (args.contains("resolutions") && !args.at("resolutions").is_null()) {
    const fs::path file = arg_or<std::string>(args, "resolutions", "");
    const auto incoming = formats::read_resolutions(file);
    for (std::size_t i = 0; i < incoming.size(); ++i) {
      if (!conflicts.count(incoming[i].conflict_id)) {
        fail(ErrorCode::reference, file.string() + " [" + std::to_string(i) + "]: unknown conflict_id '" +
                                       incoming[i].conflict_id + "'");
      }
      chosen.insert_or_assign(incoming[i].conflict_id, incoming[i]);
    }
    from_file = incoming.size();
  }
  std::vector<Resolution> ordered;
  for (const auto& m : merged) {
    for (const auto& c : m.conflicts) {
      const auto it = chosen.find(c.conflict_id);
      if (it != chosen.end()) ordered.push_back(it->second);
    }
  }
  const auto pool = apply_resolutions(merged, ordered, docs_, manifest_.schema);

  Json resolutions = Json::array();
  for (const auto& r : ordered) resolutions.push_back(formats::to_json(r));
  Transaction txn(root_);
  txn.write(resolutions_path(stage), pretty(resolutions));
  txn.write(pool_path(stage), formats::annotations_jsonl(pool));
  txn.commit();

  out["stage"] = stage;
  out["resolutions"] = ordered.size();
  out["from_file"] = from_file;
  out["pooled"] = pool.size();
  out["returned_unlabeled"] = merged.size() - pool.size();
  return out.finish("applied " + stage + ": " + std::to_string(ordered.size()) + " resolutions, " +
                    std::to_string(pool.size()) + " documents added to the pool");
}

// ---------------------------------------------------------------------------
// Measurement

namespace {

Json agreement_json(const LabelSchema& schema, const std::vector<AnnotationSet>& sets) {
  if (sets.size() < 2) fail(ErrorCode::invalid_argument, "agreement needs at least two annotation sets");
  switch (schema.task_kind) {
    case TaskKind::doc_class:
      return formats::to_json(sets.size() == 2 ? cohen_kappa(sets[0], sets[1], schema) : fleiss_kappa(sets, schema));
    case TaskKind::span_label:
      if (sets.size() != 2) fail(ErrorCode::invalid_argument, "pairwise F1 compares exactly two annotation sets");
      return formats::to_json(pairwise_f1(sets[0], sets[1], schema));
    case TaskKind::pair_regress: {
      if (sets.size() != 2) fail(ErrorCode::invalid_argument, "score agreement compares exactly two annotation sets");
      const auto pairs = score_pairs(sets[0], sets[1]);
      return formats::to_json(pearson(pairs.gold, pairs.pred));
    }
  }
  fail(ErrorCode::internal, "unhandled task kind");
}

}  // namespace

Json Project::agreement(const Json& args) {
  Report out("agreement");
  std::vector<AnnotationSet> sets;
  if (args.contains("files") && !args.at("files").is_null()) {
    for (const auto& f : args.at("files")) {
      const fs::path path = f.get<std::string>();
      AnnotationSet set;
      for (auto& a : formats::read_annotations(path)) {
        const auto report = validate_annotation(a, document(a.doc_id), manifest_.schema);
        if (!report.empty()) fail(ErrorCode::validation, path.string() + ": " + describe(report));
        set.put(std::move(a));
      }
      sets.push_back(std::move(set));
    }
    out["source"] = "files";
  } else {
    const auto stage = resolve_stage(args);
    const auto plan = load_plan(stage);
    const auto stored = load_stage_annotations(stage);
    AnnotationSet side_a("side_a");
    AnnotationSet side_b("side_b");
    auto pair_up = [&](const std::string& x, const std::string& y, const std::vector<std::string>& ids) {
      const auto ia = stored.find(x);
      const auto ib = stored.find(y);
      if (ia == stored.end() || ib == stored.end()) return;
      for (const auto& id : ids) {
        const auto* a = ia->second.find(id);
        const auto* b = ib->second.find(id);
        if (a && b) {
          side_a.put(relabeled(*a, "side_a"));
          side_b.put(relabeled(*b, "side_b"));
        }
      }
    };
    for (const auto& assignment : plan.assignments) {
      if (plan.mode == PlanMode::cross) {
        pair_up(assignment.annotators.at(0), assignment.annotators.at(1), assignment.part.doc_ids);
      } else if (assignment.role == Role::review) {
        for (const auto& a : plan.assignments) {
          if (a.role == Role::annotate && a.part.index == assignment.part.index) {
            pair_up(a.annotators.at(0), assignment.annotators.at(0), assignment.part.doc_ids);
          }
        }
      }
    }
    if (side_a.empty()) fail(ErrorCode::state, "stage " + stage + " has no doubly annotated documents");
    sets = {side_a, side_b};
    out["source"] = stage;
  }
  auto report = agreement_json(manifest_.schema, sets);
  const auto metric = report.at("metric").get<std::string>();
  const auto value = report.at("value").get<double>();
  out["report"] = std::move(report);
  return out.finish(metric + " " + number(value));
}

Json Project::eval(const Json& args) {
  Report out("eval");
  const fs::path file = required<std::string>(args, "predictions");
  const auto done = resolved();
  AnnotationSet gold("gold");
  for (const auto& id : manifest_.test_doc_ids) {
    const auto it = done.find(id);
    if (it != done.end()) gold.put(relabeled(it->second, "gold"));
  }
  if (gold.empty()) fail(ErrorCode::state, "the test set has no resolved annotations yet");
  if (gold.size() < manifest_.test_doc_ids.size()) {
    out.warn(std::to_string(manifest_.test_doc_ids.size() - gold.size()) + " test documents are unlabeled; left out");
  }

  std::vector<Prediction> preds;
  std::size_t skipped = 0;
  for (auto& p : formats::read_predictions(file)) {
    if (gold.contains(p.doc_id)) preds.push_back(std::move(p));
    else ++skipped;
  }
  if (skipped) out.warn(std::to_string(skipped) + " predictions are outside the labeled test set; skipped");
  const auto model = import_predictions(preds, docs_, manifest_.schema);

  const char* fallback = manifest_.schema.task_kind == TaskKind::doc_class    ? "accuracy"
                         : manifest_.schema.task_kind == TaskKind::span_label ? "entity_f1"
                                                                               : "pearson";
  const auto metric = arg_or<std::string>(args, "metric", fallback);
  EvalReport report;
  if (metric == "accuracy") {
    report = accuracy(gold, model);
  } else if (metric == "f1") {
    report = precision_recall_f1(gold, model, parse_aggregation(arg_or<std::string>(args, "aggregation", "micro")));
  } else if (metric == "entity_f1") {
    report = entity_f1(gold, model);
  } else if (metric == "pearson" || metric == "spearman" || metric == "rmse") {
    const auto pairs = score_pairs(gold, model);
    report = metric == "pearson" ? pearson(pairs.gold, pairs.pred)
             : metric == "spearman" ? spearman(pairs.gold, pairs.pred)
                                    : rmse(pairs.gold, pairs.pred);
  } else {
    fail(ErrorCode::invalid_argument, "unknown metric '" + metric + "'");
  }
  if (report.warning) out.warn("classes with undefined F1 left out of the average: " + join(report.undefined_classes, ", "));
  out["report"] = formats::to_json(report);
  return out.finish(report.metric + " " + number(report.value) + " on " + std::to_string(report.n_items) +
                    " test documents");
}

Json Project::curve(const Json& args) {
  Report out("curve");
  LearningCurve curve;
  if (fs::exists(root_ / kCurve)) {
    std::ifstream in(root_ / kCurve);
    curve = read_curve_csv(in);
  }
  IterationRecord record;
  record.iteration = curve.empty() ? 1 : curve.back().iteration + 1;
  record.metric_name = required<std::string>(args, "metric");
  record.metric_value = required<double>(args, "value");
  if (args.contains("agreement") && !args.at("agreement").is_null()) record.agreement_value = args.at("agreement").get<double>();
  std::int64_t size = 0;
  if (args.contains("size") && !args.at("size").is_null()) {
    size = args.at("size").get<std::int64_t>();
  } else {
    const std::set<std::string> test(manifest_.test_doc_ids.begin(), manifest_.test_doc_ids.end());
    for (const auto& [id, _] : resolved()) size += test.count(id) ? 0 : 1;
  }
  record.cumulative_train_size = size;
  curve = record_iteration(std::move(curve), record);

  std::ostringstream csv;
  write_curve_csv(csv, curve);
  Transaction txn(root_);
  txn.write(kCurve, csv.str());
  txn.commit();

  out["record"] = {{"iteration", record.iteration},
                   {"size", record.cumulative_train_size},
                   {"metric", record.metric_name},
                   {"value", record.metric_value},
                   {"agreement", record.agreement_value ? Json(*record.agreement_value) : Json(nullptr)}};
  std::string summary = "iteration " + std::to_string(record.iteration) + ": " + record.metric_name + " " +
                        number(record.metric_value) + " at size " + std::to_string(size);
  const auto window = manifest_.plateau_window;
  if (static_cast<std::int64_t>(curve.size()) > window) {
    const auto status = detect_plateau(curve, manifest_.plateau_epsilon, window);
    out["plateaued"] = status.plateaued;
    out["plateau_iteration"] = status.at_iteration ? Json(*status.at_iteration) : Json(nullptr);
    summary += status.plateaued ? "; plateau reached at iteration " + std::to_string(*status.at_iteration)
                                : "; no plateau yet";
  } else {
    out["plateaued"] = false;
    out["plateau_iteration"] = nullptr;
    summary += "; too few iterations to judge a plateau";
  }
  return out.finish(summary);
}

Json Project::monitor_split(const Json& args) {
  Report out("monitor-split");
  const auto threshold = arg_or<double>(args, "threshold", manifest_.divergence_threshold);
  const std::set<std::string> test(manifest_.test_doc_ids.begin(), manifest_.test_doc_ids.end());
  AnnotationSet train_set("train");
  AnnotationSet test_set("test");
  for (const auto& [id, a] : resolved()) (test.count(id) ? test_set : train_set).put(relabeled(a, test.count(id) ? "test" : "train"));
  if (train_set.empty() || test_set.empty()) fail(ErrorCode::state, "both the training pool and the test set need labels");
  const auto p = label_distribution({train_set}, manifest_.schema);
  const auto q = label_distribution({test_set}, manifest_.schema);
  const auto result = check_representativeness(p, q, threshold);

  Json train_json = Json::object();
  for (const auto& [k, v] : p) train_json[k] = v;
  Json test_json = Json::object();
  for (const auto& [k, v] : q) test_json[k] = v;
  Json monitor{{"divergence", result.divergence},
               {"threshold", threshold},
               {"status", to_string(result.status)},
               {"train", train_json},
               {"test", test_json}};
  Transaction txn(root_);
  txn.write(kMonitor, pretty(monitor));
  txn.commit();
  for (const auto& [k, v] : monitor.items()) out[k.c_str()] = v;
  if (result.status == SplitStatus::consider_resplit) out.warn("label distributions diverge; consider resplit");
  return out.finish("divergence " + number(result.divergence) + " (threshold " + number(threshold) +
                    "): " + to_string(result.status));
}

Json Project::resplit(const Json& args) {
  Report out("resplit");
  const auto fraction = required<double>(args, "fraction");
  const auto seed = arg_or<std::uint64_t>(args, "seed", manifest_.seed);
  const bool class_task = manifest_.schema.task_kind == TaskKind::doc_class;
  const bool stratified = arg_or<bool>(args, "stratified", class_task);
  if (stratified && !class_task) fail(ErrorCode::invalid_argument, "stratified resplit needs a doc_class schema");

  std::vector<LabeledItem> pool;
  std::set<std::string> present;
  for (const auto& [id, a] : resolved()) {
    const auto label = class_task ? std::get<ClassPayload>(a.payload).value : std::string();
    present.insert(label);
    pool.push_back({id, label});
  }
  std::vector<std::string> classes;
  for (const auto& c : manifest_.schema.classes) {
    if (present.count(c)) classes.push_back(c);
  }
  if (stratified && classes.size() < manifest_.schema.classes.size()) {
    out.warn("classes without labeled documents are not stratified");
  }
  const auto split = annotkit::resplit(pool, classes, fraction, seed, stratified);
  manifest_.test_doc_ids = split.test_ids;
  Transaction txn(root_);
  write_manifest(txn);
  txn.commit();
  out.warn(split.warning);
  out["train"] = split.train_ids.size();
  out["test"] = split.test_ids.size();
  out["test_doc_ids"] = split.test_ids;
  return out.finish("resplit: " + std::to_string(split.train_ids.size()) + " train, " +
                    std::to_string(split.test_ids.size()) + " test\n" + split.warning);
}

// ---------------------------------------------------------------------------
// Acceleration

Json Project::weak_label(const Json& args) {
  Report out("weak-label");
  const fs::path file = required<std::string>(args, "rules");
  const auto rules = formats::read_rules(file);
  validate_rules(rules, manifest_.schema);
  const auto done = resolved();
  AnnotationSet weak("weak");
  std::size_t scanned = 0;
  for (const auto& d : doc_order_) {
    if (done.count(d.id)) continue;
    ++scanned;
    if (auto a = apply_weak_rules(d, rules, manifest_.schema)) weak.put(std::move(*a));
  }
  Transaction txn(root_);
  txn.write(preannotations_path("weak"), formats::annotations_jsonl(weak));
  txn.commit();
  out["rules"] = rules.size();
  out["scanned"] = scanned;
  out["pre_annotated"] = weak.size();
  out["doc_ids"] = weak.doc_ids();
  return out.finish(std::to_string(weak.size()) + " of " + std::to_string(scanned) +
                    " unannotated documents pre-annotated by rules");
}

Json Project::bootstrap(const Json& args) {
  Report out("bootstrap");
  const fs::path file = required<std::string>(args, "predictions");
  const auto done = resolved();
  std::vector<Prediction> preds;
  std::size_t skipped = 0;
  for (auto& p : formats::read_predictions(file)) {
    if (done.count(p.doc_id)) ++skipped;
    else preds.push_back(std::move(p));
  }
  if (skipped) out.warn(std::to_string(skipped) + " predictions are for annotated documents; skipped");
  const auto model = import_predictions(preds, docs_, manifest_.schema);
  Transaction txn(root_);
  txn.write(preannotations_path("model"), formats::annotations_jsonl(model));
  txn.commit();
  out["pre_annotated"] = model.size();
  return out.finish(std::to_string(model.size()) + " documents pre-annotated by the model");
}

Json Project::select(const Json& args) {
  Report out("select");
  const fs::path file = required<std::string>(args, "predictions");
  const auto strategy = parse_strategy(required<std::string>(args, "strategy"));
  const auto k = required<std::size_t>(args, "k");
  const auto seed = arg_or<std::uint64_t>(args, "seed", manifest_.seed);
  const auto open = unannotated();
  const std::set<std::string> eligible(open.begin(), open.end());
  std::vector<Prediction> preds;
  std::size_t skipped = 0;
  for (auto& p : formats::read_predictions(file)) {
    if (!docs_.count(p.doc_id)) fail(ErrorCode::reference, file.string() + ": prediction for unknown doc_id '" + p.doc_id + "'");
    if (eligible.count(p.doc_id)) preds.push_back(std::move(p));
    else ++skipped;
  }
  if (skipped) out.warn(std::to_string(skipped) + " predictions are for annotated or test documents; skipped");
  for (const auto& p : preds) validate_scores(p, manifest_.schema);
  const auto chosen = select_active(preds, strategy, k, seed);
  if (chosen.size() < k) out.warn("only " + std::to_string(chosen.size()) + " candidates available");
  if (args.contains("out") && !args.at("out").is_null()) {
    write_output_file(arg_or<std::string>(args, "out", ""), Json(chosen).dump(2) + "\n");
  }
  out["strategy"] = to_string(strategy);
  out["doc_ids"] = chosen;
  return out.finish("selected " + std::to_string(chosen.size()) + " documents by " + to_string(strategy) + ": " +
                    join(chosen, " "));
}

// ---------------------------------------------------------------------------
// Class system

Json Project::adjust(const Json& args) {
  Report out("adjust");
  ClassAdjustment adjustment;
  adjustment.op = parse_adjustment_op(required<std::string>(args, "op"));
  adjustment.sources = required<std::vector<std::string>>(args, "sources");
  if (args.contains("target") && !args.at("target").is_null()) adjustment.target = args.at("target").get<std::string>();
  for (const auto& stage : stages()) {
    if (fs::exists(root_ / merge_path(stage)) && !is_applied(stage)) {
      fail(ErrorCode::state, "stage " + stage + " is merged but not applied; apply it before adjusting classes");
    }
  }

  // Every stored annotation file, in a fixed order.
  std::vector<fs::path> files;
  for (const char* dir : {"annotations", "pool", "preannotations"}) {
    if (!fs::exists(root_ / dir)) continue;
    for (const auto& entry : fs::recursive_directory_iterator(root_ / dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(fs::relative(entry.path(), root_));
    }
  }
  std::sort(files.begin(), files.end());
  Corpus corpus{manifest_.schema, {}};
  for (const auto& rel : files) {
    AnnotationSet set;
    for (auto& a : formats::read_annotations(root_ / rel)) set.put(std::move(a));
    corpus.sets.push_back(std::move(set));
  }
  const auto result = apply_adjustment(corpus, adjustment);

  manifest_.schema = result.corpus.schema;
  manifest_.adjustments.push_back(adjustment);
  Transaction txn(root_);
  for (std::size_t i = 0; i < files.size(); ++i) txn.write(files[i], formats::annotations_jsonl(result.corpus.sets[i]));
  write_manifest(txn);
  txn.commit();

  out["adjustment"] = formats::to_json(adjustment);
  out["classes"] = manifest_.schema.classes;
  out["changes"] = {{"annotations_touched", result.log.annotations_touched},
                    {"occurrences_relabeled", result.log.occurrences_relabeled},
                    {"occurrences_removed", result.log.occurrences_removed},
                    {"annotations_removed", result.log.annotations_removed}};
  return out.finish(std::string(to_string(adjustment.op)) + " applied; classes now " + join(manifest_.schema.classes, ", "));
}

Json Project::guidelines(const Json& args) {
  Report out("guidelines");
  const auto description = arg_or<std::string>(args, "description", "");
  std::vector<GuidelineExample> examples;
  std::set<std::string> covered;
  const std::set<std::string> test(manifest_.test_doc_ids.begin(), manifest_.test_doc_ids.end());
  for (const auto& [id, a] : resolved()) {
    if (test.count(id)) continue;
    const auto& d = document(id);
    if (const auto* c = std::get_if<ClassPayload>(&a.payload)) {
      if (covered.insert(c->value).second) examples.push_back({d.text, c->value});
    } else if (const auto* s = std::get_if<SpanPayload>(&a.payload)) {
      for (const auto& span : s->spans) {
        if (covered.insert(span.label).second) examples.push_back({text::slice(d.text, span.start, span.end), span.label});
      }
    }
  }
  const auto markdown = scaffold_guidelines(manifest_.schema, description, examples);
  if (args.contains("out") && !args.at("out").is_null()) write_output_file(arg_or<std::string>(args, "out", ""), markdown);
  out["examples"] = examples.size();
  out["markdown"] = markdown;
  return out.finish("guideline scaffold with " + std::to_string(examples.size()) + " examples");
}

}  // namespace annotkit
