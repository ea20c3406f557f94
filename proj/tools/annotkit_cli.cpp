// annotkit command-line front end. Talks to the store only through the C API.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include "CLI11.hpp"
#include "annotkit/annotkit.h"
#include "json.hpp"

namespace {

using Json = nlohmann::ordered_json;

struct Failure {
  annotkit_status status;
  std::string message;
};

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void check(annotkit_status status) {
  if (status != ANNOTKIT_OK) throw Failure{status, annotkit_last_error()};
}

Json take_report(char* raw) {
  Json report = Json::parse(raw);
  annotkit_free(raw);
  return report;
}

void print_warnings(const Json& report) {
  for (const auto& w : report.value("warnings", Json::array())) {
    const auto text = w.get<std::string>();
    std::cerr << (text.rfind("warning:", 0) == 0 ? "" : "warning: ") << one_line(text) << "\n";
  }
}

class Project {
 public:
  explicit Project(const std::string& root) { check(annotkit_open(root.c_str(), &handle_)); }
  ~Project() { annotkit_close(handle_); }
  Project(const Project&) = delete;
  Project& operator=(const Project&) = delete;

  Json run(const std::string& command, const Json& args) {
    char* raw = nullptr;
    check(annotkit_run(handle_, command.c_str(), args.dump().c_str(), &raw));
    return take_report(raw);
  }

  annotkit_project* handle() { return handle_; }

 private:
  annotkit_project* handle_ = nullptr;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  for (const char c : s) {
    if (c == ',') {
      out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  out.push_back(item);
  return out;
}

// Options shared by every subcommand are collected here, then turned into the
// command's JSON arguments.
struct Options {
  std::string kind = "doc_class";
  std::string classes;
  std::string range;
  std::string annotators;
  std::size_t batch_size = 0;
  std::uint64_t seed_init = 0;
  std::optional<double> plateau_epsilon;
  std::optional<std::int64_t> plateau_window;
  std::optional<double> divergence_threshold;
  std::optional<double> score_tolerance;

  std::string file;
  std::string mode = "simple";
  bool test = false;
  std::optional<std::size_t> size;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> docs;
  std::optional<std::string> stage;
  std::string annotator;
  std::optional<std::string> out;
  std::optional<std::string> resolutions;
  std::vector<std::string> files;
  std::optional<std::string> metric;
  std::optional<std::string> aggregation;
  double value = 0.0;
  std::optional<double> agreement;
  std::optional<std::int64_t> curve_size;
  std::optional<double> threshold;
  double fraction = 0.0;
  std::optional<bool> stratified;
  std::string strategy;
  std::size_t k = 0;
  std::string op;
  std::vector<std::string> sources;
  std::optional<std::string> target;
  std::string description;
  std::string host = "127.0.0.1";
  int port = 0;
};

template <typename T>
void put(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

Json init_manifest(const Options& o) {
  Json schema{{"task_kind", o.kind}};
  if (o.kind == "pair_regress") {
    const auto bounds = split_list(o.range);
    if (bounds.size() != 2) throw Failure{ANNOTKIT_E_INVALID_ARGUMENT, "--range expects LO,HI"};
    try {
      schema["range"] = {std::stod(bounds[0]), std::stod(bounds[1])};
    } catch (const std::exception&) {
      throw Failure{ANNOTKIT_E_INVALID_ARGUMENT, "--range expects two numbers"};
    }
  } else {
    schema["classes"] = o.classes.empty() ? std::vector<std::string>{} : split_list(o.classes);
  }
  Json m{{"schema", schema},
         {"annotators", o.annotators.empty() ? std::vector<std::string>{} : split_list(o.annotators)},
         {"batch_size", o.batch_size},
         {"seed", o.seed_init}};
  put(m, "plateau_epsilon", o.plateau_epsilon);
  put(m, "plateau_window", o.plateau_window);
  put(m, "divergence_threshold", o.divergence_threshold);
  put(m, "score_tolerance", o.score_tolerance);
  return m;
}

Json command_args(const std::string& command, const Options& o) {
  Json a = Json::object();
  put(a, "stage", o.stage);
  if (command == "add-docs" || command == "import-annotations") a["file"] = o.file;
  if (command == "plan") {
    a["mode"] = o.mode;
    a["test"] = o.test;
    put(a, "size", o.size);
    put(a, "seed", o.seed);
    put(a, "docs", o.docs);
  }
  if (command == "export-tasks") {
    a["annotator"] = o.annotator;
    put(a, "out", o.out);
  }
  if (command == "apply-resolutions") put(a, "resolutions", o.resolutions);
  if (command == "agreement" && !o.files.empty()) a["files"] = o.files;
  if (command == "eval") {
    a["predictions"] = o.file;
    put(a, "metric", o.metric);
    put(a, "aggregation", o.aggregation);
  }
  if (command == "curve") {
    a["metric"] = o.metric.value_or("");
    a["value"] = o.value;
    put(a, "agreement", o.agreement);
    put(a, "size", o.curve_size);
  }
  if (command == "monitor-split") put(a, "threshold", o.threshold);
  if (command == "resplit") {
    a["fraction"] = o.fraction;
    put(a, "seed", o.seed);
    put(a, "stratified", o.stratified);
  }
  if (command == "weak-label") a["rules"] = o.file;
  if (command == "bootstrap") a["predictions"] = o.file;
  if (command == "select") {
    a["predictions"] = o.file;
    a["strategy"] = o.strategy;
    a["k"] = o.k;
    put(a, "seed", o.seed);
    put(a, "out", o.out);
  }
  if (command == "adjust") {
    a["op"] = o.op;
    a["sources"] = o.sources;
    put(a, "target", o.target);
  }
  if (command == "guidelines") {
    a["description"] = o.description;
    put(a, "out", o.out);
  }
  return a;
}

void print_report(const std::string& command, const Json& report, const Options& o, bool as_json) {
  print_warnings(report);
  if (as_json) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  if (command == "export-tasks" && !o.out) {
    for (const auto& t : report.at("tasks")) std::cout << t.dump() << "\n";
    return;
  }
  if (command == "guidelines" && !o.out) {
    std::cout << report.at("markdown").get<std::string>();
    return;
  }
  std::cout << report.at("summary").get<std::string>() << "\n";
}

int serve(Project& project, const Options& o, bool as_json) {
  // Deliver SIGINT/SIGTERM to a watcher thread so the server can stop cleanly.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  annotkit_server_options options{o.host.c_str(), o.port, o.stage ? o.stage->c_str() : nullptr};
  annotkit_server* server = nullptr;
  check(annotkit_server_start(project.handle(), &options, &server));
  std::cerr << "serving resolutions on http://" << o.host << ":" << annotkit_server_port(server) << "\n";
  std::thread([server, signals]() mutable {
    int sig = 0;
    sigwait(&signals, &sig);
    annotkit_server_stop(server);
  }).detach();
  annotkit_server_wait(server);
  char* raw = nullptr;
  const auto status = annotkit_server_state(server, &raw);
  annotkit_server_destroy(server);
  check(status);
  const auto state = take_report(raw);
  if (as_json) {
    std::cout << state.dump(2) << "\n";
  } else {
    std::cout << "resolved " << state.at("conflicts_resolved") << "/" << state.at("conflicts_total") << " conflicts in "
              << state.at("stage").get<std::string>() << (state.at("complete").get<bool>() ? "" : " (stopped early)")
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"annotkit: iterative text-annotation workflow"};
  app.require_subcommand(1);
  app.set_version_flag("--version", annotkit_version());
  std::string store;
  bool as_json = false;
  app.add_option("--store", store, "Project store directory (default: $ANNOTKIT_STORE)");
  app.add_flag("--json", as_json, "Print the full JSON report");

  Options o;
  std::vector<std::pair<std::string, CLI::App*>> commands;
  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    commands.emplace_back(name, sub);
    return sub;
  };
  auto stage_opt = [&](CLI::App* sub) { sub->add_option("--stage", o.stage, "Stage (test, iter-0001, ...)"); };

  auto* init = add("init", "Create a project store");
  init->add_option("--kind", o.kind, "doc_class, span_label or pair_regress")->capture_default_str();
  init->add_option("--classes", o.classes, "Comma-separated class names");
  init->add_option("--range", o.range, "Score range LO,HI for pair_regress");
  init->add_option("--annotators", o.annotators, "Comma-separated annotator ids")->required();
  init->add_option("--batch-size", o.batch_size, "Documents per batch")->required();
  init->add_option("--seed", o.seed_init, "Project seed");
  init->add_option("--plateau-epsilon", o.plateau_epsilon);
  init->add_option("--plateau-window", o.plateau_window);
  init->add_option("--divergence-threshold", o.divergence_threshold);
  init->add_option("--score-tolerance", o.score_tolerance);

  add("add-docs", "Add documents from a JSONL file")->add_option("file", o.file)->required();
  add("status", "Summarize the project");

  auto* plan = add("plan", "Plan the next batch");
  plan->add_option("--mode", o.mode, "simple, review or cross")->capture_default_str();
  plan->add_flag("--test", o.test, "Plan the held-out test set");
  plan->add_option("--size", o.size, "Batch size (default: manifest batch_size)");
  plan->add_option("--seed", o.seed);
  plan->add_option("--docs", o.docs, "JSON list of doc ids to plan, e.g. from select");

  auto* exp = add("export-tasks", "Write an annotator's tasks as JSONL");
  exp->add_option("--annotator", o.annotator)->required();
  exp->add_option("--out", o.out);
  stage_opt(exp);

  auto* imp = add("import-annotations", "Import an annotator's JSONL annotations");
  imp->add_option("file", o.file)->required();
  stage_opt(imp);

  stage_opt(add("merge", "Merge the stage's annotations into agreed fragments and conflicts"));

  auto* srv = add("serve", "Serve the conflict-resolution HTTP API");
  srv->add_option("--host", o.host)->capture_default_str();
  srv->add_option("--port", o.port, "0 picks a free port")->capture_default_str();
  stage_opt(srv);

  auto* apply = add("apply-resolutions", "Resolve conflicts and add the stage to the training pool");
  apply->add_option("--resolutions", o.resolutions, "JSON list of resolutions");
  stage_opt(apply);

  auto* agr = add("agreement", "Inter-annotator agreement for a stage or for files");
  agr->add_option("--files", o.files, "Annotation JSONL files, one per annotator");
  stage_opt(agr);

  auto* ev = add("eval", "Evaluate predictions on the test set");
  ev->add_option("--predictions", o.file)->required();
  ev->add_option("--metric", o.metric);
  ev->add_option("--aggregation", o.aggregation, "micro, macro or per_class");

  auto* cur = add("curve", "Record a learning-curve point and check for a plateau");
  cur->add_option("--metric", o.metric)->required();
  cur->add_option("--value", o.value)->required();
  cur->add_option("--agreement", o.agreement);
  cur->add_option("--size", o.curve_size, "Training-set size (default: resolved training documents)");

  add("monitor-split", "Compare train and test label distributions")->add_option("--threshold", o.threshold);

  auto* rs = add("resplit", "Draw a new test set from all labeled documents");
  rs->add_option("--fraction", o.fraction)->required();
  rs->add_option("--seed", o.seed);
  rs->add_option("--stratified", o.stratified);

  add("weak-label", "Pre-annotate with weak rules")->add_option("--rules", o.file)->required();
  add("bootstrap", "Pre-annotate with model predictions")->add_option("--predictions", o.file)->required();

  auto* sel = add("select", "Choose the next batch by active learning");
  sel->add_option("--predictions", o.file)->required();
  sel->add_option("--strategy", o.strategy, "least_confidence, margin, entropy or random")->required();
  sel->add_option("--k", o.k)->required();
  sel->add_option("--seed", o.seed);
  sel->add_option("--out", o.out);

  auto* adj = add("adjust", "Drop, incorporate or merge classes across the store");
  adj->add_option("--op", o.op, "drop, incorporate or merge")->required();
  adj->add_option("--source", o.sources)->required();
  adj->add_option("--target", o.target);

  auto* gl = add("guidelines", "Scaffold annotation guidelines");
  gl->add_option("--description", o.description);
  gl->add_option("--out", o.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "E_INVALID_ARGUMENT: " << one_line(e.what()) << "\n";
    return ANNOTKIT_E_INVALID_ARGUMENT;
  }

  std::string command;
  for (const auto& [name, sub] : commands) {
    if (sub->parsed()) command = name;
  }

  try {
    if (store.empty()) {
      const char* env = std::getenv("ANNOTKIT_STORE");
      if (env) store = env;
    }
    if (store.empty()) throw Failure{ANNOTKIT_E_INVALID_ARGUMENT, "no store: pass --store or set ANNOTKIT_STORE"};

    if (command == "init") {
      char* raw = nullptr;
      check(annotkit_init(store.c_str(), init_manifest(o).dump().c_str(), &raw));
      print_report(command, take_report(raw), o, as_json);
      return 0;
    }
    Project project(store);
    if (command == "serve") return serve(project, o, as_json);
    print_report(command, project.run(command, command_args(command, o)), o, as_json);
    return 0;
  } catch (const Failure& f) {
    std::cerr << annotkit_status_name(f.status) << ": " << one_line(f.message) << "\n";
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << one_line(e.what()) << "\n";
    return ANNOTKIT_E_INTERNAL;
  }
}
