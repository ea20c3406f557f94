#include "annotkit/formats.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "annotkit/error.hpp"

namespace annotkit::formats {
namespace {

class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j_.is_object()) fail(ErrorCode::parse, what_ + ": expected an object");
  }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) fail(ErrorCode::parse, what_ + ": missing field '" + key + "'");
    return *it;
  }

  // nullptr when absent or null.
  const Json* maybe(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void done() const {
    for (const auto& item : j_.items()) {
      if (seen_.count(item.key()) == 0) fail(ErrorCode::parse, what_ + ": unknown field '" + item.key() + "'");
    }
  }

  const std::string& what() const { return what_; }

 private:
  const Json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

std::string as_string(const Json& j, const std::string& what) {
  if (!j.is_string()) fail(ErrorCode::parse, what + ": expected a string");
  return j.get<std::string>();
}

std::uint64_t as_unsigned(const Json& j, const std::string& what) {
  if (!j.is_number_unsigned()) fail(ErrorCode::parse, what + ": expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::int64_t as_integer(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) fail(ErrorCode::parse, what + ": expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    fail(ErrorCode::parse, what + ": integer out of range");
  }
  return j.get<std::int64_t>();
}

double as_real(const Json& j, const std::string& what) {
  if (!j.is_number()) fail(ErrorCode::parse, what + ": expected a number");
  return j.get<double>();
}

bool as_bool(const Json& j, const std::string& what) {
  if (!j.is_boolean()) fail(ErrorCode::parse, what + ": expected a boolean");
  return j.get<bool>();
}

std::vector<std::string> as_strings(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorCode::parse, what + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : j) out.push_back(as_string(item, what));
  return out;
}

const Json& as_array(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorCode::parse, what + ": expected an array");
  return j;
}

Json strings(const std::vector<std::string>& values) {
  Json out = Json::array();
  for (const auto& v : values) out.push_back(v);
  return out;
}

Json optional_real(const std::optional<double>& value) {
  return value ? Json(*value) : Json(nullptr);
}

}  // namespace

Json to_json(const LabelSchema& schema) {
  Json j;
  j["task_kind"] = to_string(schema.task_kind);
  if (schema.task_kind == TaskKind::pair_regress) {
    j["range"] = Json::array({schema.range_lo, schema.range_hi});
  } else {
    j["classes"] = strings(schema.classes);
  }
  return j;
}

LabelSchema schema_from_json(const Json& j) {
  ObjectReader r(j, "schema");
  LabelSchema schema;
  schema.task_kind = parse_task_kind(as_string(r.at("task_kind"), "schema.task_kind"));
  if (schema.task_kind == TaskKind::pair_regress) {
    const auto& range = as_array(r.at("range"), "schema.range");
    if (range.size() != 2) fail(ErrorCode::parse, "schema.range: expected [lo, hi]");
    schema.range_lo = as_real(range[0], "schema.range");
    schema.range_hi = as_real(range[1], "schema.range");
  } else {
    schema.classes = as_strings(r.at("classes"), "schema.classes");
  }
  r.done();
  return schema;
}

Json to_json(const Document& doc) {
  Json j;
  j["id"] = doc.id;
  j["text"] = doc.text;
  if (doc.text_b) j["text_b"] = *doc.text_b;
  if (!doc.meta.is_null()) j["meta"] = Json(doc.meta);
  return j;
}

Document document_from_json(const Json& j) {
  ObjectReader r(j, "document");
  Document doc;
  doc.id = as_string(r.at("id"), "document.id");
  doc.text = as_string(r.at("text"), "document.text");
  if (const auto* b = r.maybe("text_b")) doc.text_b = as_string(*b, "document.text_b");
  if (const auto* m = r.maybe("meta")) {
    if (!m->is_object()) fail(ErrorCode::parse, "document.meta: expected an object");
    doc.meta = nlohmann::json(*m);
  }
  r.done();
  return doc;
}

Json to_json(const Payload& payload) {
  Json j;
  if (const auto* c = std::get_if<ClassPayload>(&payload)) {
    j["kind"] = "class";
    j["value"] = c->value;
  } else if (const auto* s = std::get_if<SpanPayload>(&payload)) {
    j["kind"] = "spans";
    Json spans = Json::array();
    for (const auto& span : s->spans) {
      Json item;
      item["start"] = span.start;
      item["end"] = span.end;
      item["label"] = span.label;
      spans.push_back(std::move(item));
    }
    j["spans"] = std::move(spans);
  } else {
    j["kind"] = "score";
    j["value"] = std::get<ScorePayload>(payload).value;
  }
  return j;
}

Payload payload_from_json(const Json& j) {
  ObjectReader r(j, "payload");
  const auto kind = as_string(r.at("kind"), "payload.kind");
  Payload payload;
  if (kind == "class") {
    payload = ClassPayload{as_string(r.at("value"), "payload.value")};
  } else if (kind == "spans") {
    SpanPayload spans;
    for (const auto& item : as_array(r.at("spans"), "payload.spans")) {
      ObjectReader s(item, "span");
      Span span;
      span.start = static_cast<std::size_t>(as_unsigned(s.at("start"), "span.start"));
      span.end = static_cast<std::size_t>(as_unsigned(s.at("end"), "span.end"));
      span.label = as_string(s.at("label"), "span.label");
      s.done();
      spans.spans.push_back(std::move(span));
    }
    payload = std::move(spans);
  } else if (kind == "score") {
    payload = ScorePayload{as_real(r.at("value"), "payload.value")};
  } else {
    fail(ErrorCode::parse, "payload.kind: unknown kind '" + kind + "'");
  }
  r.done();
  return payload;
}

Json to_json(const Annotation& ann) {
  Json j;
  j["doc_id"] = ann.doc_id;
  j["annotator"] = ann.annotator;
  j["provenance"] = to_string(ann.provenance);
  j["payload"] = to_json(ann.payload);
  return j;
}

Annotation annotation_from_json(const Json& j) {
  ObjectReader r(j, "annotation");
  Annotation ann;
  ann.doc_id = as_string(r.at("doc_id"), "annotation.doc_id");
  ann.annotator = as_string(r.at("annotator"), "annotation.annotator");
  ann.provenance = parse_provenance(as_string(r.at("provenance"), "annotation.provenance"));
  ann.payload = payload_from_json(r.at("payload"));
  r.done();
  return ann;
}

Json to_json(const ClassAdjustment& adj) {
  Json j;
  j["op"] = to_string(adj.op);
  j["sources"] = strings(adj.sources);
  if (adj.target) j["target"] = *adj.target;
  return j;
}

ClassAdjustment adjustment_from_json(const Json& j) {
  ObjectReader r(j, "adjustment");
  ClassAdjustment adj;
  adj.op = parse_adjustment_op(as_string(r.at("op"), "adjustment.op"));
  adj.sources = as_strings(r.at("sources"), "adjustment.sources");
  if (const auto* t = r.maybe("target")) adj.target = as_string(*t, "adjustment.target");
  r.done();
  return adj;
}

Json to_json(const ProjectManifest& m) {
  Json j;
  j["schema"] = to_json(m.schema);
  j["annotators"] = strings(m.annotators);
  j["batch_size"] = m.batch_size;
  j["seed"] = m.seed;
  j["plateau_epsilon"] = m.plateau_epsilon;
  j["plateau_window"] = m.plateau_window;
  j["divergence_threshold"] = m.divergence_threshold;
  j["score_tolerance"] = m.score_tolerance;
  j["test_doc_ids"] = strings(m.test_doc_ids);
  Json history = Json::array();
  for (const auto& adj : m.adjustments) history.push_back(to_json(adj));
  j["adjustments"] = std::move(history);
  return j;
}

ProjectManifest manifest_from_json(const Json& j) {
  ObjectReader r(j, "manifest");
  ProjectManifest m;
  m.schema = schema_from_json(r.at("schema"));
  m.annotators = as_strings(r.at("annotators"), "manifest.annotators");
  m.batch_size = as_integer(r.at("batch_size"), "manifest.batch_size");
  m.seed = as_unsigned(r.at("seed"), "manifest.seed");
  if (const auto* v = r.maybe("plateau_epsilon")) m.plateau_epsilon = as_real(*v, "manifest.plateau_epsilon");
  if (const auto* v = r.maybe("plateau_window")) m.plateau_window = as_integer(*v, "manifest.plateau_window");
  if (const auto* v = r.maybe("divergence_threshold")) {
    m.divergence_threshold = as_real(*v, "manifest.divergence_threshold");
  }
  if (const auto* v = r.maybe("score_tolerance")) m.score_tolerance = as_real(*v, "manifest.score_tolerance");
  if (const auto* v = r.maybe("test_doc_ids")) m.test_doc_ids = as_strings(*v, "manifest.test_doc_ids");
  if (const auto* v = r.maybe("adjustments")) {
    for (const auto& item : as_array(*v, "manifest.adjustments")) m.adjustments.push_back(adjustment_from_json(item));
  }
  r.done();
  return m;
}

Json to_json(const BatchPlan& plan) {
  Json j;
  j["iteration"] = plan.iteration;
  j["mode"] = to_string(plan.mode);
  j["roster"] = strings(plan.roster);
  Json assignments = Json::array();
  for (const auto& a : plan.assignments) {
    Json part;
    part["index"] = a.part.index;
    part["doc_ids"] = strings(a.part.doc_ids);
    Json item;
    item["part"] = std::move(part);
    item["annotators"] = strings(a.annotators);
    item["role"] = to_string(a.role);
    assignments.push_back(std::move(item));
  }
  j["assignments"] = std::move(assignments);
  return j;
}

BatchPlan plan_from_json(const Json& j) {
  ObjectReader r(j, "plan");
  BatchPlan plan;
  plan.iteration = as_integer(r.at("iteration"), "plan.iteration");
  plan.mode = parse_plan_mode(as_string(r.at("mode"), "plan.mode"));
  plan.roster = as_strings(r.at("roster"), "plan.roster");
  for (const auto& item : as_array(r.at("assignments"), "plan.assignments")) {
    ObjectReader a(item, "assignment");
    Assignment assignment;
    {
      ObjectReader p(a.at("part"), "part");
      assignment.part.index = static_cast<std::size_t>(as_unsigned(p.at("index"), "part.index"));
      assignment.part.doc_ids = as_strings(p.at("doc_ids"), "part.doc_ids");
      p.done();
    }
    assignment.annotators = as_strings(a.at("annotators"), "assignment.annotators");
    assignment.role = parse_role(as_string(a.at("role"), "assignment.role"));
    a.done();
    plan.assignments.push_back(std::move(assignment));
  }
  r.done();
  return plan;
}

Json to_json(const Resolution& resolution) {
  Json j;
  j["conflict_id"] = resolution.conflict_id;
  switch (resolution.choice) {
    case ChoiceKind::take_a: j["choice"] = "a"; break;
    case ChoiceKind::take_b: j["choice"] = "b"; break;
    case ChoiceKind::neither: j["choice"] = "none"; break;
    case ChoiceKind::custom: {
      Json custom;
      custom["custom"] = to_json(*resolution.custom);
      j["choice"] = std::move(custom);
      break;
    }
  }
  return j;
}

Resolution resolution_from_json(const Json& j) {
  ObjectReader r(j, "resolution");
  Resolution resolution;
  resolution.conflict_id = as_string(r.at("conflict_id"), "resolution.conflict_id");
  const auto& choice = r.at("choice");
  if (choice.is_string()) {
    const auto value = choice.get<std::string>();
    if (value == "a") {
      resolution.choice = ChoiceKind::take_a;
    } else if (value == "b") {
      resolution.choice = ChoiceKind::take_b;
    } else if (value == "none") {
      resolution.choice = ChoiceKind::neither;
    } else {
      fail(ErrorCode::parse, "resolution.choice: expected \"a\", \"b\", \"none\" or {\"custom\": …}");
    }
  } else {
    ObjectReader c(choice, "resolution.choice");
    resolution.choice = ChoiceKind::custom;
    resolution.custom = payload_from_json(c.at("custom"));
    c.done();
  }
  r.done();
  return resolution;
}

Json to_json(const Conflict& conflict) {
  Json j;
  j["conflict_id"] = conflict.conflict_id;
  j["doc_id"] = conflict.doc_id;
  j["kind"] = to_string(conflict.kind);
  j["side_a"] = conflict.side_a ? to_json(*conflict.side_a) : Json(nullptr);
  j["side_b"] = conflict.side_b ? to_json(*conflict.side_b) : Json(nullptr);
  if (conflict.resolution) j["resolution"] = to_json(*conflict.resolution);
  return j;
}

Conflict conflict_from_json(const Json& j) {
  ObjectReader r(j, "conflict");
  Conflict c;
  c.conflict_id = as_string(r.at("conflict_id"), "conflict.conflict_id");
  c.doc_id = as_string(r.at("doc_id"), "conflict.doc_id");
  c.kind = parse_conflict_kind(as_string(r.at("kind"), "conflict.kind"));
  r.at("side_a");
  r.at("side_b");
  if (const auto* a = r.maybe("side_a")) c.side_a = payload_from_json(*a);
  if (const auto* b = r.maybe("side_b")) c.side_b = payload_from_json(*b);
  if (const auto* res = r.maybe("resolution")) c.resolution = resolution_from_json(*res);
  r.done();
  return c;
}

Json to_json(const MergedDocument& merged) {
  Json j;
  j["doc_id"] = merged.doc_id;
  j["annotator_a"] = merged.annotator_a;
  j["annotator_b"] = merged.annotator_b.empty() ? Json(nullptr) : Json(merged.annotator_b);
  j["agreed"] = merged.agreed ? to_json(*merged.agreed) : Json(nullptr);
  Json conflicts = Json::array();
  for (const auto& c : merged.conflicts) conflicts.push_back(to_json(c));
  j["conflicts"] = std::move(conflicts);
  return j;
}

MergedDocument merged_from_json(const Json& j) {
  ObjectReader r(j, "merged document");
  MergedDocument m;
  m.doc_id = as_string(r.at("doc_id"), "merged.doc_id");
  m.annotator_a = as_string(r.at("annotator_a"), "merged.annotator_a");
  r.at("annotator_b");
  if (const auto* b = r.maybe("annotator_b")) m.annotator_b = as_string(*b, "merged.annotator_b");
  r.at("agreed");
  if (const auto* a = r.maybe("agreed")) m.agreed = payload_from_json(*a);
  for (const auto& item : as_array(r.at("conflicts"), "merged.conflicts")) {
    m.conflicts.push_back(conflict_from_json(item));
  }
  r.done();
  return m;
}

Json to_json(const WeakRule& rule) {
  Json j;
  j["rule_id"] = rule.rule_id;
  Json pattern;
  if (const auto* lit = std::get_if<LiteralPattern>(&rule.pattern)) {
    pattern["kind"] = "literal";
    pattern["tokens"] = strings(lit->tokens);
  } else {
    const auto& neg = std::get<NegatedPositivePattern>(rule.pattern);
    pattern["kind"] = "negated_positive";
    pattern["prefix"] = neg.prefix;
    pattern["lexicon"] = strings(neg.lexicon);
  }
  j["pattern"] = std::move(pattern);
  j["label"] = rule.label;
  j["priority"] = rule.priority;
  j["case_sensitive"] = rule.case_sensitive;
  return j;
}

WeakRule rule_from_json(const Json& j) {
  ObjectReader r(j, "rule");
  WeakRule rule;
  rule.rule_id = as_string(r.at("rule_id"), "rule.rule_id");
  {
    ObjectReader p(r.at("pattern"), "rule.pattern");
    const auto kind = as_string(p.at("kind"), "rule.pattern.kind");
    if (kind == "literal") {
      rule.pattern = LiteralPattern{as_strings(p.at("tokens"), "rule.pattern.tokens")};
    } else if (kind == "negated_positive") {
      NegatedPositivePattern neg;
      neg.prefix = as_string(p.at("prefix"), "rule.pattern.prefix");
      neg.lexicon = as_strings(p.at("lexicon"), "rule.pattern.lexicon");
      rule.pattern = std::move(neg);
    } else {
      fail(ErrorCode::parse, "rule.pattern.kind: unknown kind '" + kind + "'");
    }
    p.done();
  }
  rule.label = as_string(r.at("label"), "rule.label");
  rule.priority = as_integer(r.at("priority"), "rule.priority");
  if (const auto* cs = r.maybe("case_sensitive")) rule.case_sensitive = as_bool(*cs, "rule.case_sensitive");
  r.done();
  return rule;
}

Json to_json(const Prediction& prediction) {
  Json j;
  j["doc_id"] = prediction.doc_id;
  if (prediction.payload) {
    j["payload"] = to_json(*prediction.payload);
  } else {
    Json scores = Json::object();
    for (const auto& [label, p] : prediction.scores) scores[label] = p;
    j["scores"] = std::move(scores);
  }
  return j;
}

Prediction prediction_from_json(const Json& j) {
  ObjectReader r(j, "prediction");
  Prediction p;
  p.doc_id = as_string(r.at("doc_id"), "prediction.doc_id");
  const auto* scores = r.maybe("scores");
  const auto* payload = r.maybe("payload");
  if ((scores == nullptr) == (payload == nullptr)) {
    fail(ErrorCode::parse, "prediction: expected exactly one of 'scores' or 'payload'");
  }
  if (scores != nullptr) {
    if (!scores->is_object()) fail(ErrorCode::parse, "prediction.scores: expected an object");
    for (const auto& item : scores->items()) p.scores[item.key()] = as_real(item.value(), "prediction.scores");
  } else {
    p.payload = payload_from_json(*payload);
  }
  r.done();
  return p;
}

Json to_json(const AgreementReport& report) {
  Json j;
  j["metric"] = to_string(report.metric);
  j["value"] = report.value;
  j["observed_agreement"] = optional_real(report.observed_agreement);
  j["expected_agreement"] = optional_real(report.expected_agreement);
  if (report.metric == AgreementMetric::pairwise_f1) {
    j["precision"] = optional_real(report.precision);
    j["recall"] = optional_real(report.recall);
  }
  j["n_items"] = report.n_items;
  Json per_class = Json::object();
  for (const auto& [label, value] : report.per_class) per_class[label] = value;
  j["per_class"] = std::move(per_class);
  return j;
}

Json to_json(const EvalReport& report) {
  Json j;
  j["metric"] = report.metric;
  j["value"] = report.value;
  if (report.precision) j["precision"] = *report.precision;
  if (report.recall) j["recall"] = *report.recall;
  j["n_items"] = report.n_items;
  if (!report.per_class.empty()) {
    Json per_class = Json::object();
    for (const auto& [label, s] : report.per_class) {
      Json item;
      item["precision"] = optional_real(s.precision);
      item["recall"] = optional_real(s.recall);
      item["f1"] = optional_real(s.f1);
      item["tp"] = s.tp;
      item["fp"] = s.fp;
      item["fn"] = s.fn;
      per_class[label] = std::move(item);
    }
    j["per_class"] = std::move(per_class);
  }
  if (report.warning) {
    j["warning"] = "F1 undefined for some classes; excluded from the average";
    j["undefined_classes"] = strings(report.undefined_classes);
  }
  return j;
}

Json to_json(const ValidationReport& report) {
  Json j = Json::array();
  for (const auto& v : report) {
    Json item;
    item["field"] = v.field;
    item["message"] = v.message;
    j.push_back(std::move(item));
  }
  return j;
}

std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, nlohmann::detail::error_handler_t::strict) + "\n";
}

void read_jsonl(const std::filesystem::path& path,
                const std::function<void(std::size_t, const Json&)>& on_record) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    Json value;
    try {
      value = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::parse, where + ": malformed JSON (" + e.what() + ")");
    }
    try {
      on_record(line_no, value);
    } catch (const Error& e) {
      fail(e.code(), where + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::parse, where + ": " + e.what());
    }
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::parse, path.string() + ": malformed JSON (" + e.what() + ")");
  }
}

namespace {

template <typename T>
std::vector<T> read_list(const std::filesystem::path& path, T (*from_json)(const Json&)) {
  const auto j = read_json_file(path);
  if (!j.is_array()) fail(ErrorCode::parse, path.string() + ": expected a JSON array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      out.push_back(from_json(j[i]));
    } catch (const Error& e) {
      fail(e.code(), path.string() + " [" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Document> read_documents(const std::filesystem::path& path) {
  std::vector<Document> docs;
  read_jsonl(path, [&](std::size_t, const Json& j) { docs.push_back(document_from_json(j)); });
  return docs;
}

std::vector<Annotation> read_annotations(const std::filesystem::path& path) {
  std::vector<Annotation> out;
  read_jsonl(path, [&](std::size_t, const Json& j) { out.push_back(annotation_from_json(j)); });
  return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  read_jsonl(path, [&](std::size_t, const Json& j) { out.push_back(prediction_from_json(j)); });
  return out;
}

std::vector<WeakRule> read_rules(const std::filesystem::path& path) {
  return read_list<WeakRule>(path, &rule_from_json);
}

std::vector<Resolution> read_resolutions(const std::filesystem::path& path) {
  return read_list<Resolution>(path, &resolution_from_json);
}

std::string documents_jsonl(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& d : docs) out += dump_line(to_json(d));
  return out;
}

std::string annotations_jsonl(const AnnotationSet& set) {
  std::string out;
  for (const auto& [_, ann] : set.annotations()) out += dump_line(to_json(ann));
  return out;
}

std::string annotations_jsonl(const std::vector<Annotation>& annotations) {
  std::string out;
  for (const auto& ann : annotations) out += dump_line(to_json(ann));
  return out;
}

}  // namespace annotkit::formats
