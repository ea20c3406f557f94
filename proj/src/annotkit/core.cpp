#include "annotkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "annotkit/error.hpp"
#include "annotkit/text.hpp"

namespace annotkit {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "E_INVALID_ARGUMENT";
    case ErrorCode::io: return "E_IO";
    case ErrorCode::parse: return "E_PARSE";
    case ErrorCode::validation: return "E_VALIDATION";
    case ErrorCode::reference: return "E_REFERENCE";
    case ErrorCode::undefined: return "E_UNDEFINED";
    case ErrorCode::conflict: return "E_CONFLICT";
    case ErrorCode::state: return "E_STATE";
    case ErrorCode::locked: return "E_LOCKED";
    case ErrorCode::internal: return "E_INTERNAL";
  }
  return "E_INTERNAL";
}

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::doc_class: return "doc_class";
    case TaskKind::span_label: return "span_label";
    case TaskKind::pair_regress: return "pair_regress";
  }
  return "doc_class";
}

TaskKind parse_task_kind(const std::string& name) {
  if (name == "doc_class") return TaskKind::doc_class;
  if (name == "span_label") return TaskKind::span_label;
  if (name == "pair_regress") return TaskKind::pair_regress;
  fail(ErrorCode::parse, "unknown task_kind '" + name + "'");
}

const char* to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::human: return "human";
    case Provenance::model: return "model";
    case Provenance::weak: return "weak";
    case Provenance::resolved: return "resolved";
  }
  return "human";
}

Provenance parse_provenance(const std::string& name) {
  if (name == "human") return Provenance::human;
  if (name == "model") return Provenance::model;
  if (name == "weak") return Provenance::weak;
  if (name == "resolved") return Provenance::resolved;
  fail(ErrorCode::parse, "unknown provenance '" + name + "'");
}

const char* to_string(AdjustmentOp op) {
  switch (op) {
    case AdjustmentOp::drop: return "drop";
    case AdjustmentOp::incorporate: return "incorporate";
    case AdjustmentOp::merge: return "merge";
  }
  return "drop";
}

AdjustmentOp parse_adjustment_op(const std::string& name) {
  if (name == "drop") return AdjustmentOp::drop;
  if (name == "incorporate") return AdjustmentOp::incorporate;
  if (name == "merge") return AdjustmentOp::merge;
  fail(ErrorCode::parse, "unknown adjustment op '" + name + "'");
}

bool LabelSchema::has_class(const std::string& name) const {
  return class_index(name) != classes.size();
}

std::size_t LabelSchema::class_index(const std::string& name) const {
  const auto it = std::find(classes.begin(), classes.end(), name);
  return static_cast<std::size_t>(it - classes.begin());
}

bool overlaps(const Span& a, const Span& b) { return a.start < b.end && b.start < a.end; }

void AnnotationSet::put(Annotation annotation) {
  if (annotator_.empty()) annotator_ = annotation.annotator;
  if (annotation.annotator != annotator_) {
    fail(ErrorCode::validation, "annotation by '" + annotation.annotator +
                                    "' cannot join the set of '" + annotator_ + "'");
  }
  auto key = annotation.doc_id;
  annotations_.insert_or_assign(std::move(key), std::move(annotation));
}

bool AnnotationSet::erase(const std::string& doc_id) { return annotations_.erase(doc_id) != 0; }

const Annotation* AnnotationSet::find(const std::string& doc_id) const {
  const auto it = annotations_.find(doc_id);
  return it == annotations_.end() ? nullptr : &it->second;
}

std::vector<std::string> AnnotationSet::doc_ids() const {
  std::vector<std::string> ids;
  ids.reserve(annotations_.size());
  for (const auto& [id, _] : annotations_) ids.push_back(id);
  return ids;
}

std::string describe(const ValidationReport& report) {
  std::ostringstream out;
  for (std::size_t i = 0; i < report.size(); ++i) {
    if (i != 0) out << "; ";
    out << report[i].field << ": " << report[i].message;
  }
  return out.str();
}

ValidationReport validate_schema(const LabelSchema& schema) {
  ValidationReport report;
  if (schema.task_kind == TaskKind::pair_regress) {
    if (!std::isfinite(schema.range_lo) || !std::isfinite(schema.range_hi) ||
        !(schema.range_lo < schema.range_hi)) {
      report.push_back({"range", "range_lo must be < range_hi"});
    }
    if (!schema.classes.empty()) report.push_back({"classes", "pair_regress takes no classes"});
    return report;
  }
  if (schema.classes.empty()) report.push_back({"classes", "no classes"});
  std::set<std::string> seen;
  for (const auto& name : schema.classes) {
    if (name.empty()) report.push_back({"classes", "empty class name"});
    if (!seen.insert(name).second) report.push_back({"classes", "duplicate class '" + name + "'"});
  }
  return report;
}

ValidationReport validate_document(const Document& doc, const LabelSchema& schema) {
  ValidationReport report;
  if (doc.id.empty()) report.push_back({"id", "empty id"});
  if (doc.text.empty()) report.push_back({"text", "empty text"});
  if (schema.task_kind == TaskKind::pair_regress) {
    if (!doc.text_b) {
      report.push_back({"text_b", "missing text_b"});
    } else if (doc.text_b->empty()) {
      report.push_back({"text_b", "empty text_b"});
    }
  } else if (doc.text_b) {
    report.push_back({"text_b", "text_b only allowed for pair_regress"});
  }
  if (!doc.meta.is_null() && !doc.meta.is_object()) {
    report.push_back({"meta", "meta must be an object"});
  }
  return report;
}

namespace {

void check_spans(const std::vector<Span>& spans, const Document& doc, const LabelSchema& schema,
                 ValidationReport& report) {
  const auto text_length = text::length(doc.text);
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& span = spans[i];
    const std::string field = "spans[" + std::to_string(i) + "]";
    if (span.start >= span.end) report.push_back({field, "start ≥ end"});
    if (span.end > text_length) report.push_back({field, "end beyond text length"});
    if (!schema.has_class(span.label)) {
      report.push_back({field, "unknown label '" + span.label + "'"});
    }
    if (i > 0) {
      const auto& prev = spans[i - 1];
      if (span.start < prev.start || (span.start == prev.start && span.end < prev.end)) {
        report.push_back({field, "spans not sorted by start"});
      } else if (overlaps(prev, span)) {
        report.push_back({field, "spans overlap"});
      }
    }
  }
}

}  // namespace

ValidationReport validate_payload(const Payload& payload, const Document& doc,
                                  const LabelSchema& schema) {
  ValidationReport report;
  switch (schema.task_kind) {
    case TaskKind::doc_class:
      if (const auto* p = std::get_if<ClassPayload>(&payload)) {
        if (!schema.has_class(p->value)) report.push_back({"class", "unknown class '" + p->value + "'"});
      } else {
        report.push_back({"payload", "doc_class requires a class payload"});
      }
      break;
    case TaskKind::span_label:
      if (const auto* p = std::get_if<SpanPayload>(&payload)) {
        check_spans(p->spans, doc, schema, report);
      } else {
        report.push_back({"payload", "span_label requires a spans payload"});
      }
      break;
    case TaskKind::pair_regress:
      if (const auto* p = std::get_if<ScorePayload>(&payload)) {
        if (!std::isfinite(p->value) || p->value < schema.range_lo || p->value > schema.range_hi) {
          report.push_back({"score", "score out of range"});
        }
      } else {
        report.push_back({"payload", "pair_regress requires a score payload"});
      }
      break;
  }
  return report;
}

ValidationReport validate_annotation(const Annotation& ann, const Document& doc,
                                     const LabelSchema& schema) {
  if (ann.doc_id != doc.id) {
    fail(ErrorCode::reference, "annotation references unknown doc_id '" + ann.doc_id + "'");
  }
  ValidationReport report;
  if (ann.annotator.empty()) report.push_back({"annotator", "empty annotator"});
  auto payload_report = validate_payload(ann.payload, doc, schema);
  report.insert(report.end(), payload_report.begin(), payload_report.end());
  return report;
}

ValidationReport validate_manifest(const ProjectManifest& manifest) {
  ValidationReport report = validate_schema(manifest.schema);
  if (manifest.annotators.empty()) report.push_back({"annotators", "no annotators"});
  std::set<std::string> seen;
  for (const auto& id : manifest.annotators) {
    if (id.empty()) report.push_back({"annotators", "empty annotator id"});
    if (!seen.insert(id).second) report.push_back({"annotators", "duplicate annotator '" + id + "'"});
    if (id == "resolved" || id == "model" || id == "weak") {
      report.push_back({"annotators", "'" + id + "' is a reserved id"});
    }
  }
  if (manifest.batch_size < 1) report.push_back({"batch_size", "batch_size must be ≥ 1"});
  if (!(manifest.plateau_epsilon > 0.0)) report.push_back({"plateau_epsilon", "must be > 0"});
  if (manifest.plateau_window < 1) report.push_back({"plateau_window", "must be ≥ 1"});
  if (!(manifest.divergence_threshold > 0.0 && manifest.divergence_threshold <= 1.0)) {
    report.push_back({"divergence_threshold", "must be in (0, 1]"});
  }
  if (!(manifest.score_tolerance >= 0.0)) report.push_back({"score_tolerance", "must be ≥ 0"});
  return report;
}

void sort_spans(std::vector<Span>& spans) { std::sort(spans.begin(), spans.end()); }

std::size_t occurrence_count(const Payload& payload) {
  if (const auto* p = std::get_if<SpanPayload>(&payload)) return p->spans.size();
  return 1;
}

}  // namespace annotkit
