#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace annotkit {

enum class TaskKind { doc_class, span_label, pair_regress };

const char* to_string(TaskKind kind);
TaskKind parse_task_kind(const std::string& name);

struct LabelSchema {
  TaskKind task_kind = TaskKind::doc_class;
  std::vector<std::string> classes;  // doc_class / span_label
  double range_lo = 0.0;             // pair_regress
  double range_hi = 0.0;

  bool has_class(const std::string& name) const;
  std::size_t class_index(const std::string& name) const;  // classes.size() if absent

  bool operator==(const LabelSchema&) const = default;
};

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> text_b;  // second sentence for pair_regress
  nlohmann::json meta;                // null or an object

  bool operator==(const Document&) const = default;
};

struct Span {
  std::size_t start = 0;  // code point offset, inclusive
  std::size_t end = 0;    // exclusive
  std::string label;

  auto operator<=>(const Span&) const = default;
};

bool overlaps(const Span& a, const Span& b);

struct ClassPayload {
  std::string value;
  bool operator==(const ClassPayload&) const = default;
};

struct SpanPayload {
  std::vector<Span> spans;
  bool operator==(const SpanPayload&) const = default;
};

struct ScorePayload {
  double value = 0.0;
  bool operator==(const ScorePayload&) const = default;
};

using Payload = std::variant<ClassPayload, SpanPayload, ScorePayload>;

enum class Provenance { human, model, weak, resolved };

const char* to_string(Provenance provenance);
Provenance parse_provenance(const std::string& name);

struct Annotation {
  std::string doc_id;
  std::string annotator;
  Provenance provenance = Provenance::human;
  Payload payload;

  bool operator==(const Annotation&) const = default;
};

// One annotator's annotations, at most one per document.
class AnnotationSet {
 public:
  AnnotationSet() = default;
  explicit AnnotationSet(std::string annotator) : annotator_(std::move(annotator)) {}

  const std::string& annotator() const { return annotator_; }
  const std::map<std::string, Annotation>& annotations() const { return annotations_; }

  // Replaces any existing annotation for the same document.
  void put(Annotation annotation);
  bool erase(const std::string& doc_id);

  const Annotation* find(const std::string& doc_id) const;
  bool contains(const std::string& doc_id) const { return annotations_.count(doc_id) != 0; }
  std::size_t size() const { return annotations_.size(); }
  bool empty() const { return annotations_.empty(); }
  std::vector<std::string> doc_ids() const;

  bool operator==(const AnnotationSet&) const = default;

 private:
  std::string annotator_;
  std::map<std::string, Annotation> annotations_;
};

enum class AdjustmentOp { drop, incorporate, merge };

struct ClassAdjustment {
  AdjustmentOp op = AdjustmentOp::drop;
  std::vector<std::string> sources;
  std::optional<std::string> target;

  bool operator==(const ClassAdjustment&) const = default;
};

const char* to_string(AdjustmentOp op);
AdjustmentOp parse_adjustment_op(const std::string& name);

struct ProjectManifest {
  LabelSchema schema;
  std::vector<std::string> annotators;
  std::int64_t batch_size = 1;
  std::uint64_t seed = 0;
  double plateau_epsilon = 0.01;
  std::int64_t plateau_window = 2;
  double divergence_threshold = 0.1;
  double score_tolerance = 0.0;
  std::vector<std::string> test_doc_ids;
  std::vector<ClassAdjustment> adjustments;

  bool operator==(const ProjectManifest&) const = default;
};

struct Violation {
  std::string field;
  std::string message;

  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

std::string describe(const ValidationReport& report);

ValidationReport validate_schema(const LabelSchema& schema);
ValidationReport validate_document(const Document& doc, const LabelSchema& schema);

// Throws Error(reference) when ann.doc_id does not name `doc`.
ValidationReport validate_annotation(const Annotation& ann, const Document& doc,
                                     const LabelSchema& schema);

ValidationReport validate_manifest(const ProjectManifest& manifest);

// Checks a payload alone, for callers that hold a fragment rather than a
// full annotation (resolutions, predictions).
ValidationReport validate_payload(const Payload& payload, const Document& doc,
                                  const LabelSchema& schema);

void sort_spans(std::vector<Span>& spans);

// Number of labeled occurrences: 1 per class/score payload, 1 per span.
std::size_t occurrence_count(const Payload& payload);

}  // namespace annotkit
