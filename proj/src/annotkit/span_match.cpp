#include "annotkit/span_match.hpp"

#include <set>

#include "annotkit/error.hpp"

namespace annotkit {

void require_same_coverage(const AnnotationSet& a, const AnnotationSet& b) {
  std::string only_a;
  std::string only_b;
  for (const auto& [id, _] : a.annotations()) {
    if (!b.contains(id)) only_a += " " + id;
  }
  for (const auto& [id, _] : b.annotations()) {
    if (!a.contains(id)) only_b += " " + id;
  }
  if (only_a.empty() && only_b.empty()) return;
  std::string msg = "coverage mismatch";
  if (!only_a.empty()) msg += "; only in " + a.annotator() + ":" + only_a;
  if (!only_b.empty()) msg += "; only in " + b.annotator() + ":" + only_b;
  fail(ErrorCode::validation, msg);
}

namespace {

const std::vector<Span>& spans_of(const Annotation& ann) {
  const auto* p = std::get_if<SpanPayload>(&ann.payload);
  if (p == nullptr) {
    fail(ErrorCode::invalid_argument, "annotation of '" + ann.doc_id + "' is not a span payload");
  }
  return p->spans;
}

}  // namespace

SpanMatch match_spans(const AnnotationSet& gold, const AnnotationSet& pred) {
  require_same_coverage(gold, pred);
  SpanMatch result;
  for (const auto& [id, gold_ann] : gold.annotations()) {
    const auto& gold_spans = spans_of(gold_ann);
    const auto& pred_spans = spans_of(*pred.find(id));
    const std::set<Span> gold_lookup(gold_spans.begin(), gold_spans.end());
    for (const auto& s : gold_spans) {
      ++result.total.gold;
      ++result.per_label[s.label].gold;
    }
    for (const auto& s : pred_spans) {
      ++result.total.predicted;
      auto& label = result.per_label[s.label];
      ++label.predicted;
      if (gold_lookup.count(s) != 0) {
        ++result.total.matched;
        ++label.matched;
      }
    }
  }
  return result;
}

double f1_of(const MatchCounts& counts) {
  const auto denominator = counts.gold + counts.predicted;
  if (denominator == 0) fail(ErrorCode::undefined, "F1 undefined: no spans on either side");
  return 2.0 * static_cast<double>(counts.matched) / static_cast<double>(denominator);
}

}  // namespace annotkit
