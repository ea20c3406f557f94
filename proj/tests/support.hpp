#pragma once

#include <map>
#include <string>
#include <vector>

#include "annotkit/core.hpp"
#include "annotkit/rng.hpp"

namespace annotkit::testing {

inline LabelSchema class_schema(std::vector<std::string> classes) {
  return LabelSchema{TaskKind::doc_class, std::move(classes), 0.0, 0.0};
}

inline LabelSchema span_schema(std::vector<std::string> classes) {
  return LabelSchema{TaskKind::span_label, std::move(classes), 0.0, 0.0};
}

inline LabelSchema score_schema(double lo, double hi) {
  return LabelSchema{TaskKind::pair_regress, {}, lo, hi};
}

inline Document doc(std::string id, std::string text) {
  return Document{std::move(id), std::move(text), std::nullopt, nullptr};
}

inline Annotation class_ann(std::string doc_id, std::string annotator, std::string label) {
  return Annotation{std::move(doc_id), std::move(annotator), Provenance::human, ClassPayload{std::move(label)}};
}

inline Annotation span_ann(std::string doc_id, std::string annotator, std::vector<Span> spans) {
  return Annotation{std::move(doc_id), std::move(annotator), Provenance::human, SpanPayload{std::move(spans)}};
}

inline Annotation score_ann(std::string doc_id, std::string annotator, double score) {
  return Annotation{std::move(doc_id), std::move(annotator), Provenance::human, ScorePayload{score}};
}

// Builds a doc_class set labeling d0, d1, ... with `labels` in order.
inline AnnotationSet class_set(const std::string& annotator, const std::vector<std::string>& labels) {
  AnnotationSet set(annotator);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    set.put(class_ann("d" + std::to_string(i), annotator, labels[i]));
  }
  return set;
}

inline std::string pad_id(std::size_t i) {
  std::string s = std::to_string(i);
  return "d" + std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

inline std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(pad_id(i));
  return ids;
}

// Sorted, non-overlapping spans inside [0, length).
inline std::vector<Span> random_spans(Rng& rng, std::size_t length, const std::vector<std::string>& labels,
                                      std::size_t max_spans) {
  std::vector<Span> spans;
  std::size_t pos = 0;
  const auto count = rng.below(max_spans + 1);
  for (std::size_t i = 0; i < count && pos < length; ++i) {
    const auto gap = rng.below(4);
    const auto start = pos + gap;
    if (start >= length) break;
    const auto max_len = std::min<std::size_t>(6, length - start);
    const auto end = start + 1 + rng.below(max_len);
    spans.push_back(Span{start, end, labels[rng.below(labels.size())]});
    pos = end;
  }
  return spans;
}

// A perturbed copy: each span is kept, relabeled, shifted, or dropped, and a
// few new spans may appear. The result is re-normalized to be non-overlapping.
inline std::vector<Span> perturb_spans(Rng& rng, const std::vector<Span>& base, std::size_t length,
                                       const std::vector<std::string>& labels) {
  std::vector<Span> out;
  for (const auto& s : base) {
    switch (rng.below(5)) {
      case 0: break;  // dropped
      case 1: out.push_back(Span{s.start, s.end, labels[rng.below(labels.size())]}); break;
      case 2: {
        const auto start = s.start > 0 && rng.below(2) == 0 ? s.start - 1 : s.start;
        const auto end = s.end < length && rng.below(2) == 0 ? s.end + 1 : s.end;
        out.push_back(Span{start, end, s.label});
        break;
      }
      default: out.push_back(s); break;
    }
  }
  const auto extra = random_spans(rng, length, labels, 2);
  out.insert(out.end(), extra.begin(), extra.end());
  sort_spans(out);
  std::vector<Span> flat;
  for (const auto& s : out) {
    if (!flat.empty() && overlaps(flat.back(), s)) continue;
    flat.push_back(s);
  }
  return flat;
}

}  // namespace annotkit::testing
