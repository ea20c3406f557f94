#include "annotkit/merge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include "annotkit/error.hpp"

namespace annotkit {

const char* to_string(ConflictKind kind) {
  switch (kind) {
    case ConflictKind::label_mismatch: return "label_mismatch";
    case ConflictKind::span_boundary: return "span_boundary";
    case ConflictKind::span_label: return "span_label";
    case ConflictKind::span_presence: return "span_presence";
  }
  return "label_mismatch";
}

ConflictKind parse_conflict_kind(const std::string& name) {
  if (name == "label_mismatch") return ConflictKind::label_mismatch;
  if (name == "span_boundary") return ConflictKind::span_boundary;
  if (name == "span_label") return ConflictKind::span_label;
  if (name == "span_presence") return ConflictKind::span_presence;
  fail(ErrorCode::parse, "unknown conflict kind '" + name + "'");
}

std::string conflict_id_for(const std::string& doc_id, ConflictKind kind,
                            const std::vector<Span>& spans) {
  // Offsets are sorted so the id does not depend on which side a span came from.
  std::vector<std::pair<std::size_t, std::size_t>> offsets;
  for (const auto& s : spans) offsets.emplace_back(s.start, s.end);
  std::sort(offsets.begin(), offsets.end());
  std::ostringstream key;
  key << doc_id << '\x1f' << to_string(kind);
  for (const auto& [start, end] : offsets) key << '\x1f' << start << ':' << end;

  // FNV-1a, 64 bit.
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char ch : key.str()) {
    hash ^= static_cast<unsigned char>(ch);
    hash *= 0x100000001b3ULL;
  }
  char buffer[20];
  std::snprintf(buffer, sizeof buffer, "c%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

Fragment group_fragment(std::vector<Span> spans) {
  if (spans.empty()) return std::nullopt;
  return Payload{SpanPayload{std::move(spans)}};
}

void merge_spans(const std::vector<Span>& a_spans, const std::vector<Span>& b_spans,
                 const std::string& doc_id, MergedDocument& merged) {
  std::vector<Span> agreed;
  std::vector<Span> rest_a;
  std::vector<Span> rest_b;
  {
    const std::set<Span> in_b(b_spans.begin(), b_spans.end());
    const std::set<Span> in_a(a_spans.begin(), a_spans.end());
    for (const auto& s : a_spans) (in_b.count(s) != 0 ? agreed : rest_a).push_back(s);
    for (const auto& s : b_spans) {
      if (in_a.count(s) == 0) rest_b.push_back(s);
    }
  }

  // Nodes 0..|rest_a|-1 are a's spans, the rest are b's. Spans of one side
  // never overlap each other, so every edge crosses sides.
  const auto na = rest_a.size();
  DisjointSets sets(na + rest_b.size());
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < rest_b.size(); ++j) {
      if (overlaps(rest_a[i], rest_b[j])) sets.unite(i, na + j);
    }
  }

  struct Component {
    std::size_t first_start;
    std::vector<Span> a;
    std::vector<Span> b;
  };
  std::map<std::size_t, Component> components;
  for (std::size_t node = 0; node < na + rest_b.size(); ++node) {
    const bool from_a = node < na;
    const Span& span = from_a ? rest_a[node] : rest_b[node - na];
    auto [it, inserted] = components.try_emplace(sets.find(node), Component{span.start, {}, {}});
    auto& component = it->second;
    component.first_start = std::min(component.first_start, span.start);
    (from_a ? component.a : component.b).push_back(span);
  }

  std::vector<Component> ordered;
  for (auto& [_, component] : components) ordered.push_back(std::move(component));
  std::sort(ordered.begin(), ordered.end(), [](const Component& x, const Component& y) {
    return x.first_start < y.first_start;
  });

  for (auto& component : ordered) {
    ConflictKind kind;
    if (component.a.empty() || component.b.empty()) {
      kind = ConflictKind::span_presence;
    } else if (component.a.size() == 1 && component.b.size() == 1 &&
               component.a[0].start == component.b[0].start &&
               component.a[0].end == component.b[0].end) {
      kind = ConflictKind::span_label;
    } else {
      kind = ConflictKind::span_boundary;
    }
    std::vector<Span> all = component.a;
    all.insert(all.end(), component.b.begin(), component.b.end());
    sort_spans(component.a);
    sort_spans(component.b);
    merged.conflicts.push_back(Conflict{conflict_id_for(doc_id, kind, all), doc_id, kind,
                                        group_fragment(std::move(component.a)),
                                        group_fragment(std::move(component.b)), std::nullopt});
  }
  merged.agreed = Payload{SpanPayload{std::move(agreed)}};
}

void require_valid(const Annotation& ann, const Document& doc, const LabelSchema& schema) {
  const auto report = validate_annotation(ann, doc, schema);
  if (!report.empty()) {
    fail(ErrorCode::validation,
         "annotation of '" + ann.doc_id + "' by '" + ann.annotator + "' is invalid: " + describe(report));
  }
}

}  // namespace

MergedDocument merge_pair(const Annotation& a, const Annotation& b, const Document& doc,
                          const LabelSchema& schema, const MergeOptions& options) {
  if (a.doc_id != doc.id || b.doc_id != doc.id) {
    fail(ErrorCode::invalid_argument,
         "mismatched doc ids: '" + a.doc_id + "', '" + b.doc_id + "' vs document '" + doc.id + "'");
  }
  if (a.annotator == b.annotator) {
    fail(ErrorCode::invalid_argument, "both sides annotated by '" + a.annotator + "'");
  }
  require_valid(a, doc, schema);
  require_valid(b, doc, schema);

  MergedDocument merged;
  merged.doc_id = doc.id;
  merged.annotator_a = a.annotator;
  merged.annotator_b = b.annotator;

  switch (schema.task_kind) {
    case TaskKind::doc_class: {
      const auto& ca = std::get<ClassPayload>(a.payload);
      const auto& cb = std::get<ClassPayload>(b.payload);
      if (ca == cb) {
        merged.agreed = a.payload;
      } else {
        merged.conflicts.push_back(Conflict{conflict_id_for(doc.id, ConflictKind::label_mismatch, {}),
                                            doc.id, ConflictKind::label_mismatch, a.payload,
                                            b.payload, std::nullopt});
      }
      break;
    }
    case TaskKind::pair_regress: {
      const double sa = std::get<ScorePayload>(a.payload).value;
      const double sb = std::get<ScorePayload>(b.payload).value;
      if (std::fabs(sa - sb) <= options.score_tolerance) {
        merged.agreed = Payload{ScorePayload{sa == sb ? sa : (sa + sb) / 2.0}};
      } else {
        merged.conflicts.push_back(Conflict{conflict_id_for(doc.id, ConflictKind::label_mismatch, {}),
                                            doc.id, ConflictKind::label_mismatch, a.payload,
                                            b.payload, std::nullopt});
      }
      break;
    }
    case TaskKind::span_label:
      merge_spans(std::get<SpanPayload>(a.payload).spans, std::get<SpanPayload>(b.payload).spans,
                  doc.id, merged);
      break;
  }
  return merged;
}

std::vector<MergedDocument> merge_part(const AnnotationSet& set_a, const AnnotationSet& set_b,
                                       const std::map<std::string, Document>& docs,
                                       const LabelSchema& schema, const MergeOptions& options) {
  std::vector<std::string> missing_a;
  std::vector<std::string> missing_b;
  for (const auto& [id, _] : docs) {
    if (!set_a.contains(id)) missing_a.push_back(id);
    if (!set_b.contains(id)) missing_b.push_back(id);
  }
  std::vector<std::string> extra;
  for (const auto* set : {&set_a, &set_b}) {
    for (const auto& [id, _] : set->annotations()) {
      if (docs.count(id) == 0) extra.push_back(set->annotator() + ":" + id);
    }
  }
  if (!missing_a.empty() || !missing_b.empty() || !extra.empty()) {
    std::ostringstream msg;
    msg << "coverage mismatch";
    auto list = [&msg](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg << "; " << label << ":";
      for (const auto& id : ids) msg << ' ' << id;
    };
    list(("missing in " + set_a.annotator()).c_str(), missing_a);
    list(("missing in " + set_b.annotator()).c_str(), missing_b);
    list("outside the part", extra);
    fail(ErrorCode::validation, msg.str());
  }

  std::vector<MergedDocument> merged;
  merged.reserve(docs.size());
  for (const auto& [id, doc] : docs) {
    merged.push_back(merge_pair(*set_a.find(id), *set_b.find(id), doc, schema, options));
  }
  return merged;
}

MergedDocument pass_through(const Annotation& annotation) {
  MergedDocument merged;
  merged.doc_id = annotation.doc_id;
  merged.annotator_a = annotation.annotator;
  merged.agreed = annotation.payload;
  return merged;
}

ValidationReport check_resolution(const Conflict& conflict, const Resolution& resolution,
                                  const Document& doc, const LabelSchema& schema) {
  ValidationReport report;
  if (resolution.conflict_id != conflict.conflict_id) {
    report.push_back({"conflict_id", "resolution targets a different conflict"});
    return report;
  }
  if (resolution.choice != ChoiceKind::custom) {
    if (resolution.custom) report.push_back({"custom", "custom payload given without custom choice"});
    return report;
  }
  if (!resolution.custom) {
    report.push_back({"custom", "custom choice without payload"});
    return report;
  }
  const bool span_conflict = conflict.kind != ConflictKind::label_mismatch;
  if (span_conflict != std::holds_alternative<SpanPayload>(*resolution.custom)) {
    report.push_back({"custom", "custom payload kind does not fit a " +
                                    std::string(to_string(conflict.kind)) + " conflict"});
    return report;
  }
  return validate_payload(*resolution.custom, doc, schema);
}

AnnotationSet apply_resolutions(const std::vector<MergedDocument>& merged,
                                const std::vector<Resolution>& resolutions,
                                const std::map<std::string, Document>& docs,
                                const LabelSchema& schema, const std::string& annotator) {
  std::map<std::string, const Conflict*> conflicts;
  for (const auto& m : merged) {
    for (const auto& c : m.conflicts) conflicts.emplace(c.conflict_id, &c);
  }

  std::map<std::string, const Resolution*> chosen;
  for (const auto& r : resolutions) {
    const auto it = conflicts.find(r.conflict_id);
    if (it == conflicts.end()) {
      fail(ErrorCode::reference, "resolution for unknown conflict_id " + r.conflict_id);
    }
    if (!chosen.emplace(r.conflict_id, &r).second) {
      fail(ErrorCode::conflict, "more than one resolution for conflict_id " + r.conflict_id);
    }
  }

  std::vector<std::string> unresolved;
  for (const auto& [id, _] : conflicts) {
    if (chosen.count(id) == 0) unresolved.push_back(id);
  }
  if (!unresolved.empty()) {
    std::string msg = "unresolved conflicts:";
    for (const auto& id : unresolved) msg += " " + id;
    fail(ErrorCode::state, msg);
  }

  AnnotationSet out(annotator);
  for (const auto& m : merged) {
    const auto doc_it = docs.find(m.doc_id);
    if (doc_it == docs.end()) fail(ErrorCode::reference, "unknown doc_id '" + m.doc_id + "'");
    const Document& doc = doc_it->second;

    std::optional<Payload> payload = m.agreed;
    for (const auto& c : m.conflicts) {
      const Resolution& r = *chosen.at(c.conflict_id);
      const auto report = check_resolution(c, r, doc, schema);
      if (!report.empty()) {
        fail(ErrorCode::validation, "resolution of " + c.conflict_id + " is invalid: " + describe(report));
      }
      Fragment picked;
      switch (r.choice) {
        case ChoiceKind::take_a: picked = c.side_a; break;
        case ChoiceKind::take_b: picked = c.side_b; break;
        case ChoiceKind::neither: break;
        case ChoiceKind::custom: picked = r.custom; break;
      }
      if (schema.task_kind != TaskKind::span_label) {
        payload = picked;
        continue;
      }
      if (!payload) payload = Payload{SpanPayload{}};
      if (picked) {
        auto& spans = std::get<SpanPayload>(*payload).spans;
        const auto& extra = std::get<SpanPayload>(*picked).spans;
        spans.insert(spans.end(), extra.begin(), extra.end());
      }
    }
    if (!payload) continue;  // class or score resolved to "none": the document stays unlabeled

    if (auto* spans = std::get_if<SpanPayload>(&*payload)) {
      sort_spans(spans->spans);
      for (std::size_t i = 1; i < spans->spans.size(); ++i) {
        if (overlaps(spans->spans[i - 1], spans->spans[i])) {
          fail(ErrorCode::conflict, "resolutions produce overlapping spans in '" + m.doc_id + "'");
        }
      }
    }
    Annotation ann{m.doc_id, annotator, Provenance::resolved, std::move(*payload)};
    const auto report = validate_annotation(ann, doc, schema);
    if (!report.empty()) {
      fail(ErrorCode::validation, "resolved annotation of '" + m.doc_id + "' is invalid: " + describe(report));
    }
    out.put(std::move(ann));
  }
  return out;
}

}  // namespace annotkit
