#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "annotkit/core.hpp"

namespace annotkit {

enum class ConflictKind { label_mismatch, span_boundary, span_label, span_presence };

const char* to_string(ConflictKind kind);
ConflictKind parse_conflict_kind(const std::string& name);

// A conflict side is a payload fragment; span_presence leaves one side empty.
using Fragment = std::optional<Payload>;

enum class ChoiceKind { take_a, take_b, neither, custom };

struct Resolution {
  std::string conflict_id;
  ChoiceKind choice = ChoiceKind::take_a;
  std::optional<Payload> custom;  // set iff choice == custom

  bool operator==(const Resolution&) const = default;
};

struct Conflict {
  std::string conflict_id;
  std::string doc_id;
  ConflictKind kind = ConflictKind::label_mismatch;
  Fragment side_a;
  Fragment side_b;
  std::optional<Resolution> resolution;

  bool operator==(const Conflict&) const = default;
};

struct MergedDocument {
  std::string doc_id;
  std::string annotator_a;
  std::string annotator_b;
  // Spans tasks always carry a (possibly empty) span payload here; class and
  // score tasks carry a payload only when both sides agree.
  std::optional<Payload> agreed;
  std::vector<Conflict> conflicts;

  bool operator==(const MergedDocument&) const = default;
};

struct MergeOptions {
  double score_tolerance = 0.0;
};

MergedDocument merge_pair(const Annotation& a, const Annotation& b, const Document& doc,
                          const LabelSchema& schema, const MergeOptions& options = {});

// `docs` are the part's documents, keyed by id.
std::vector<MergedDocument> merge_part(const AnnotationSet& set_a, const AnnotationSet& set_b,
                                       const std::map<std::string, Document>& docs,
                                       const LabelSchema& schema, const MergeOptions& options = {});

// A single-annotator part has nothing to disagree with; every payload becomes agreed.
MergedDocument pass_through(const Annotation& annotation);

// Checks that `resolution` may be applied to `conflict`; empty when fine.
ValidationReport check_resolution(const Conflict& conflict, const Resolution& resolution,
                                  const Document& doc, const LabelSchema& schema);

AnnotationSet apply_resolutions(const std::vector<MergedDocument>& merged,
                                const std::vector<Resolution>& resolutions,
                                const std::map<std::string, Document>& docs,
                                const LabelSchema& schema,
                                const std::string& annotator = "resolved");

std::string conflict_id_for(const std::string& doc_id, ConflictKind kind,
                            const std::vector<Span>& spans);

}  // namespace annotkit
