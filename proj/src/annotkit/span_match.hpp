#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "annotkit/core.hpp"

namespace annotkit {

struct MatchCounts {
  std::size_t matched = 0;
  std::size_t gold = 0;
  std::size_t predicted = 0;
};

struct SpanMatch {
  MatchCounts total;
  std::map<std::string, MatchCounts> per_label;
};

// Entity-level exact matching on (start, end, label) over documents covered
// by both sets. Both sets must cover the same doc_ids and carry span payloads.
SpanMatch match_spans(const AnnotationSet& gold, const AnnotationSet& pred);

// 2·matched / (gold + predicted); the harmonic mean of precision and recall
// whenever both are defined. Throws Error(undefined) when both counts are 0.
double f1_of(const MatchCounts& counts);

// Throws Error(validation) listing doc_ids present in only one of the sets.
void require_same_coverage(const AnnotationSet& a, const AnnotationSet& b);

}  // namespace annotkit
