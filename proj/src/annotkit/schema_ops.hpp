#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "annotkit/core.hpp"

namespace annotkit {

struct Corpus {
  LabelSchema schema;
  std::vector<AnnotationSet> sets;

  bool operator==(const Corpus&) const = default;
};

struct ChangeLog {
  std::size_t annotations_touched = 0;
  std::size_t occurrences_relabeled = 0;
  std::size_t occurrences_removed = 0;    // spans, or class labels of documents
  std::size_t annotations_removed = 0;    // doc_class drop returns docs to the unlabeled pool

  bool operator==(const ChangeLog&) const = default;
};

struct AdjustmentResult {
  Corpus corpus;
  ChangeLog log;
};

ValidationReport validate_adjustment(const ClassAdjustment& adjustment, const LabelSchema& schema);

AdjustmentResult apply_adjustment(const Corpus& corpus, const ClassAdjustment& adjustment);

// Errors name the zero-based index of the failing step.
AdjustmentResult replay_adjustments(const Corpus& corpus, const std::vector<ClassAdjustment>& history);

// Total number of labeled occurrences (see occurrence_count).
std::size_t count_occurrences(const Corpus& corpus);

struct GuidelineExample {
  std::string text;
  std::string label;
};

std::string scaffold_guidelines(const LabelSchema& schema, const std::string& task_description,
                                const std::vector<GuidelineExample>& examples);

}  // namespace annotkit
