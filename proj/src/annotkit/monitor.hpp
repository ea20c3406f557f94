#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "annotkit/core.hpp"

namespace annotkit {

struct IterationRecord {
  std::int64_t iteration = 1;
  std::int64_t cumulative_train_size = 0;
  std::string metric_name;
  double metric_value = 0.0;
  std::optional<double> agreement_value;
  std::optional<std::string> notes;

  bool operator==(const IterationRecord&) const = default;
};

using LearningCurve = std::vector<IterationRecord>;

// Append-only; iteration must be last + 1 (1 for an empty curve), size must
// strictly grow and the metric name must not change.
LearningCurve record_iteration(LearningCurve curve, IterationRecord record);

struct PlateauStatus {
  bool plateaued = false;
  std::optional<std::int64_t> at_iteration;
};

// Plateaued iff each of the last `window` improvements is < epsilon.
// at_iteration is the iteration reached by the first of those steps.
PlateauStatus detect_plateau(const LearningCurve& curve, double epsilon, std::int64_t window);

using LabelDistribution = std::map<std::string, double>;

// Counts class payloads (doc_class) or spans per label (span_label) across
// all sets and normalizes. Only observed labels appear as keys.
LabelDistribution label_distribution(const std::vector<AnnotationSet>& sets, const LabelSchema& schema);

// Total variation distance; labels missing from one side count as 0.
double divergence(const LabelDistribution& p, const LabelDistribution& q);

enum class SplitStatus { ok, consider_resplit };

const char* to_string(SplitStatus status);

struct RepresentativenessReport {
  SplitStatus status = SplitStatus::ok;
  double divergence = 0.0;
};

RepresentativenessReport check_representativeness(const LabelDistribution& train,
                                                  const LabelDistribution& test, double threshold);

struct LabeledItem {
  std::string doc_id;
  std::string label;  // stratification key
};

struct SplitResult {
  std::vector<std::string> train_ids;  // sorted
  std::vector<std::string> test_ids;   // sorted
  std::string warning;
};

extern const char* const kResplitWarning;

// `classes` lists every stratum that must be non-empty when stratified.
SplitResult resplit(const std::vector<LabeledItem>& pool, const std::vector<std::string>& classes,
                    double test_fraction, std::uint64_t seed, bool stratified);

void write_curve_csv(std::ostream& out, const LearningCurve& curve);
LearningCurve read_curve_csv(std::istream& in);

}  // namespace annotkit
