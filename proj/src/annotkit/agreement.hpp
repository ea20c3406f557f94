#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "annotkit/core.hpp"

namespace annotkit {

enum class AgreementMetric { cohen_kappa, fleiss_kappa, pairwise_f1 };

const char* to_string(AgreementMetric metric);

struct AgreementReport {
  AgreementMetric metric = AgreementMetric::cohen_kappa;
  double value = 0.0;
  std::optional<double> observed_agreement;  // κ metrics
  std::optional<double> expected_agreement;  // κ metrics
  std::optional<double> precision;           // pairwise_f1
  std::optional<double> recall;              // pairwise_f1
  std::size_t n_items = 0;
  // κ: one-vs-rest κ per class; F1: per-label F1. Classes for which the
  // per-class value is undefined are left out.
  std::map<std::string, double> per_class;
};

// Two annotators, doc_class. Throws Error(undefined) when the expected
// agreement is 1.
AgreementReport cohen_kappa(const AnnotationSet& set_a, const AnnotationSet& set_b,
                            const LabelSchema& schema);

// Any number ≥ 2 of annotator sets; every covered document must be labeled by
// the same number r ≥ 2 of them.
AgreementReport fleiss_kappa(const std::vector<AnnotationSet>& sets, const LabelSchema& schema);

// Span tasks: `gold` is treated as the reference, `pred` as predictions.
AgreementReport pairwise_f1(const AnnotationSet& gold, const AnnotationSet& pred,
                            const LabelSchema& schema);

// Fleiss' κ from a raw item × category count table (each row summing to r).
struct FleissComponents {
  double observed;
  double expected;
  double kappa;
};
FleissComponents fleiss_from_counts(const std::vector<std::vector<std::size_t>>& counts);

}  // namespace annotkit
