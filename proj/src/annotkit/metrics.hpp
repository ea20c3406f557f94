#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annotkit/core.hpp"

namespace annotkit {

struct ClassScores {
  std::optional<double> precision;  // unset when TP + FP = 0
  std::optional<double> recall;     // unset when TP + FN = 0
  std::optional<double> f1;         // unset when either of the above is
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalReport {
  std::string metric;
  double value = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::map<std::string, ClassScores> per_class;
  std::size_t n_items = 0;
  // Classes whose F1 is undefined and were left out of a macro average.
  std::vector<std::string> undefined_classes;
  bool warning = false;
};

enum class Aggregation { per_class, micro, macro };

const char* to_string(Aggregation aggregation);
Aggregation parse_aggregation(const std::string& name);

EvalReport accuracy(const AnnotationSet& gold, const AnnotationSet& pred);

// `value` is pooled F1 for micro and the average F1 over classes with gold
// support for macro and per_class; per_class is always populated.
EvalReport precision_recall_f1(const AnnotationSet& gold, const AnnotationSet& pred,
                               Aggregation aggregation);

// Same matching kernel as pairwise_f1.
EvalReport entity_f1(const AnnotationSet& gold, const AnnotationSet& pred);

EvalReport pearson(std::span<const double> gold, std::span<const double> pred);
EvalReport spearman(std::span<const double> gold, std::span<const double> pred);
EvalReport rmse(std::span<const double> gold, std::span<const double> pred);

// Average (fractional) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

struct ScorePairs {
  std::vector<double> gold;
  std::vector<double> pred;
};

// Score payloads of both sets, aligned by doc_id.
ScorePairs score_pairs(const AnnotationSet& gold, const AnnotationSet& pred);

}  // namespace annotkit
