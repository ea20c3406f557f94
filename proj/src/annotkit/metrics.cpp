#include "annotkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "annotkit/error.hpp"
#include "annotkit/span_match.hpp"

namespace annotkit {

const char* to_string(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::per_class: return "per_class";
    case Aggregation::micro: return "micro";
    case Aggregation::macro: return "macro";
  }
  return "micro";
}

Aggregation parse_aggregation(const std::string& name) {
  if (name == "per_class") return Aggregation::per_class;
  if (name == "micro") return Aggregation::micro;
  if (name == "macro") return Aggregation::macro;
  fail(ErrorCode::invalid_argument, "unknown aggregation '" + name + "'");
}

namespace {

const std::string& class_value(const Annotation& ann) {
  const auto* p = std::get_if<ClassPayload>(&ann.payload);
  if (p == nullptr) fail(ErrorCode::invalid_argument, "annotation of '" + ann.doc_id + "' is not a class payload");
  return p->value;
}

double ratio(std::size_t num, std::size_t den) {
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassScores scores_from(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassScores s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  if (tp + fp > 0) s.precision = ratio(tp, tp + fp);
  if (tp + fn > 0) s.recall = ratio(tp, tp + fn);
  if (s.precision && s.recall) s.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  return s;
}

void require_lengths(std::span<const double> gold, std::span<const double> pred, std::size_t minimum) {
  if (gold.size() != pred.size()) {
    fail(ErrorCode::invalid_argument, "length mismatch: " + std::to_string(gold.size()) + " vs " +
                                          std::to_string(pred.size()));
  }
  if (gold.size() < minimum) {
    fail(ErrorCode::invalid_argument, "need at least " + std::to_string(minimum) + " values");
  }
}

// Two-pass centered sums; returns nullopt when either side has zero variance.
std::optional<double> correlation(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

EvalReport accuracy(const AnnotationSet& gold, const AnnotationSet& pred) {
  require_same_coverage(gold, pred);
  if (gold.empty()) fail(ErrorCode::invalid_argument, "accuracy needs at least one item");
  std::size_t matches = 0;
  for (const auto& [id, ann] : gold.annotations()) {
    if (class_value(ann) == class_value(*pred.find(id))) ++matches;
  }
  EvalReport report;
  report.metric = "accuracy";
  report.n_items = gold.size();
  report.value = ratio(matches, gold.size());
  return report;
}

EvalReport precision_recall_f1(const AnnotationSet& gold, const AnnotationSet& pred,
                               Aggregation aggregation) {
  require_same_coverage(gold, pred);
  if (gold.empty()) fail(ErrorCode::invalid_argument, "precision/recall need at least one item");

  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts> counts;
  for (const auto& [id, ann] : gold.annotations()) {
    const auto& g = class_value(ann);
    const auto& p = class_value(*pred.find(id));
    if (g == p) {
      ++counts[g].tp;
    } else {
      ++counts[g].fn;
      ++counts[p].fp;
    }
  }

  EvalReport report;
  report.n_items = gold.size();
  Counts pooled;
  double f1_sum = 0.0;
  std::size_t f1_classes = 0;
  for (const auto& [label, c] : counts) {
    const auto scores = scores_from(c.tp, c.fp, c.fn);
    report.per_class[label] = scores;
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    if (!scores.f1) {
      report.undefined_classes.push_back(label);
      continue;
    }
    if (c.tp + c.fn > 0) {
      f1_sum += *scores.f1;
      ++f1_classes;
    }
  }

  if (aggregation == Aggregation::micro) {
    const auto micro = scores_from(pooled.tp, pooled.fp, pooled.fn);
    report.metric = "micro_f1";
    report.precision = micro.precision;
    report.recall = micro.recall;
    report.value = micro.f1.value_or(0.0);
    return report;
  }

  report.metric = aggregation == Aggregation::macro ? "macro_f1" : "per_class_f1";
  report.warning = !report.undefined_classes.empty();
  if (f1_classes == 0) fail(ErrorCode::undefined, "macro F1 undefined: no class has a defined F1");
  report.value = f1_sum / static_cast<double>(f1_classes);
  return report;
}

EvalReport entity_f1(const AnnotationSet& gold, const AnnotationSet& pred) {
  const auto match = match_spans(gold, pred);
  EvalReport report;
  report.metric = "entity_f1";
  report.n_items = gold.size();
  report.value = f1_of(match.total);
  if (match.total.predicted > 0) report.precision = ratio(match.total.matched, match.total.predicted);
  if (match.total.gold > 0) report.recall = ratio(match.total.matched, match.total.gold);
  for (const auto& [label, c] : match.per_label) {
    report.per_class[label] = scores_from(c.matched, c.predicted - c.matched, c.gold - c.matched);
  }
  return report;
}

EvalReport pearson(std::span<const double> gold, std::span<const double> pred) {
  require_lengths(gold, pred, 2);
  const auto r = correlation(gold, pred);
  if (!r) fail(ErrorCode::undefined, "pearson undefined: zero variance");
  EvalReport report;
  report.metric = "pearson";
  report.n_items = gold.size();
  report.value = *r;
  return report;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share the mean of ranks i+1..j+1.
    const double rank = static_cast<double>(i + j + 2) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

EvalReport spearman(std::span<const double> gold, std::span<const double> pred) {
  require_lengths(gold, pred, 2);
  const auto rank_gold = average_ranks(gold);
  const auto rank_pred = average_ranks(pred);
  const auto r = correlation(rank_gold, rank_pred);
  if (!r) fail(ErrorCode::undefined, "spearman undefined: zero rank variance");
  EvalReport report;
  report.metric = "spearman";
  report.n_items = gold.size();
  report.value = *r;
  return report;
}

EvalReport rmse(std::span<const double> gold, std::span<const double> pred) {
  require_lengths(gold, pred, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const double d = pred[i] - gold[i];
    sum += d * d;
  }
  EvalReport report;
  report.metric = "rmse";
  report.n_items = gold.size();
  report.value = std::sqrt(sum / static_cast<double>(gold.size()));
  return report;
}

ScorePairs score_pairs(const AnnotationSet& gold, const AnnotationSet& pred) {
  require_same_coverage(gold, pred);
  ScorePairs pairs;
  for (const auto& [id, ann] : gold.annotations()) {
    const auto* g = std::get_if<ScorePayload>(&ann.payload);
    const auto* p = std::get_if<ScorePayload>(&pred.find(id)->payload);
    if (g == nullptr || p == nullptr) {
      fail(ErrorCode::invalid_argument, "annotation of '" + id + "' is not a score payload");
    }
    pairs.gold.push_back(g->value);
    pairs.pred.push_back(p->value);
  }
  return pairs;
}

}  // namespace annotkit
