#include "annotkit/agreement.hpp"

#include <algorithm>

#include "annotkit/error.hpp"
#include "annotkit/span_match.hpp"

namespace annotkit {

const char* to_string(AgreementMetric metric) {
  switch (metric) {
    case AgreementMetric::cohen_kappa: return "cohen_kappa";
    case AgreementMetric::fleiss_kappa: return "fleiss_kappa";
    case AgreementMetric::pairwise_f1: return "pairwise_f1";
  }
  return "cohen_kappa";
}

namespace {

void require_kind(const LabelSchema& schema, TaskKind kind, const char* metric) {
  if (schema.task_kind != kind) {
    fail(ErrorCode::invalid_argument,
         std::string(metric) + " requires task_kind " + to_string(kind) + ", got " +
             to_string(schema.task_kind));
  }
}

std::size_t class_of(const Annotation& ann, const LabelSchema& schema) {
  const auto* p = std::get_if<ClassPayload>(&ann.payload);
  if (p == nullptr) fail(ErrorCode::invalid_argument, "annotation of '" + ann.doc_id + "' is not a class payload");
  const auto index = schema.class_index(p->value);
  if (index == schema.classes.size()) {
    fail(ErrorCode::validation, "annotation of '" + ann.doc_id + "' uses unknown class '" + p->value + "'");
  }
  return index;
}

// (agree·n − Σ ca·cb) / (n² − Σ ca·cb) evaluated in integers; the quotient is
// then rounded once, so exact fractions like 30/50 come out as the nearest double.
double kappa_from_counts(__int128 agree, __int128 n, __int128 chance) {
  const __int128 numerator = agree * n - chance;
  const __int128 denominator = n * n - chance;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace

AgreementReport cohen_kappa(const AnnotationSet& set_a, const AnnotationSet& set_b,
                            const LabelSchema& schema) {
  require_kind(schema, TaskKind::doc_class, "cohen_kappa");
  require_same_coverage(set_a, set_b);
  if (set_a.empty()) fail(ErrorCode::invalid_argument, "cohen_kappa needs at least one item");

  const auto k = schema.classes.size();
  std::vector<std::size_t> label_a;
  std::vector<std::size_t> label_b;
  for (const auto& [id, ann] : set_a.annotations()) {
    label_a.push_back(class_of(ann, schema));
    label_b.push_back(class_of(*set_b.find(id), schema));
  }
  const auto n = label_a.size();

  std::vector<std::size_t> marginal_a(k, 0);
  std::vector<std::size_t> marginal_b(k, 0);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ++marginal_a[label_a[i]];
    ++marginal_b[label_b[i]];
    if (label_a[i] == label_b[i]) ++agree;
  }
  __int128 chance = 0;
  for (std::size_t c = 0; c < k; ++c) chance += static_cast<__int128>(marginal_a[c]) * marginal_b[c];

  const __int128 n2 = static_cast<__int128>(n) * n;
  if (chance == n2) fail(ErrorCode::undefined, "κ undefined (degenerate marginals)");

  AgreementReport report;
  report.metric = AgreementMetric::cohen_kappa;
  report.n_items = n;
  report.observed_agreement = static_cast<double>(agree) / static_cast<double>(n);
  report.expected_agreement = static_cast<double>(chance) / static_cast<double>(n2);
  report.value = std::clamp(kappa_from_counts(agree, n, chance), -1.0, 1.0);

  for (std::size_t c = 0; c < k; ++c) {
    std::size_t agree_c = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((label_a[i] == c) == (label_b[i] == c)) ++agree_c;
    }
    const __int128 chance_c = static_cast<__int128>(marginal_a[c]) * marginal_b[c] +
                              static_cast<__int128>(n - marginal_a[c]) * (n - marginal_b[c]);
    if (chance_c == n2) continue;
    report.per_class[schema.classes[c]] = std::clamp(kappa_from_counts(agree_c, n, chance_c), -1.0, 1.0);
  }
  return report;
}

FleissComponents fleiss_from_counts(const std::vector<std::vector<std::size_t>>& counts) {
  if (counts.empty()) fail(ErrorCode::invalid_argument, "fleiss_kappa needs at least one item");
  const auto k = counts.front().size();
  std::size_t raters = 0;
  for (auto c : counts.front()) raters += c;
  if (raters < 2) fail(ErrorCode::invalid_argument, "fleiss_kappa needs ≥ 2 raters per item");

  const auto n_items = static_cast<double>(counts.size());
  const auto r = static_cast<double>(raters);
  std::vector<double> category_totals(k, 0.0);
  double observed_sum = 0.0;
  for (const auto& row : counts) {
    if (row.size() != k) fail(ErrorCode::invalid_argument, "ragged count table");
    std::size_t row_total = 0;
    double squares = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row_total += row[j];
      squares += static_cast<double>(row[j]) * static_cast<double>(row[j]);
      category_totals[j] += static_cast<double>(row[j]);
    }
    if (row_total != raters) fail(ErrorCode::invalid_argument, "varying number of raters per item");
    observed_sum += (squares - r) / (r * (r - 1.0));
  }
  const double observed = observed_sum / n_items;
  double expected = 0.0;
  for (const double total : category_totals) {
    const double p = total / (n_items * r);
    expected += p * p;
  }
  if (expected >= 1.0) fail(ErrorCode::undefined, "κ undefined (degenerate marginals)");
  return {observed, expected, (observed - expected) / (1.0 - expected)};
}

AgreementReport fleiss_kappa(const std::vector<AnnotationSet>& sets, const LabelSchema& schema) {
  require_kind(schema, TaskKind::doc_class, "fleiss_kappa");
  if (sets.size() < 2) fail(ErrorCode::invalid_argument, "fleiss_kappa needs ≥ 2 annotation sets");

  const auto k = schema.classes.size();
  std::map<std::string, std::vector<std::size_t>> table;
  for (const auto& set : sets) {
    for (const auto& [id, ann] : set.annotations()) {
      auto [it, _] = table.try_emplace(id, std::vector<std::size_t>(k, 0));
      ++it->second[class_of(ann, schema)];
    }
  }
  if (table.empty()) fail(ErrorCode::invalid_argument, "fleiss_kappa needs at least one item");

  std::vector<std::vector<std::size_t>> counts;
  std::size_t raters = 0;
  for (const auto& [id, row] : table) {
    std::size_t total = 0;
    for (auto c : row) total += c;
    if (raters == 0) raters = total;
    if (total != raters) {
      fail(ErrorCode::invalid_argument, "varying raters per item: '" + id + "' has " +
                                            std::to_string(total) + ", expected " + std::to_string(raters));
    }
    counts.push_back(row);
  }
  if (raters < 2) fail(ErrorCode::invalid_argument, "every item needs ≥ 2 raters");

  const auto components = fleiss_from_counts(counts);
  AgreementReport report;
  report.metric = AgreementMetric::fleiss_kappa;
  report.n_items = counts.size();
  report.observed_agreement = components.observed;
  report.expected_agreement = components.expected;
  report.value = std::clamp(components.kappa, -1.0, 1.0);

  const double n = static_cast<double>(counts.size());
  const double r = static_cast<double>(raters);
  for (std::size_t j = 0; j < k; ++j) {
    double total = 0.0;
    double disagreement = 0.0;
    for (const auto& row : counts) {
      const double c = static_cast<double>(row[j]);
      total += c;
      disagreement += c * (r - c);
    }
    const double p = total / (n * r);
    if (p <= 0.0 || p >= 1.0) continue;
    report.per_class[schema.classes[j]] = 1.0 - disagreement / (n * r * (r - 1.0) * p * (1.0 - p));
  }
  return report;
}

AgreementReport pairwise_f1(const AnnotationSet& gold, const AnnotationSet& pred,
                            const LabelSchema& schema) {
  require_kind(schema, TaskKind::span_label, "pairwise_f1");
  const auto match = match_spans(gold, pred);

  AgreementReport report;
  report.metric = AgreementMetric::pairwise_f1;
  report.n_items = gold.size();
  report.value = f1_of(match.total);
  if (match.total.predicted > 0) {
    report.precision = static_cast<double>(match.total.matched) / static_cast<double>(match.total.predicted);
  }
  if (match.total.gold > 0) {
    report.recall = static_cast<double>(match.total.matched) / static_cast<double>(match.total.gold);
  }
  for (const auto& [label, counts] : match.per_label) report.per_class[label] = f1_of(counts);
  return report;
}

}  // namespace annotkit
