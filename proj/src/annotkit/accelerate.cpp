#include "annotkit/accelerate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "annotkit/error.hpp"
#include "annotkit/rng.hpp"
#include "annotkit/text.hpp"

namespace annotkit {

ValidationReport validate_rule(const WeakRule& rule, const LabelSchema& schema) {
  ValidationReport report;
  if (rule.rule_id.empty()) report.push_back({"rule_id", "empty rule_id"});
  if (schema.task_kind == TaskKind::pair_regress) {
    report.push_back({"label", "weak rules need a class or span schema"});
  } else if (!schema.has_class(rule.label)) {
    report.push_back({"label", "unknown class '" + rule.label + "'"});
  }
  auto check_token = [&report](const std::string& token, const char* field) {
    if (token.empty()) {
      report.push_back({field, "empty token"});
      return;
    }
    const auto tokens = text::tokenize(token, false);
    if (tokens.size() != 1 || tokens.front().value != token) {
      report.push_back({field, "'" + token + "' is not a single token"});
    }
  };
  if (const auto* lit = std::get_if<LiteralPattern>(&rule.pattern)) {
    if (lit->tokens.empty()) report.push_back({"pattern", "empty literal"});
    for (const auto& t : lit->tokens) check_token(t, "pattern.tokens");
  } else {
    const auto& neg = std::get<NegatedPositivePattern>(rule.pattern);
    check_token(neg.prefix, "pattern.prefix");
    if (neg.lexicon.empty()) report.push_back({"pattern.lexicon", "empty lexicon"});
    for (const auto& t : neg.lexicon) check_token(t, "pattern.lexicon");
  }
  return report;
}

void validate_rules(const std::vector<WeakRule>& rules, const LabelSchema& schema) {
  std::set<std::string> ids;
  for (const auto& rule : rules) {
    const auto report = validate_rule(rule, schema);
    if (!report.empty()) fail(ErrorCode::validation, "rule '" + rule.rule_id + "': " + describe(report));
    if (!ids.insert(rule.rule_id).second) {
      fail(ErrorCode::validation, "duplicate rule_id '" + rule.rule_id + "'");
    }
  }
}

std::vector<RuleMatch> find_matches(const Document& doc, const WeakRule& rule) {
  const bool fold = !rule.case_sensitive;
  const auto tokens = text::tokenize(doc.text, fold);
  auto norm = [fold](const std::string& s) { return fold ? text::fold_ascii(s) : s; };

  std::vector<RuleMatch> matches;
  if (const auto* lit = std::get_if<LiteralPattern>(&rule.pattern)) {
    std::vector<std::string> wanted;
    for (const auto& t : lit->tokens) wanted.push_back(norm(t));
    if (wanted.empty() || wanted.size() > tokens.size()) return matches;
    for (std::size_t i = 0; i + wanted.size() <= tokens.size(); ++i) {
      bool hit = true;
      for (std::size_t j = 0; j < wanted.size() && hit; ++j) hit = tokens[i + j].value == wanted[j];
      if (hit) matches.push_back({rule.rule_id, tokens[i].start, tokens[i + wanted.size() - 1].end});
    }
  } else {
    const auto& neg = std::get<NegatedPositivePattern>(rule.pattern);
    const auto prefix = norm(neg.prefix);
    std::set<std::string> lexicon;
    for (const auto& w : neg.lexicon) lexicon.insert(norm(w));
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      if (tokens[i].value == prefix && lexicon.count(tokens[i + 1].value) != 0) {
        matches.push_back({rule.rule_id, tokens[i].start, tokens[i + 1].end});
      }
    }
  }
  return matches;
}

std::optional<Annotation> apply_weak_rules(const Document& doc, const std::vector<WeakRule>& rules,
                                           const LabelSchema& schema) {
  validate_rules(rules, schema);

  if (schema.task_kind == TaskKind::doc_class) {
    std::optional<std::int64_t> best;
    std::set<std::string> labels;
    for (const auto& rule : rules) {
      if (find_matches(doc, rule).empty()) continue;
      if (!best || rule.priority < *best) {
        best = rule.priority;
        labels.clear();
      }
      if (rule.priority == *best) labels.insert(rule.label);
    }
    if (labels.size() != 1) return std::nullopt;
    return Annotation{doc.id, "weak", Provenance::weak, ClassPayload{*labels.begin()}};
  }

  struct Candidate {
    Span span;
    std::int64_t priority;
  };
  std::vector<Candidate> candidates;
  {
    // The same region and label from several rules collapses to the strongest.
    std::map<Span, std::int64_t> unique;
    for (const auto& rule : rules) {
      for (const auto& m : find_matches(doc, rule)) {
        const Span span{m.start, m.end, rule.label};
        auto [it, inserted] = unique.emplace(span, rule.priority);
        if (!inserted) it->second = std::min(it->second, rule.priority);
      }
    }
    for (const auto& [span, priority] : unique) candidates.push_back({span, priority});
  }

  // A candidate survives iff every candidate overlapping it is strictly weaker.
  std::vector<Span> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool survives = true;
    for (std::size_t j = 0; j < candidates.size() && survives; ++j) {
      if (i == j || !overlaps(candidates[i].span, candidates[j].span)) continue;
      survives = candidates[j].priority > candidates[i].priority;
    }
    if (survives) kept.push_back(candidates[i].span);
  }
  if (kept.empty()) return std::nullopt;
  sort_spans(kept);
  return Annotation{doc.id, "weak", Provenance::weak, SpanPayload{std::move(kept)}};
}

void validate_scores(const Prediction& prediction, const LabelSchema& schema) {
  if (prediction.scores.empty()) {
    fail(ErrorCode::validation, "prediction for '" + prediction.doc_id + "' has no scores");
  }
  double sum = 0.0;
  for (const auto& [label, p] : prediction.scores) {
    if (!schema.has_class(label)) {
      fail(ErrorCode::validation, "prediction for '" + prediction.doc_id + "' scores unknown class '" + label + "'");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorCode::validation, "prediction for '" + prediction.doc_id + "' has a score outside [0, 1]");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-6) {
    fail(ErrorCode::validation, "scores for '" + prediction.doc_id + "' sum to " + std::to_string(sum) + ", not 1");
  }
}

std::string argmax_class(const std::map<std::string, double>& scores, const LabelSchema& schema) {
  const std::string* best = nullptr;
  double best_score = -1.0;
  for (const auto& name : schema.classes) {
    const auto it = scores.find(name);
    const double p = it == scores.end() ? 0.0 : it->second;
    if (p > best_score) {
      best_score = p;
      best = &name;
    }
  }
  if (best == nullptr) fail(ErrorCode::invalid_argument, "schema has no classes");
  return *best;
}

AnnotationSet import_predictions(const std::vector<Prediction>& predictions,
                                 const std::map<std::string, Document>& docs, const LabelSchema& schema) {
  AnnotationSet out("model");
  for (const auto& pred : predictions) {
    const auto doc = docs.find(pred.doc_id);
    if (doc == docs.end()) fail(ErrorCode::reference, "prediction for unknown doc_id '" + pred.doc_id + "'");
    if (out.contains(pred.doc_id)) {
      fail(ErrorCode::validation, "more than one prediction for '" + pred.doc_id + "'");
    }

    Annotation ann{pred.doc_id, "model", Provenance::model, ClassPayload{}};
    if (schema.task_kind == TaskKind::doc_class) {
      if (pred.payload) {
        fail(ErrorCode::validation, "doc_class prediction for '" + pred.doc_id + "' must carry scores");
      }
      validate_scores(pred, schema);
      ann.payload = ClassPayload{argmax_class(pred.scores, schema)};
    } else {
      if (!pred.payload || !pred.scores.empty()) {
        fail(ErrorCode::validation, "prediction for '" + pred.doc_id + "' must carry a payload");
      }
      ann.payload = *pred.payload;
    }
    const auto report = validate_annotation(ann, doc->second, schema);
    if (!report.empty()) {
      fail(ErrorCode::validation, "prediction for '" + pred.doc_id + "' is invalid: " + describe(report));
    }
    out.put(std::move(ann));
  }
  return out;
}

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::least_confidence: return "least_confidence";
    case Strategy::margin: return "margin";
    case Strategy::entropy: return "entropy";
    case Strategy::random: return "random";
  }
  return "least_confidence";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "least_confidence") return Strategy::least_confidence;
  if (name == "margin") return Strategy::margin;
  if (name == "entropy") return Strategy::entropy;
  if (name == "random") return Strategy::random;
  fail(ErrorCode::invalid_argument, "unknown strategy '" + name + "'");
}

namespace {

std::vector<double> sorted_probabilities(const Prediction& pred) {
  std::vector<double> p;
  for (const auto& [_, v] : pred.scores) p.push_back(v);
  std::sort(p.begin(), p.end(), std::greater<>());
  return p;
}

// Smaller key = more informative.
double informativeness_key(const Prediction& pred, Strategy strategy) {
  const auto p = sorted_probabilities(pred);
  switch (strategy) {
    case Strategy::least_confidence:
      return p.front();
    case Strategy::margin:
      return p.front() - (p.size() > 1 ? p[1] : 0.0);
    case Strategy::entropy: {
      double h = 0.0;
      for (const double v : p) {
        if (v > 0.0) h -= v * std::log(v);
      }
      return -h;
    }
    case Strategy::random:
      break;
  }
  return 0.0;
}

}  // namespace

std::vector<std::string> select_active(const std::vector<Prediction>& predictions, Strategy strategy,
                                       std::size_t k, std::uint64_t seed) {
  if (k < 1) fail(ErrorCode::invalid_argument, "k must be ≥ 1");
  if (predictions.empty()) fail(ErrorCode::invalid_argument, "empty prediction pool");

  std::set<std::string> seen;
  for (const auto& pred : predictions) {
    if (!seen.insert(pred.doc_id).second) {
      fail(ErrorCode::invalid_argument, "duplicate prediction for '" + pred.doc_id + "'");
    }
    if (pred.scores.empty()) {
      fail(ErrorCode::invalid_argument, "active selection needs class scores for '" + pred.doc_id + "'");
    }
    double sum = 0.0;
    for (const auto& [_, v] : pred.scores) {
      if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::validation, "score outside [0, 1] for '" + pred.doc_id + "'");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-6) fail(ErrorCode::validation, "scores for '" + pred.doc_id + "' do not sum to 1");
  }

  const auto n = std::min(k, predictions.size());
  std::vector<std::string> ids;
  if (strategy == Strategy::random) {
    ids.assign(seen.begin(), seen.end());
    Rng rng(seed);
    rng.shuffle(ids);
    ids.resize(n);
    return ids;
  }

  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(predictions.size());
  for (const auto& pred : predictions) ranked.emplace_back(informativeness_key(pred, strategy), pred.doc_id);
  std::sort(ranked.begin(), ranked.end());
  for (std::size_t i = 0; i < n; ++i) ids.push_back(ranked[i].second);
  return ids;
}

}  // namespace annotkit
