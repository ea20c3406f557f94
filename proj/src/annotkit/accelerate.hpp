#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "annotkit/core.hpp"

namespace annotkit {

struct LiteralPattern {
  std::vector<std::string> tokens;
  bool operator==(const LiteralPattern&) const = default;
};

// Matches `prefix` immediately followed by any token of `lexicon`.
struct NegatedPositivePattern {
  std::string prefix;
  std::vector<std::string> lexicon;
  bool operator==(const NegatedPositivePattern&) const = default;
};

using RulePattern = std::variant<LiteralPattern, NegatedPositivePattern>;

struct WeakRule {
  std::string rule_id;
  RulePattern pattern;
  std::string label;
  std::int64_t priority = 0;  // lower is stronger
  bool case_sensitive = false;

  bool operator==(const WeakRule&) const = default;
};

ValidationReport validate_rule(const WeakRule& rule, const LabelSchema& schema);

// Throws Error(validation) naming the first invalid rule.
void validate_rules(const std::vector<WeakRule>& rules, const LabelSchema& schema);

struct RuleMatch {
  std::string rule_id;
  std::size_t start;
  std::size_t end;
};

std::vector<RuleMatch> find_matches(const Document& doc, const WeakRule& rule);

// Returns nullopt when the rules abstain.
std::optional<Annotation> apply_weak_rules(const Document& doc, const std::vector<WeakRule>& rules,
                                           const LabelSchema& schema);

struct Prediction {
  std::string doc_id;
  std::map<std::string, double> scores;  // doc_class
  std::optional<Payload> payload;        // span_label / pair_regress

  bool operator==(const Prediction&) const = default;
};

// Scores must be keyed by schema classes, each in [0, 1], summing to 1 ± 1e-6.
void validate_scores(const Prediction& prediction, const LabelSchema& schema);

// Argmax class, ties going to the class listed first in the schema.
std::string argmax_class(const std::map<std::string, double>& scores, const LabelSchema& schema);

AnnotationSet import_predictions(const std::vector<Prediction>& predictions,
                                 const std::map<std::string, Document>& docs, const LabelSchema& schema);

enum class Strategy { least_confidence, margin, entropy, random };

const char* to_string(Strategy strategy);
Strategy parse_strategy(const std::string& name);

// Most informative first; ties broken by doc_id.
std::vector<std::string> select_active(const std::vector<Prediction>& predictions, Strategy strategy,
                                       std::size_t k, std::uint64_t seed);

}  // namespace annotkit
