#include "doctest.h"

#include "annotkit/error.hpp"
#include "annotkit/schema_ops.hpp"
#include "support.hpp"

using namespace annotkit;
using namespace annotkit::testing;

namespace {

const ClassAdjustment drop(std::string c) { return {AdjustmentOp::drop, {std::move(c)}, std::nullopt}; }

Corpus random_span_corpus(Rng& rng, const std::vector<std::string>& labels) {
  Corpus corpus{span_schema(labels), {}};
  for (const char* annotator : {"A", "B"}) {
    AnnotationSet set(annotator);
    for (int d = 0; d < 6; ++d) set.put(span_ann("d" + std::to_string(d), annotator, random_spans(rng, 50, labels, 6)));
    corpus.sets.push_back(std::move(set));
  }
  return corpus;
}

std::size_t count_label(const Corpus& corpus, const std::string& label) {
  std::size_t n = 0;
  for (const auto& set : corpus.sets) {
    for (const auto& id : set.doc_ids()) {
      for (const auto& s : std::get<SpanPayload>(set.find(id)->payload).spans) n += s.label == label ? 1 : 0;
    }
  }
  return n;
}

}  // namespace

TEST_CASE("merge and incorporate keep occurrence counts; drop removes exactly the class") {
  Rng rng(2);
  const std::vector<std::string> labels{"a", "b", "c", "d"};
  for (int trial = 0; trial < 100; ++trial) {
    const auto corpus = random_span_corpus(rng, labels);
    const auto total = count_occurrences(corpus);

    const auto merged = apply_adjustment(corpus, {AdjustmentOp::merge, {"a", "b"}, "m"});
    CHECK(count_occurrences(merged.corpus) == total);
    CHECK(count_label(merged.corpus, "m") == count_label(corpus, "a") + count_label(corpus, "b"));
    CHECK(merged.corpus.schema.classes == std::vector<std::string>{"m", "c", "d"});

    const auto incorporated = apply_adjustment(corpus, {AdjustmentOp::incorporate, {"c"}, "d"});
    CHECK(count_occurrences(incorporated.corpus) == total);
    CHECK(incorporated.log.occurrences_relabeled == count_label(corpus, "c"));

    const auto dropped = apply_adjustment(corpus, drop("c"));
    CHECK(count_occurrences(dropped.corpus) == total - count_label(corpus, "c"));
    CHECK(dropped.log.occurrences_removed == count_label(corpus, "c"));
  }
}

TEST_CASE("merge then drop equals dropping the sources; drops commute") {
  Rng rng(6);
  const std::vector<std::string> labels{"a", "b", "c", "d"};
  for (int trial = 0; trial < 100; ++trial) {
    const auto corpus = random_span_corpus(rng, labels);
    const auto via_merge = replay_adjustments(corpus, {{AdjustmentOp::merge, {"a", "b"}, "m"}, drop("m")});
    const auto direct = replay_adjustments(corpus, {drop("a"), drop("b")});
    const auto reversed = replay_adjustments(corpus, {drop("b"), drop("a")});
    CHECK(via_merge.corpus == direct.corpus);
    CHECK(direct.corpus == reversed.corpus);
  }
}

TEST_CASE("doc_class drop returns documents to the unlabeled pool") {
  Corpus corpus{class_schema({"POS", "NEG", "NEU"}), {class_set("A", {"POS", "NEU", "NEG", "NEU"})}};
  const auto result = apply_adjustment(corpus, drop("NEU"));
  CHECK(result.corpus.sets[0].size() == 2);
  CHECK(result.log.annotations_removed == 2);
  CHECK(result.corpus.schema.classes == std::vector<std::string>{"POS", "NEG"});
}

TEST_CASE("invalid adjustments") {
  const auto schema = class_schema({"POS", "NEG"});
  CHECK_FALSE(validate_adjustment(drop("MAYBE"), schema).empty());
  CHECK_FALSE(validate_adjustment({AdjustmentOp::incorporate, {"POS"}, "POS"}, schema).empty());
  CHECK_FALSE(validate_adjustment({AdjustmentOp::merge, {"POS"}, "X"}, schema).empty());
  CHECK_FALSE(validate_adjustment(drop("POS"), class_schema({"POS"})).empty());
  const Corpus corpus{schema, {class_set("A", {"POS"})}};
  CHECK_THROWS_WITH_AS(replay_adjustments(corpus, {drop("NEG"), drop("NEG")}),
                       doctest::Contains("adjustment history step 1"), Error);
}

TEST_CASE("guideline scaffold") {
  const auto md = scaffold_guidelines(class_schema({"POS", "NEG"}), "Rate the review.",
                                      {{"Loved it", "POS"}});
  for (const char* heading : {"## 1. Task description", "## 2. Label descriptions", "## 3. Annotation examples",
                              "## 4. Ambiguous cases"}) {
    CHECK(md.find(heading) != std::string::npos);
  }
  CHECK(md.find("exactly ONE label") != std::string::npos);
  CHECK(md.find("Loved it") != std::string::npos);
  CHECK(md.find("Rate the review.") != std::string::npos);
  const auto spans = scaffold_guidelines(span_schema({"skill"}), "Mark skills.", {});
  CHECK(spans.find("Entity boundaries") != std::string::npos);
}
