#include "doctest.h"

#include "annotkit/core.hpp"
#include "annotkit/error.hpp"
#include "annotkit/formats.hpp"
#include "annotkit/text.hpp"
#include "support.hpp"

using namespace annotkit;
using namespace annotkit::testing;

namespace {

bool has_message(const ValidationReport& report, const std::string& message) {
  for (const auto& v : report) {
    if (v.message == message) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate_document") {
  const auto schema = class_schema({"POS", "NEG", "NEU"});
  CHECK(validate_document(doc("d1", "fine"), schema).empty());

  const auto empty_id = validate_document(doc("", "x"), schema);
  REQUIRE(empty_id.size() == 1);
  CHECK(empty_id[0].field == "id");
  CHECK(empty_id[0].message == "empty id");

  const auto pair = score_schema(0, 5);
  auto only_a = doc("p1", "A man is playing a guitar.");
  CHECK(has_message(validate_document(only_a, pair), "missing text_b"));
  only_a.text_b = "A man plays the guitar.";
  CHECK(validate_document(only_a, pair).empty());

  CHECK(has_message(validate_document(doc("d2", ""), schema), "empty text"));
}

TEST_CASE("validate_annotation examples") {
  const auto sentiment = class_schema({"POS", "NEG", "NEU"});
  const auto d = doc("d1", "It was even more efficient than I had imagined");
  CHECK(validate_annotation(class_ann("d1", "A", "POS"), d, sentiment).empty());
  CHECK(has_message(validate_annotation(class_ann("d1", "A", "GOOD"), d, sentiment), "unknown class 'GOOD'"));

  const auto skills = span_schema({"skill"});
  const auto inverted = validate_annotation(span_ann("d1", "A", {{5, 3, "skill"}}), d, skills);
  CHECK(has_message(inverted, "start ≥ end"));

  auto pair_doc = doc("p1", "A plane is taking off.");
  pair_doc.text_b = "An air plane is taking off.";
  const auto similarity = score_schema(0, 5);
  CHECK(has_message(validate_annotation(score_ann("p1", "A", 6.2), pair_doc, similarity), "score out of range"));
  CHECK(validate_annotation(score_ann("p1", "A", 5.0), pair_doc, similarity).empty());

  // Payload must match the task kind.
  CHECK_FALSE(validate_annotation(class_ann("d1", "A", "skill"), d, skills).empty());

  // Referential breakage is an error, not a report entry.
  CHECK_THROWS_AS(validate_annotation(class_ann("d9", "A", "POS"), d, sentiment), Error);
}

TEST_CASE("span checks: bounds, overlap, order") {
  const auto schema = span_schema({"S", "T"});
  const auto d = doc("d", "0123456789");  // 10 code points
  CHECK(validate_annotation(span_ann("d", "A", {{0, 3, "S"}, {3, 10, "T"}}), d, schema).empty());
  CHECK(has_message(validate_annotation(span_ann("d", "A", {{0, 11, "S"}}), d, schema), "end beyond text length"));
  CHECK(has_message(validate_annotation(span_ann("d", "A", {{0, 5, "S"}, {4, 6, "T"}}), d, schema), "spans overlap"));
  CHECK(has_message(validate_annotation(span_ann("d", "A", {{4, 6, "S"}, {0, 2, "T"}}), d, schema),
                    "spans not sorted by start"));
}

TEST_CASE("offsets count code points") {
  const std::string text = "avancerade fleroperationsmaskiner på Köping";
  CHECK(text::length(text) == 43);
  CHECK(text::slice(text, 37, 43) == "Köping");
  const auto schema = span_schema({"place"});
  const auto d = doc("d", text);
  CHECK(validate_annotation(span_ann("d", "A", {{37, 43, "place"}}), d, schema).empty());
  CHECK_FALSE(validate_annotation(span_ann("d", "A", {{37, 44, "place"}}), d, schema).empty());
}

TEST_CASE("validate_schema and manifest") {
  CHECK(validate_schema(class_schema({"a", "b"})).empty());
  CHECK_FALSE(validate_schema(class_schema({})).empty());
  CHECK_FALSE(validate_schema(class_schema({"a", "a"})).empty());
  CHECK_FALSE(validate_schema(score_schema(5, 0)).empty());

  ProjectManifest m;
  m.schema = class_schema({"POS", "NEG"});
  m.annotators = {"A", "B"};
  m.batch_size = 10;
  CHECK(validate_manifest(m).empty());
  m.annotators.clear();
  CHECK_FALSE(validate_manifest(m).empty());
  m.annotators = {"A", "resolved"};
  CHECK_FALSE(validate_manifest(m).empty());
  m.annotators = {"A"};
  m.batch_size = 0;
  CHECK_FALSE(validate_manifest(m).empty());
}

TEST_CASE("AnnotationSet replaces per document and rejects foreign annotators") {
  AnnotationSet set("A");
  set.put(class_ann("d1", "A", "POS"));
  set.put(class_ann("d1", "A", "NEG"));
  CHECK(set.size() == 1);
  CHECK(std::get<ClassPayload>(set.find("d1")->payload).value == "NEG");
  CHECK_THROWS_AS(set.put(class_ann("d2", "B", "POS")), Error);
}

TEST_CASE("property: random valid payloads validate; single mutations do not") {
  Rng rng(11);
  const std::vector<std::string> labels{"hard skill", "soft skill", "tool"};
  const auto schema = span_schema(labels);
  for (int trial = 0; trial < 500; ++trial) {
    const auto length = 5 + rng.below(60);
    const auto d = doc("d", std::string(length, 'x'));
    auto spans = random_spans(rng, length, labels, 6);
    const auto valid = span_ann("d", "A", spans);
    REQUIRE(validate_annotation(valid, d, schema).empty());

    // Sorting an accepted payload is a fixed point.
    auto sorted = spans;
    sort_spans(sorted);
    CHECK(sorted == spans);

    if (spans.empty()) continue;
    const auto i = rng.below(spans.size());
    auto mutated = spans;
    switch (rng.below(4)) {
      case 0: mutated[i].end = mutated[i].start; break;
      case 1: mutated[i].end = length + 1 + rng.below(3); break;
      case 2: mutated[i].label = "unknown"; break;
      default:
        mutated.push_back(spans[i]);  // duplicate overlaps itself
        sort_spans(mutated);
        break;
    }
    CHECK_FALSE(validate_annotation(span_ann("d", "A", mutated), d, schema).empty());
  }

  const auto scores = score_schema(0, 5);
  auto pair = doc("p", "a");
  pair.text_b = "b";
  for (int trial = 0; trial < 200; ++trial) {
    const double v = rng.unit() * 5.0;
    CHECK(validate_annotation(score_ann("p", "A", v), pair, scores).empty());
    CHECK_FALSE(validate_annotation(score_ann("p", "A", 5.0 + 1e-9 + rng.unit()), pair, scores).empty());
    CHECK_FALSE(validate_annotation(score_ann("p", "A", -1e-9 - rng.unit()), pair, scores).empty());
  }
}

TEST_CASE("property: serialize then parse is the identity") {
  Rng rng(5);
  const std::vector<std::string> labels{"S", "T"};
  for (int trial = 0; trial < 200; ++trial) {
    Document d = doc("doc-" + std::to_string(trial), "text ✓ " + std::to_string(rng.below(1000)));
    if (trial % 3 == 0) d.text_b = "second";
    if (trial % 4 == 0) d.meta = nlohmann::json{{"source", "reviews"}, {"year", 2014 + trial % 5}};
    CHECK(formats::document_from_json(formats::to_json(d)) == d);

    Annotation a = trial % 3 == 0   ? score_ann(d.id, "A", rng.unit() * 5.0)
                   : trial % 3 == 1 ? class_ann(d.id, "B", labels[rng.below(2)])
                                    : span_ann(d.id, "C", random_spans(rng, 40, labels, 5));
    a.provenance = static_cast<Provenance>(rng.below(4));
    const auto line = formats::dump_line(formats::to_json(a));
    CHECK(formats::annotation_from_json(formats::Json::parse(line)) == a);
  }

  ProjectManifest m;
  m.schema = score_schema(0, 5);
  m.annotators = {"A", "B", "C"};
  m.batch_size = 12;
  m.seed = 18446744073709551615ULL;
  m.plateau_epsilon = 0.005;
  m.test_doc_ids = {"d1", "d2"};
  m.adjustments.push_back(ClassAdjustment{AdjustmentOp::merge, {"a", "b"}, "m"});
  m.adjustments.push_back(ClassAdjustment{AdjustmentOp::drop, {"c"}, std::nullopt});
  CHECK(formats::manifest_from_json(formats::Json::parse(formats::to_json(m).dump())) == m);
}

TEST_CASE("formats reject unknown fields") {
  using formats::Json;
  CHECK_THROWS_AS(formats::document_from_json(Json::parse(R"({"id":"d","text":"t","extra":1})")), Error);
  CHECK_THROWS_AS(formats::annotation_from_json(Json::parse(
                      R"({"doc_id":"d","annotator":"A","provenance":"human","payload":{"kind":"class","value":"P","x":0}})")),
                  Error);
  CHECK_THROWS_AS(formats::payload_from_json(Json::parse(R"({"kind":"spans","spans":[{"start":-1,"end":2,"label":"S"}]})")),
                  Error);
}
