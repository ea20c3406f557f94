#include "doctest.h"

#include <set>

#include "annotkit/error.hpp"
#include "annotkit/formats.hpp"
#include "annotkit/merge.hpp"
#include "support.hpp"

using namespace annotkit;
using namespace annotkit::testing;

namespace {

const std::string kJobAd = "Vi söker dig som kan arbeta med avancerade fleroperationsmaskiner i Köping.";

std::vector<Span> spans_in(const Fragment& fragment) {
  if (!fragment) return {};
  return std::get<SpanPayload>(*fragment).spans;
}

std::map<std::string, Document> docs_of(std::initializer_list<Document> docs) {
  std::map<std::string, Document> out;
  for (const auto& d : docs) out.emplace(d.id, d);
  return out;
}

}  // namespace

TEST_CASE("merge_pair on class payloads") {
  const auto schema = class_schema({"POS", "NEG", "NEU"});
  const auto d = doc("d1", "great");
  const auto same = merge_pair(class_ann("d1", "A", "POS"), class_ann("d1", "B", "POS"), d, schema);
  CHECK(same.conflicts.empty());
  REQUIRE(same.agreed);
  CHECK(std::get<ClassPayload>(*same.agreed).value == "POS");

  const auto differ = merge_pair(class_ann("d1", "A", "POS"), class_ann("d1", "B", "NEG"), d, schema);
  CHECK_FALSE(differ.agreed);
  REQUIRE(differ.conflicts.size() == 1);
  CHECK(differ.conflicts[0].kind == ConflictKind::label_mismatch);
  CHECK(std::get<ClassPayload>(*differ.conflicts[0].side_a).value == "POS");
  CHECK(std::get<ClassPayload>(*differ.conflicts[0].side_b).value == "NEG");

  CHECK_THROWS_AS(merge_pair(class_ann("d1", "A", "POS"), class_ann("d2", "B", "POS"), d, schema), Error);
  CHECK_THROWS_AS(merge_pair(class_ann("d1", "A", "POS"), class_ann("d1", "A", "NEG"), d, schema), Error);
}

TEST_CASE("merge_pair on scores honors the tolerance") {
  const auto schema = score_schema(0, 5);
  auto d = doc("p", "a");
  d.text_b = "b";
  CHECK(merge_pair(score_ann("p", "A", 3.0), score_ann("p", "B", 3.0), d, schema).conflicts.empty());
  CHECK(merge_pair(score_ann("p", "A", 3.0), score_ann("p", "B", 3.5), d, schema).conflicts.size() == 1);
  const auto loose = merge_pair(score_ann("p", "A", 3.0), score_ann("p", "B", 3.5), d, schema, {0.5});
  CHECK(loose.conflicts.empty());
  CHECK(std::get<ScorePayload>(*loose.agreed).value == doctest::Approx(3.25));
}

TEST_CASE("merge_pair span boundary disagreement") {
  const auto schema = span_schema({"hard skill", "soft skill"});
  const auto d = doc("d1", std::string(60, 'x'));
  const auto merged = merge_pair(span_ann("d1", "A", {{0, 45, "hard skill"}}),
                                 span_ann("d1", "B", {{10, 45, "hard skill"}}), d, schema);
  CHECK(std::get<SpanPayload>(*merged.agreed).spans.empty());
  REQUIRE(merged.conflicts.size() == 1);
  CHECK(merged.conflicts[0].kind == ConflictKind::span_boundary);
  CHECK(spans_in(merged.conflicts[0].side_a) == std::vector<Span>{{0, 45, "hard skill"}});
  CHECK(spans_in(merged.conflicts[0].side_b) == std::vector<Span>{{10, 45, "hard skill"}});
}

TEST_CASE("merge_pair span taxonomy") {
  const auto schema = span_schema({"hard skill", "soft skill", "place"});
  const auto d = doc("d1", kJobAd);
  // "söker" = [3, 8), "avancerade fleroperationsmaskiner" = [32, 65), "fleroperationsmaskiner" = [43, 65),
  // "Köping" = [68, 74).
  const auto a = span_ann("d1", "A", {{3, 8, "soft skill"}, {32, 65, "hard skill"}, {68, 74, "place"}});
  const auto b = span_ann("d1", "B", {{3, 8, "hard skill"}, {43, 65, "hard skill"}, {68, 74, "place"}, {74, 75, "place"}});
  const auto merged = merge_pair(a, b, d, schema);
  CHECK(std::get<SpanPayload>(*merged.agreed).spans == std::vector<Span>{{68, 74, "place"}});
  REQUIRE(merged.conflicts.size() == 3);
  CHECK(merged.conflicts[0].kind == ConflictKind::span_label);
  CHECK(merged.conflicts[1].kind == ConflictKind::span_boundary);
  CHECK(merged.conflicts[2].kind == ConflictKind::span_presence);
  CHECK_FALSE(merged.conflicts[2].side_a);
  CHECK(spans_in(merged.conflicts[2].side_b) == std::vector<Span>{{74, 75, "place"}});
}

TEST_CASE("one boundary conflict per connected overlap component") {
  const auto schema = span_schema({"S"});
  const auto d = doc("d", std::string(40, 'x'));
  // a: [0,5) [6,10)   b: [3,8)  → one component of three spans.
  const auto merged = merge_pair(span_ann("d", "A", {{0, 5, "S"}, {6, 10, "S"}}), span_ann("d", "B", {{3, 8, "S"}}), d, schema);
  REQUIRE(merged.conflicts.size() == 1);
  CHECK(merged.conflicts[0].kind == ConflictKind::span_boundary);
  CHECK(spans_in(merged.conflicts[0].side_a).size() == 2);
  CHECK(spans_in(merged.conflicts[0].side_b).size() == 1);
}

TEST_CASE("conflict ids do not depend on side order") {
  const auto schema = span_schema({"S", "T"});
  const auto d = doc("d", std::string(30, 'x'));
  const auto a = span_ann("d", "A", {{0, 4, "S"}, {10, 12, "S"}});
  const auto b = span_ann("d", "B", {{0, 4, "T"}, {11, 14, "S"}, {20, 22, "T"}});
  const auto ab = merge_pair(a, b, d, schema);
  const auto ba = merge_pair(b, a, d, schema);
  REQUIRE(ab.conflicts.size() == ba.conflicts.size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < ab.conflicts.size(); ++i) {
    CHECK(ab.conflicts[i].conflict_id == ba.conflicts[i].conflict_id);
    CHECK(ab.conflicts[i].side_a == ba.conflicts[i].side_b);
    ids.insert(ab.conflicts[i].conflict_id);
  }
  CHECK(ids.size() == ab.conflicts.size());
}

TEST_CASE("merge_part coverage and per-document independence") {
  const auto schema = class_schema({"POS", "NEG"});
  std::map<std::string, Document> docs;
  for (int i = 0; i < 5; ++i) docs.emplace("d" + std::to_string(i), doc("d" + std::to_string(i), "text"));
  const auto a = class_set("A", {"POS", "POS", "NEG", "NEG", "POS"});
  const auto b = class_set("B", {"POS", "POS", "NEG", "NEG", "POS"});
  const auto same = merge_part(a, b, docs, schema);
  CHECK(same.size() == 5);
  std::size_t conflicts = 0;
  for (const auto& m : same) conflicts += m.conflicts.size();
  CHECK(conflicts == 0);

  const auto c = class_set("C", {"POS", "POS", "POS", "NEG", "POS"});
  conflicts = 0;
  for (const auto& m : merge_part(a, c, docs, schema)) conflicts += m.conflicts.size();
  CHECK(conflicts == 1);

  auto missing = a;
  missing.erase("d3");
  CHECK_THROWS_WITH_AS(merge_part(missing, b, docs, schema), doctest::Contains("d3"), Error);
}

TEST_CASE("apply_resolutions") {
  const auto schema = class_schema({"POS", "NEG"});
  const auto docs = docs_of({doc("d0", "a"), doc("d1", "b")});
  const auto merged = merge_part(class_set("A", {"POS", "NEG"}), class_set("B", {"POS", "POS"}), docs, schema);

  SUBCASE("vacuous") {
    const auto agreed_only = merge_part(class_set("A", {"POS", "NEG"}), class_set("B", {"POS", "NEG"}), docs, schema);
    const auto out = apply_resolutions(agreed_only, {}, docs, schema);
    CHECK(out.size() == 2);
    CHECK(out.find("d0")->provenance == Provenance::resolved);
  }
  SUBCASE("take_a projects side a") {
    const auto& id = merged[1].conflicts.at(0).conflict_id;
    const auto out = apply_resolutions(merged, {{id, ChoiceKind::take_a, std::nullopt}}, docs, schema);
    CHECK(std::get<ClassPayload>(out.find("d1")->payload).value == "NEG");
  }
  SUBCASE("none returns the document to the unlabeled pool") {
    const auto& id = merged[1].conflicts.at(0).conflict_id;
    const auto out = apply_resolutions(merged, {{id, ChoiceKind::neither, std::nullopt}}, docs, schema);
    CHECK(out.size() == 1);
    CHECK_FALSE(out.contains("d1"));
  }
  SUBCASE("errors") {
    CHECK_THROWS_WITH_AS(apply_resolutions(merged, {}, docs, schema), doctest::Contains("unresolved"), Error);
    CHECK_THROWS_AS(apply_resolutions(merged, {{"c0000", ChoiceKind::take_a, std::nullopt}}, docs, schema), Error);
    const auto& id = merged[1].conflicts.at(0).conflict_id;
    CHECK_THROWS_AS(
        apply_resolutions(merged, {{id, ChoiceKind::custom, Payload{ClassPayload{"MAYBE"}}}}, docs, schema), Error);
  }
}

TEST_CASE("custom span resolution replaces the component") {
  const auto schema = span_schema({"hard skill"});
  const auto docs = docs_of({doc("d1", std::string(60, 'x'))});
  const auto merged = merge_pair(span_ann("d1", "A", {{0, 45, "hard skill"}, {50, 55, "hard skill"}}),
                                 span_ann("d1", "B", {{10, 45, "hard skill"}, {50, 55, "hard skill"}}),
                                 docs.at("d1"), schema);
  REQUIRE(merged.conflicts.size() == 1);
  const Resolution custom{merged.conflicts[0].conflict_id, ChoiceKind::custom,
                          Payload{SpanPayload{{{0, 45, "hard skill"}}}}};
  const auto out = apply_resolutions({merged}, {custom}, docs, schema);
  CHECK(std::get<SpanPayload>(out.find("d1")->payload).spans ==
        std::vector<Span>{{0, 45, "hard skill"}, {50, 55, "hard skill"}});

  const Resolution overlapping{merged.conflicts[0].conflict_id, ChoiceKind::custom,
                               Payload{SpanPayload{{{40, 52, "hard skill"}}}}};
  CHECK_THROWS_WITH_AS(apply_resolutions({merged}, {overlapping}, docs, schema), doctest::Contains("overlapping"), Error);
}

TEST_CASE("merged documents and resolutions survive serialization") {
  const auto schema = span_schema({"S", "T"});
  const auto d = doc("d", std::string(30, 'x'));
  auto merged = merge_pair(span_ann("d", "A", {{0, 4, "S"}}), span_ann("d", "B", {{0, 4, "T"}, {9, 12, "S"}}), d, schema);
  merged.conflicts[0].resolution = Resolution{merged.conflicts[0].conflict_id, ChoiceKind::custom,
                                              Payload{SpanPayload{{{0, 3, "S"}}}}};
  CHECK(formats::merged_from_json(formats::to_json(merged)) == merged);
  const Resolution none{"cX", ChoiceKind::neither, std::nullopt};
  CHECK(formats::to_json(none).dump() == R"({"conflict_id":"cX","choice":"none"})");
}
