#include "doctest.h"

#include "annotkit/agreement.hpp"
#include "annotkit/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace annotkit;
using namespace annotkit::testing;

TEST_CASE("cohen_kappa hand-computed fixture") {
  // Marginals 5/5 on both sides, 8 of 10 agree: p_o = 0.8, p_e = 0.5, κ = 0.3 / 0.5.
  const auto schema = class_schema({"P", "N"});
  const auto a = class_set("A", {"P", "P", "P", "P", "P", "N", "N", "N", "N", "N"});
  const auto b = class_set("B", {"P", "P", "P", "P", "N", "N", "N", "N", "N", "P"});
  const auto report = cohen_kappa(a, b, schema);
  CHECK(report.observed_agreement.value() == 0.8);
  CHECK(report.expected_agreement.value() == 0.5);
  CHECK(report.value == 0.6);
  CHECK(report.n_items == 10);
  CHECK(report.value == doctest::Approx(*oracle::cohen_kappa(
                            {"P", "P", "P", "P", "P", "N", "N", "N", "N", "N"},
                            {"P", "P", "P", "P", "N", "N", "N", "N", "N", "P"})));
  CHECK(cohen_kappa(b, a, schema).value == report.value);
}

TEST_CASE("cohen_kappa identity and degenerate marginals") {
  const auto schema = class_schema({"POS", "NEG"});
  const auto a = class_set("A", {"POS", "NEG", "POS"});
  CHECK(cohen_kappa(a, class_set("B", {"POS", "NEG", "POS"}), schema).value == 1.0);
  CHECK_THROWS_WITH_AS(cohen_kappa(class_set("A", {"POS", "POS"}), class_set("B", {"POS", "POS"}), schema),
                       doctest::Contains("undefined"), Error);
  CHECK_THROWS_AS(cohen_kappa(a, class_set("B", {"POS", "NEG"}), schema), Error);
  CHECK_THROWS_AS(cohen_kappa(a, a, span_schema({"POS", "NEG"})), Error);
}

TEST_CASE("cohen_kappa per-class one-vs-rest values") {
  const auto schema = class_schema({"P", "N", "U"});
  const auto report = cohen_kappa(class_set("A", {"P", "N", "U", "P"}), class_set("B", {"P", "N", "N", "P"}), schema);
  CHECK(report.per_class.at("P") == 1.0);
  CHECK(report.per_class.count("U") == 1);  // A uses U once, B never; κ_U = 0
  CHECK(report.per_class.at("U") == doctest::Approx(0.0));
}

TEST_CASE("fleiss_kappa") {
  const auto schema = class_schema({"POS", "NEG", "NEU"});
  const std::vector<std::string> unanimous{"POS", "NEG", "NEU", "POS"};
  const auto report = fleiss_kappa({class_set("A", unanimous), class_set("B", unanimous), class_set("C", unanimous)}, schema);
  CHECK(report.value == 1.0);
  CHECK(report.n_items == 4);

  // Two raters: equals the pair-counting oracle.
  const std::vector<std::string> x{"POS", "POS", "NEG", "NEU", "NEG", "POS"};
  const std::vector<std::string> y{"POS", "NEG", "NEG", "NEU", "POS", "POS"};
  std::vector<std::vector<std::string>> ratings;
  for (std::size_t i = 0; i < x.size(); ++i) ratings.push_back({x[i], y[i]});
  CHECK(fleiss_kappa({class_set("A", x), class_set("B", y)}, schema).value ==
        doctest::Approx(*oracle::fleiss_kappa(ratings)).epsilon(1e-12));

  // Varying raters per item.
  auto short_set = class_set("C", {"POS"});
  CHECK_THROWS_WITH_AS(fleiss_kappa({class_set("A", x), class_set("B", y), short_set}, schema),
                       doctest::Contains("varying raters"), Error);
  CHECK_THROWS_AS(fleiss_kappa({class_set("A", {"POS"}), class_set("B", {"POS"})}, schema), Error);
}

TEST_CASE("pairwise_f1 examples") {
  const auto schema = span_schema({"S"});
  AnnotationSet gold("G");
  gold.put(span_ann("d", "G", {{0, 5, "S"}, {10, 15, "S"}}));
  AnnotationSet pred("P");
  pred.put(span_ann("d", "P", {{0, 5, "S"}}));
  const auto report = pairwise_f1(gold, pred, schema);
  CHECK(report.precision.value() == 1.0);
  CHECK(report.recall.value() == 0.5);
  CHECK(report.value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(pairwise_f1(pred, gold, schema).value == report.value);

  CHECK(pairwise_f1(gold, gold, schema).value == 1.0);

  AnnotationSet disjoint("P");
  disjoint.put(span_ann("d", "P", {{20, 25, "S"}}));
  CHECK(pairwise_f1(gold, disjoint, schema).value == 0.0);

  AnnotationSet empty_a("A");
  empty_a.put(span_ann("d", "A", {}));
  AnnotationSet empty_b("B");
  empty_b.put(span_ann("d", "B", {}));
  CHECK_THROWS_WITH_AS(pairwise_f1(empty_a, empty_b, schema), doctest::Contains("undefined"), Error);
}

TEST_CASE("agreement is invariant under class relabeling") {
  const auto schema = class_schema({"P", "N", "U"});
  const auto relabeled_schema = class_schema({"x", "y", "z"});
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> a, b, ra, rb;
    const std::map<std::string, std::string> bijection{{"P", "z"}, {"N", "x"}, {"U", "y"}};
    for (int i = 0; i < 12; ++i) {
      a.push_back(schema.classes[rng.below(3)]);
      b.push_back(schema.classes[rng.below(3)]);
      ra.push_back(bijection.at(a.back()));
      rb.push_back(bijection.at(b.back()));
    }
    try {
      const double k1 = cohen_kappa(class_set("A", a), class_set("B", b), schema).value;
      const double k2 = cohen_kappa(class_set("A", ra), class_set("B", rb), relabeled_schema).value;
      CHECK(k1 == k2);
      CHECK(k1 >= -1.0);
      CHECK(k1 <= 1.0);
    } catch (const Error&) {
      CHECK_THROWS_AS(cohen_kappa(class_set("A", ra), class_set("B", rb), relabeled_schema), Error);
    }
    const double f1 = fleiss_kappa({class_set("A", a), class_set("B", b)}, schema).value;
    const double f2 = fleiss_kappa({class_set("A", ra), class_set("B", rb)}, relabeled_schema).value;
    CHECK(f1 == doctest::Approx(f2).epsilon(1e-12));
  }
}
