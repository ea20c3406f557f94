#include "doctest.h"

#include <cmath>

#include "annotkit/error.hpp"
#include "annotkit/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace annotkit;
using namespace annotkit::testing;

TEST_CASE("accuracy") {
  const auto report = accuracy(class_set("G", {"P", "N", "P", "N"}), class_set("M", {"P", "N", "P", "P"}));
  CHECK(report.value == 0.75);
  CHECK(report.n_items == 4);
  CHECK_THROWS_AS(accuracy(class_set("G", {"P", "N"}), class_set("M", {"P"})), Error);
}

TEST_CASE("precision, recall and F1 per class") {
  // Class P: TP = 2, FP = 1, FN = 1.
  const auto gold = class_set("G", {"P", "P", "P", "N", "N"});
  const auto pred = class_set("M", {"P", "P", "N", "P", "N"});
  const auto report = precision_recall_f1(gold, pred, Aggregation::per_class);
  const auto& p = report.per_class.at("P");
  CHECK(p.tp == 2);
  CHECK(p.fp == 1);
  CHECK(p.fn == 1);
  CHECK(*p.precision == doctest::Approx(2.0 / 3.0));
  CHECK(*p.recall == doctest::Approx(2.0 / 3.0));
  CHECK(*p.f1 == doctest::Approx(2.0 / 3.0));
  const auto& n = report.per_class.at("N");
  CHECK(*n.precision == 0.5);
  CHECK(*n.recall == 0.5);
}

TEST_CASE("micro F1 equals accuracy on single-label data") {
  Rng rng(21);
  const std::vector<std::string> labels{"a", "b", "c", "d"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> g, m;
    const auto n = 1 + rng.below(30);
    for (std::size_t i = 0; i < n; ++i) {
      g.push_back(labels[rng.below(4)]);
      m.push_back(labels[rng.below(4)]);
    }
    const auto gold = class_set("G", g);
    const auto pred = class_set("M", m);
    CHECK(precision_recall_f1(gold, pred, Aggregation::micro).value ==
          doctest::Approx(accuracy(gold, pred).value).epsilon(1e-12));
  }
}

TEST_CASE("macro F1 skips classes without a defined F1 and warns") {
  // U is predicted once but never in gold.
  const auto gold = class_set("G", {"P", "N", "P"});
  const auto pred = class_set("M", {"P", "N", "U"});
  const auto report = precision_recall_f1(gold, pred, Aggregation::macro);
  // P: tp 1, fn 1 → F1 2/3.  N: F1 1.
  CHECK(report.value == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0));
  CHECK_FALSE(report.per_class.at("U").recall.has_value());
}

TEST_CASE("entity_f1 shares the span kernel") {
  AnnotationSet gold("G");
  gold.put(span_ann("d", "G", {{0, 3, "S"}, {5, 8, "S"}, {10, 12, "T"}}));
  AnnotationSet pred("M");
  pred.put(span_ann("d", "M", {{0, 3, "S"}, {5, 8, "T"}, {10, 12, "T"}}));
  const auto report = entity_f1(gold, pred);
  CHECK(report.value == doctest::Approx(2.0 / 3.0));
  CHECK(*report.precision == doctest::Approx(2.0 / 3.0));
  CHECK(*report.recall == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("regression metrics") {
  const std::vector<double> gold{1, 2, 3, 4, 5};
  const std::vector<double> linear{2, 4, 6, 8, 10};
  CHECK(pearson(gold, linear).value == doctest::Approx(1.0));
  CHECK(spearman(gold, std::vector<double>{1, 4, 9, 16, 25}).value == doctest::Approx(1.0));
  CHECK(spearman(gold, std::vector<double>{5, 4, 3, 2, 1}).value == doctest::Approx(-1.0));
  // errors 1,2,3,4,5 → mean square 55/5 = 11; errors 5,5 → 25.
  CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{5, -5}).value == 5.0);
  CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{5, 0}).value == doctest::Approx(std::sqrt(12.5)));
  CHECK(average_ranks(std::vector<double>{10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
  CHECK_THROWS_AS(pearson(gold, std::vector<double>{3, 3, 3, 3, 3}), Error);
  CHECK_THROWS_AS(pearson(gold, std::vector<double>{1, 2}), Error);
}

TEST_CASE("property: correlations match oracles") {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x, y;
    const auto n = 3 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid so ties are common.
      x.push_back(static_cast<double>(rng.below(8)) * 0.5);
      y.push_back(static_cast<double>(rng.below(8)) * 0.5);
    }
    CHECK(average_ranks(x) == oracle::average_ranks(x));
    double r = 0.0;
    try {
      r = pearson(x, y).value;
    } catch (const Error&) {
      continue;  // constant input
    }
    CHECK(r == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-9));
    CHECK(spearman(x, y).value == doctest::Approx(oracle::spearman(x, y)).epsilon(1e-9));
  }
}
