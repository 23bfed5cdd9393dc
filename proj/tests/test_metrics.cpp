#include <catch2/catch_amalgamated.hpp>

#include "driftbench/metrics.hpp"
#include "driftbench/rng.hpp"

using namespace driftbench;

TEST_CASE("confusion matrix tallies", "[metrics]") {
  SECTION("all malware, all caught") {
    const std::vector<int> ones(7, 1);
    const auto cm = confusion(ones, ones);
    CHECK(cm == ConfusionMatrix{7, 0, 0, 0});
  }
  SECTION("inverting predictions swaps tp<->fn and tn<->fp") {
    const std::vector<int> actual = {1, 1, 0, 0, 1, 0};
    const std::vector<int> pred = {1, 0, 0, 1, 1, 0};
    std::vector<int> inverted;
    for (int p : pred) inverted.push_back(1 - p);
    const auto cm = confusion(actual, pred);
    const auto cm2 = confusion(actual, inverted);
    CHECK(cm.tp == cm2.fn);
    CHECK(cm.fn == cm2.tp);
    CHECK(cm.fp == cm2.tn);
    CHECK(cm.tn == cm2.fp);
  }
  SECTION("random fixture matches an element-wise tally") {
    Rng rng(21);
    std::vector<int> actual, pred;
    for (int i = 0; i < 20; ++i) {
      actual.push_back(static_cast<int>(rng.next_below(2)));
      pred.push_back(static_cast<int>(rng.next_below(2)));
    }
    std::int64_t tp = 0, fn = 0, fp = 0, tn = 0;
    for (int i = 0; i < 20; ++i) {
      if (actual[i] == 1 && pred[i] == 1) ++tp;
      if (actual[i] == 1 && pred[i] == 0) ++fn;
      if (actual[i] == 0 && pred[i] == 1) ++fp;
      if (actual[i] == 0 && pred[i] == 0) ++tn;
    }
    CHECK(confusion(actual, pred) == ConfusionMatrix{tp, fn, fp, tn});
  }
  SECTION("length mismatch") {
    const std::vector<int> a = {1};
    const std::vector<int> b = {1, 0};
    CHECK_THROWS_AS(confusion(a, b), Error);
  }
}

TEST_CASE("derived metrics", "[metrics]") {
  SECTION("worked example") {
    const auto m = compute_metrics(ConfusionMatrix{95, 5, 3, 97});
    CHECK_THAT(m.precision, Catch::Matchers::WithinAbs(95.0 / 98.0, 1e-12));
    CHECK_THAT(m.recall, Catch::Matchers::WithinAbs(0.95, 1e-12));
    CHECK_THAT(m.f1, Catch::Matchers::WithinAbs(
                         2.0 * (95.0 / 98.0) * 0.95 / (95.0 / 98.0 + 0.95),
                         1e-12));
    CHECK_THAT(m.accuracy, Catch::Matchers::WithinAbs(0.96, 1e-12));
    CHECK_THAT(m.fnr, Catch::Matchers::WithinAbs(0.05, 1e-12));
    CHECK_THAT(m.fpr, Catch::Matchers::WithinAbs(0.03, 1e-12));
  }
  SECTION("perfect classifier") {
    const auto m = compute_metrics(ConfusionMatrix{10, 0, 0, 10});
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
  SECTION("0/0 convention: zero with flag") {
    const auto m = compute_metrics(ConfusionMatrix{0, 4, 0, 6});
    CHECK(m.precision == 0.0);
    CHECK(m.precision_undefined);
    CHECK(m.recall == 0.0);
    CHECK_FALSE(m.recall_undefined);
    CHECK(m.f1 == 0.0);
    CHECK(m.f1_undefined);
  }
  SECTION("empty matrix is an error") {
    CHECK_THROWS_AS(compute_metrics(ConfusionMatrix{}), Error);
  }
  SECTION("recall + fnr = 1 when defined") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      ConfusionMatrix cm{1 + static_cast<std::int64_t>(rng.next_below(50)),
                         static_cast<std::int64_t>(rng.next_below(50)),
                         static_cast<std::int64_t>(rng.next_below(50)),
                         1 + static_cast<std::int64_t>(rng.next_below(50))};
      const auto m = compute_metrics(cm);
      CHECK_THAT(m.recall + m.fnr, Catch::Matchers::WithinAbs(1.0, 1e-12));
      CHECK_THAT(m.fpr, Catch::Matchers::WithinAbs(
                            static_cast<double>(cm.fp) /
                                static_cast<double>(cm.fp + cm.tn),
                            1e-12));
    }
  }
  SECTION("f1 is scale invariant") {
    const ConfusionMatrix cm{9, 3, 2, 6};
    const auto m1 = compute_metrics(cm);
    const auto m5 = compute_metrics(
        ConfusionMatrix{cm.tp * 5, cm.fn * 5, cm.fp * 5, cm.tn * 5});
    CHECK_THAT(m1.f1, Catch::Matchers::WithinAbs(m5.f1, 1e-12));
  }
}

TEST_CASE("aggregation is an unweighted mean", "[metrics]") {
  MetricRecord a;
  a.f1 = 0.8;
  MetricRecord b;
  b.f1 = 0.9;
  const std::vector<MetricRecord> periods = {a, b};
  const auto avg = aggregate(periods);
  CHECK_THAT(avg.f1, Catch::Matchers::WithinAbs(0.85, 1e-12));
  CHECK(format_percent(avg.f1) == "85.00");

  SECTION("single period is identity") {
    const std::vector<MetricRecord> one = {a};
    CHECK(aggregate(one).f1 == a.f1);
  }
  SECTION("empty input is an error") {
    const std::vector<MetricRecord> none;
    CHECK_THROWS_AS(aggregate(none), Error);
  }
  SECTION("matches the summation oracle on a random trace") {
    Rng rng(9);
    std::vector<MetricRecord> trace;
    double sum_f1 = 0.0, sum_fnr = 0.0;
    for (int i = 0; i < 12; ++i) {
      MetricRecord m;
      m.f1 = rng.next_double();
      m.fnr = rng.next_double();
      sum_f1 += m.f1;
      sum_fnr += m.fnr;
      trace.push_back(m);
    }
    const auto avg = aggregate(trace);
    CHECK_THAT(avg.f1, Catch::Matchers::WithinAbs(sum_f1 / 12.0, 1e-12));
    CHECK_THAT(avg.fnr, Catch::Matchers::WithinAbs(sum_fnr / 12.0, 1e-12));
  }
}

TEST_CASE("compute_metrics over confusion equals direct definitions",
          "[metrics]") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<int> actual, pred;
    const std::size_t n = 5 + rng.next_below(60);
    for (std::size_t i = 0; i < n; ++i) {
      actual.push_back(static_cast<int>(rng.next_below(2)));
      pred.push_back(static_cast<int>(rng.next_below(2)));
    }
    const auto cm = confusion(actual, pred);
    const auto m = compute_metrics(cm);
    double tp = 0, fn = 0, fp = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tp += actual[i] == 1 && pred[i] == 1;
      fn += actual[i] == 1 && pred[i] == 0;
      fp += actual[i] == 0 && pred[i] == 1;
      tn += actual[i] == 0 && pred[i] == 0;
    }
    if (tp + fp > 0)
      CHECK_THAT(m.precision,
                 Catch::Matchers::WithinAbs(tp / (tp + fp), 1e-12));
    if (tp + fn > 0)
      CHECK_THAT(m.recall, Catch::Matchers::WithinAbs(tp / (tp + fn), 1e-12));
    CHECK_THAT(m.accuracy, Catch::Matchers::WithinAbs(
                               (tp + tn) / static_cast<double>(n), 1e-12));
  }
}
