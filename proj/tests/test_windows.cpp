#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "driftbench/rng.hpp"
#include "driftbench/windows.hpp"
#include "test_util.hpp"

using namespace driftbench;
using testutil::make_dataset;

namespace {

// Labels arranged so class arrival matches the batch quota ratio.
SparseDataset ratio_dataset(std::size_t n, std::size_t period,
                            std::size_t mal_per_period) {
  std::vector<std::vector<std::uint32_t>> rows(n);
  std::vector<int> labels(n);
  std::vector<std::int64_t> ts(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = (i % period) < mal_per_period ? 1 : 0;
    ts[i] = static_cast<std::int64_t>(i);
  }
  return make_dataset(4, rows, labels, ts);
}

}  // namespace

TEST_CASE("greedy batching with per-class quotas", "[windows]") {
  SECTION("10 apps (2 mal, 8 ben), B=5, m=1 gives 2 full batches") {
    // hand-traced: batch 0 takes mal row 0 and ben rows 1,2,3,4;
    // batch 1 takes mal row 5 and ben rows 6,7,8,9
    std::vector<int> labels = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0};
    auto ds = make_dataset(2, std::vector<std::vector<std::uint32_t>>(10),
                           labels);
    const auto batches = make_batches(ds, 5, 1);
    REQUIRE(batches.size() == 2);
    CHECK(batches[0].row_ids == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
    CHECK(batches[1].row_ids == std::vector<std::uint32_t>{5, 6, 7, 8, 9});
    for (const auto& b : batches) {
      CHECK(b.n_mal == 1);
      CHECK(b.n_ben == 4);
      CHECK_FALSE(b.short_batch);
      CHECK(b.n_mal + b.n_ben ==
            static_cast<std::int64_t>(b.row_ids.size()));
    }
  }

  SECTION("paper-scale composition: every full batch is exactly (300, 4700)") {
    // 135k apps arriving at a 6% malware rate, the batch quota ratio
    const auto ds = ratio_dataset(135000, 50, 3);
    const auto batches = make_batches(ds, 5000, 300);
    REQUIRE(batches.size() == 27);
    for (const auto& b : batches) {
      CHECK(b.n_mal == 300);
      CHECK(b.n_ben == 4700);
      CHECK_FALSE(b.short_batch);
    }
  }

  SECTION("trailing batch short on malware is flagged") {
    // 4 malware then a benign-only tail
    std::vector<int> labels(30, 0);
    labels[0] = labels[1] = labels[2] = labels[3] = 1;
    auto ds = make_dataset(2, std::vector<std::vector<std::uint32_t>>(30),
                           labels);
    const auto batches = make_batches(ds, 10, 3);
    REQUIRE(batches.size() >= 2);
    CHECK(batches[0].n_mal == 3);
    CHECK_FALSE(batches[0].short_batch);
    const auto& last = batches.back();
    CHECK(last.n_mal < 3);
    CHECK(last.short_batch);
  }

  SECTION("B = 0 is an error") {
    auto ds = ratio_dataset(10, 5, 1);
    CHECK_THROWS_AS(make_batches(ds, 0, 0), Error);
  }

  SECTION("batches partition the dataset") {
    const auto ds = ratio_dataset(997, 10, 1);  // uneven tail
    const auto batches = make_batches(ds, 100, 10);
    std::set<std::uint32_t> seen;
    for (const auto& b : batches)
      for (auto r : b.row_ids) CHECK(seen.insert(r).second);
    CHECK(seen.size() == ds.size());
  }
}

TEST_CASE("window plans", "[windows]") {
  const auto ds = ratio_dataset(27 * 10, 10, 1);
  const auto batches = make_batches(ds, 10, 1);
  REQUIRE(batches.size() == 27);

  SECTION("27 batches with 6-batch windows yield 22 windows") {
    const auto plan = plan_windows(batches, 4);  // w = 6
    CHECK(plan.windows.size() == 22);
    for (std::size_t i = 0; i < plan.windows.size(); ++i) {
      const auto& w = plan.windows[i];
      REQUIRE(w.train_batches.size() == 4);
      CHECK(w.train_batches.front() == i);
      CHECK(w.val_batch == i + 4);
      CHECK(w.test_batch == i + 5);
    }
  }

  SECTION("#batches == window size gives exactly one window") {
    const auto six = std::vector<Batch>(batches.begin(), batches.begin() + 6);
    const auto plan = plan_windows(six, 4);
    CHECK(plan.windows.size() == 1);
  }

  SECTION("10 batches, k=6 gives 3 windows, first = (0-5, 6, 7)") {
    const auto ten = std::vector<Batch>(batches.begin(), batches.begin() + 10);
    const auto plan = plan_windows(ten, 6);
    REQUIRE(plan.windows.size() == 3);
    CHECK(plan.windows[0].train_batches ==
          std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5});
    CHECK(plan.windows[0].val_batch == 6);
    CHECK(plan.windows[0].test_batch == 7);
  }

  SECTION("too few batches errors with the minimum") {
    const auto five = std::vector<Batch>(batches.begin(), batches.begin() + 5);
    CHECK_THROWS_WITH(plan_windows(five, 4),
                      Catch::Matchers::ContainsSubstring("at least 6"));
  }

  SECTION("window count formula holds across k") {
    for (std::size_t k = 1; k <= 8; ++k) {
      const auto plan = plan_windows(batches, k);
      CHECK(plan.windows.size() == batches.size() - (k + 2) + 1);
    }
  }
}

TEST_CASE("monthly splits", "[windows]") {
  auto day = [](int y, unsigned m, unsigned d) {
    return days_from_civil(y, m, d);
  };

  SECTION("one trailing month becomes the single test month") {
    std::vector<std::int64_t> ts;
    for (int m = 1; m <= 12; ++m) ts.push_back(day(2012, m, 10));
    ts.push_back(day(2013, 1, 5));
    std::vector<int> labels(ts.size(), 0);
    labels[0] = 1;
    auto ds = make_dataset(2, std::vector<std::vector<std::uint32_t>>(ts.size()),
                           labels, ts);
    const auto split = plan_monthly(ds, 12);
    CHECK(split.initial_train.size() == 12);
    REQUIRE(split.months.size() == 1);
    CHECK(split.months[0].tag == "2013-01");
  }

  SECTION("gap months are skipped, order preserved") {
    std::vector<std::int64_t> ts = {day(2012, 1, 1), day(2012, 3, 2),
                                    day(2012, 6, 2), day(2012, 4, 20)};
    auto ds = make_dataset(2, std::vector<std::vector<std::uint32_t>>(4),
                           std::vector<int>{0, 1, 0, 1}, ts);
    const auto split = plan_monthly(ds, 1);
    REQUIRE(split.months.size() == 3);
    CHECK(split.months[0].tag == "2012-03");
    CHECK(split.months[1].tag == "2012-04");
    CHECK(split.months[2].tag == "2012-06");
  }

  SECTION("everything inside the span is an error") {
    std::vector<std::int64_t> ts = {day(2012, 1, 1), day(2012, 1, 20)};
    auto ds = make_dataset(2, std::vector<std::vector<std::uint32_t>>(2),
                           std::vector<int>{0, 1}, ts);
    CHECK_THROWS_WITH(plan_monthly(ds, 12),
                      Catch::Matchers::ContainsSubstring("nothing to test"));
  }

  SECTION("row sets are disjoint and months increasing") {
    std::vector<std::int64_t> ts;
    std::vector<int> labels;
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
      ts.push_back(day(2012, 1, 1) +
                   static_cast<std::int64_t>(rng.next_below(700)));
      labels.push_back(static_cast<int>(rng.next_below(2)));
    }
    std::sort(ts.begin(), ts.end());
    auto ds = make_dataset(2, std::vector<std::vector<std::uint32_t>>(200),
                           labels, ts);
    const auto split = plan_monthly(ds, 6);
    std::set<std::uint32_t> seen(split.initial_train.begin(),
                                 split.initial_train.end());
    for (const auto& m : split.months)
      for (auto r : m.row_ids) CHECK(seen.insert(r).second);
    for (std::size_t i = 1; i < split.months.size(); ++i)
      CHECK(split.months[i - 1].tag < split.months[i].tag);
  }
}

TEST_CASE("no temporal leakage across plans", "[windows]") {
  const auto ds = ratio_dataset(400, 10, 1);
  const auto batches = make_batches(ds, 40, 4);
  const auto plan = plan_windows(batches, 3);
  for (const auto& w : plan.windows) {
    std::vector<std::uint32_t> train;
    for (auto b : w.train_batches)
      train.insert(train.end(), batches[b].row_ids.begin(),
                   batches[b].row_ids.end());
    CHECK(leakage_violation(ds, train, batches[w.val_batch].row_ids).empty());
    CHECK(leakage_violation(ds, train, batches[w.test_batch].row_ids).empty());
    std::vector<std::uint32_t> train_and_val = train;
    train_and_val.insert(train_and_val.end(),
                         batches[w.val_batch].row_ids.begin(),
                         batches[w.val_batch].row_ids.end());
    CHECK(leakage_violation(ds, train_and_val, batches[w.test_batch].row_ids)
              .empty());
  }

  const auto split = plan_monthly(ds, 2);
  std::vector<std::uint32_t> train = split.initial_train;
  for (const auto& m : split.months) {
    CHECK(leakage_violation(ds, train, m.row_ids).empty());
    train.insert(train.end(), m.row_ids.begin(), m.row_ids.end());
  }

  SECTION("the checker itself detects violations") {
    std::vector<std::uint32_t> bad_train = {50};
    std::vector<std::uint32_t> test = {10};
    CHECK_FALSE(leakage_violation(ds, bad_train, test).empty());
  }
}
