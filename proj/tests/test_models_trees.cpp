#include <catch2/catch_amalgamated.hpp>

#include "driftbench/models.hpp"
#include "driftbench/rng.hpp"
#include "test_util.hpp"

using namespace driftbench;
using testutil::all_rows;
using testutil::make_dataset;

namespace {

SparseDataset random_labeled(Rng& rng, std::size_t n, std::uint32_t vocab) {
  std::vector<std::vector<std::uint32_t>> rows(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(rng.next_below(2));
    for (std::uint32_t f = 0; f < vocab; ++f) {
      const double p = labels[i] == 1 ? (f % 2 ? 0.7 : 0.2) : (f % 2 ? 0.2 : 0.7);
      if (rng.next_bernoulli(p)) rows[i].push_back(f);
    }
  }
  labels[0] = 0;  // guarantee both classes
  labels[1] = 1;
  return make_dataset(vocab, rows, labels);
}

}  // namespace

TEST_CASE("single unbounded tree fits XOR exactly", "[rf]") {
  // XOR of two features; requires two split levels
  auto ds = make_dataset(2, {{}, {0}, {1}, {0, 1}}, {0, 1, 1, 0});
  RfParams params;
  params.n_trees = 1;
  params.max_depth = 0;
  params.feature_fraction = 1.0;
  params.bootstrap = false;  // exhaustive-split oracle needs all four rows
  const auto art = fit(params, ds, all_rows(ds), 0);
  const auto preds = predict(score(art, ds, all_rows(ds)));
  CHECK(preds == std::vector<int>{0, 1, 1, 0});
}

TEST_CASE("forest votes produce 0 when every tree says benign", "[rf]") {
  // feature 0 present iff malware; query without it
  auto ds = make_dataset(1, {{0}, {0}, {}, {}}, {1, 1, 0, 0});
  RfParams params;
  params.n_trees = 15;
  params.bootstrap = false;  // every tree sees the clean split
  const auto art = fit(params, ds, all_rows(ds), 5);
  auto q = make_dataset(1, {{}}, {0});
  CHECK(score(art, q, all_rows(q))[0] == 0.0);
  auto qm = make_dataset(1, {{0}}, {0});
  CHECK(score(art, qm, all_rows(qm))[0] == 1.0);
}

TEST_CASE("forests are identical across reruns and thread counts", "[rf]") {
  Rng rng(2024);
  auto ds = random_labeled(rng, 120, 12);
  RfParams params;
  params.n_trees = 20;

  set_max_threads(1);
  const auto serial = fit(params, ds, all_rows(ds), 42);
  set_max_threads(4);
  const auto parallel = fit(params, ds, all_rows(ds), 42);
  set_max_threads(0);

  CHECK(std::get<RfState>(serial.state) == std::get<RfState>(parallel.state));
  const auto s1 = score(serial, ds, all_rows(ds));
  const auto s2 = score(parallel, ds, all_rows(ds));
  CHECK(s1 == s2);

  // different seed, different forest
  const auto other = fit(params, ds, all_rows(ds), 43);
  CHECK_FALSE(std::get<RfState>(serial.state) ==
              std::get<RfState>(other.state));
}

TEST_CASE("rf rejects a single-class training set", "[rf]") {
  auto ds = make_dataset(2, {{0}, {1}}, {0, 0});
  CHECK_THROWS_WITH(fit(RfParams{}, ds, all_rows(ds), 0),
                    Catch::Matchers::ContainsSubstring("single class"));
}

TEST_CASE("gbdt training logloss is non-increasing", "[gbdt]") {
  Rng rng(7);
  auto ds = random_labeled(rng, 200, 10);
  GbdtParams params;
  params.iterations = 60;
  params.depth = 4;
  const auto art = fit(params, ds, all_rows(ds), 0);
  const auto& st = std::get<GbdtState>(art.state);
  REQUIRE(st.train_logloss.size() == 60);
  for (std::size_t i = 1; i < st.train_logloss.size(); ++i)
    CHECK(st.train_logloss[i] <= st.train_logloss[i - 1] + 1e-12);
  CHECK(st.train_logloss.back() < st.train_logloss.front());
}

TEST_CASE("gbdt separates an easy problem and stays deterministic",
          "[gbdt]") {
  auto ds = make_dataset(2, {{0}, {0}, {0, 1}, {}, {1}, {}},
                         {1, 1, 1, 0, 0, 0});
  GbdtParams params;
  params.iterations = 50;
  params.depth = 2;
  const auto art = fit(params, ds, all_rows(ds), 0);
  const auto scores = score(art, ds, all_rows(ds));
  for (int i = 0; i < 3; ++i) CHECK(scores[i] > 0.5);
  for (int i = 3; i < 6; ++i) CHECK(scores[i] < 0.5);

  set_max_threads(1);
  const auto again = fit(params, ds, all_rows(ds), 0);
  set_max_threads(0);
  CHECK(std::get<GbdtState>(art.state) == std::get<GbdtState>(again.state));
}

TEST_CASE("gbdt oblivious trees share one split per level", "[gbdt]") {
  Rng rng(3);
  auto ds = random_labeled(rng, 80, 8);
  GbdtParams params;
  params.iterations = 5;
  params.depth = 3;
  const auto art = fit(params, ds, all_rows(ds), 0);
  const auto& st = std::get<GbdtState>(art.state);
  for (const auto& tree : st.trees) {
    CHECK(tree.split_features.size() <= 3);
    CHECK(tree.leaf_values.size() ==
          (1u << tree.split_features.size()));
  }
}
