#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "driftbench/models.hpp"
#include "driftbench/rng.hpp"
#include "test_util.hpp"

using namespace driftbench;
using testutil::all_rows;
using testutil::make_dataset;

namespace {

// Brute-force reference: full sort by (hamming distance, ordinal), take k,
// malware fraction.
double knn_oracle(const std::vector<std::vector<std::uint32_t>>& train_rows,
                  const std::vector<int>& labels,
                  const std::vector<std::uint32_t>& query, int k) {
  std::vector<std::pair<std::uint64_t, std::size_t>> d;
  for (std::size_t i = 0; i < train_rows.size(); ++i) {
    std::vector<std::uint32_t> inter;
    std::set_intersection(train_rows[i].begin(), train_rows[i].end(),
                          query.begin(), query.end(),
                          std::back_inserter(inter));
    d.emplace_back(train_rows[i].size() + query.size() - 2 * inter.size(), i);
  }
  std::sort(d.begin(), d.end());
  const std::size_t kk = std::min<std::size_t>(k, d.size());
  int votes = 0;
  for (std::size_t i = 0; i < kk; ++i) votes += labels[d[i].second];
  return static_cast<double>(votes) / static_cast<double>(kk);
}

SparseDataset random_dataset(Rng& rng, std::size_t n, std::uint32_t vocab) {
  std::vector<std::vector<std::uint32_t>> rows(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t f = 0; f < vocab; ++f)
      if (rng.next_bernoulli(0.25)) rows[i].push_back(f);
    labels[i] = static_cast<int>(rng.next_below(2));
  }
  return make_dataset(vocab, rows, labels);
}

}  // namespace

TEST_CASE("kNN self-neighbour scores 1.0", "[knn]") {
  auto ds = make_dataset(4, {{1, 3}}, {1});
  const auto art = fit(KnnParams{1}, ds, all_rows(ds), 0);
  CHECK(score(art, ds, all_rows(ds))[0] == 1.0);
}

TEST_CASE("kNN distance ties break toward the lower ordinal", "[knn]") {
  // both training rows are at hamming distance 1 from the empty query
  auto train = make_dataset(2, {{0}, {1}}, {0, 1});
  const auto art = fit(KnnParams{1}, train, all_rows(train), 0);
  auto query = make_dataset(2, {{}}, {0});
  CHECK(score(art, query, all_rows(query))[0] == 0.0);  // row 0 wins the tie
}

TEST_CASE("kNN with fewer training rows than k uses what exists", "[knn]") {
  auto train = make_dataset(2, {{0}, {1}}, {1, 0});
  const auto art = fit(KnnParams{5}, train, all_rows(train), 0);
  auto query = make_dataset(2, {{0, 1}}, {0});
  CHECK(score(art, query, all_rows(query))[0] == 0.5);
}

TEST_CASE("kNN equals the exhaustive-search oracle", "[knn]") {
  Rng rng(123);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 10 + rng.next_below(150);
    const std::uint32_t vocab =
        static_cast<std::uint32_t>(5 + rng.next_below(45));
    auto ds = random_dataset(rng, n, vocab);
    auto queries = random_dataset(rng, 8, vocab);
    for (int k : {1, 3, 5}) {
      const auto art = fit(KnnParams{k}, ds, all_rows(ds), 7);
      const auto got = score(art, queries, all_rows(queries));
      for (std::size_t q = 0; q < queries.size(); ++q) {
        const double want = knn_oracle(ds.rows, ds.labels, queries.rows[q], k);
        CHECK(got[q] == want);  // exact, including tie-breaks
      }
    }
  }
}
