#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "driftbench/models.hpp"
#include "test_util.hpp"

using namespace driftbench;
using testutil::all_rows;
using testutil::make_dataset;

namespace {

double hinge(double m) { return m < 1.0 ? 1.0 - m : 0.0; }

}  // namespace

TEST_CASE("SVM separates the 2-point analytic problem", "[svm]") {
  // x present => malware, absent => benign. Hard-margin optimum is
  // w = 2, b = -1 with objective 0.5 * 4 = 2 at C = 10.
  auto ds = make_dataset(1, {{0}, {}}, {1, 0});
  SvmParams params;
  params.c = 10.0;
  params.max_epochs = 4000;
  params.tolerance = 0.0;
  const auto art = fit(params, ds, all_rows(ds), 0);
  const auto& st = std::get<SvmState>(art.state);

  // margin signs
  CHECK(st.weights[0] + st.bias > 0.0);
  CHECK(st.bias < 0.0);

  // dense (w, b) grid oracle
  double grid_best = 1e100;
  for (double w = -1.0; w <= 4.0; w += 0.002) {
    for (double b = -2.5; b <= 1.0; b += 0.002) {
      const double obj =
          0.5 * w * w + 10.0 * (hinge(w + b) + hinge(-(0.0 + b)));
      grid_best = std::min(grid_best, obj);
    }
  }
  const double trained = svm_objective(st, 10.0, ds, all_rows(ds));
  CHECK(trained <= grid_best * 1.01);
  CHECK_THAT(grid_best, Catch::Matchers::WithinAbs(2.0, 0.02));

  // scores land on the right side of 0.5
  const auto scores = score(art, ds, all_rows(ds));
  CHECK(scores[0] > 0.5);
  CHECK(scores[1] < 0.5);
}

TEST_CASE("SVM reaches the grid optimum on a 2-feature toy", "[svm]") {
  // Feature 0 carries the class; feature 1 is noise.
  auto ds = make_dataset(2, {{0}, {0, 1}, {}, {1}}, {1, 1, 0, 0});
  SvmParams params;
  params.c = 10.0;
  params.max_epochs = 4000;
  params.tolerance = 0.0;
  const auto art = fit(params, ds, all_rows(ds), 0);
  const auto& st = std::get<SvmState>(art.state);

  double grid_best = 1e100;
  for (double w0 = -3.0; w0 <= 3.0; w0 += 0.02) {
    for (double w1 = -3.0; w1 <= 3.0; w1 += 0.02) {
      for (double b = -2.0; b <= 2.0; b += 0.02) {
        const double obj = 0.5 * (w0 * w0 + w1 * w1) +
                           10.0 * (hinge(w0 + b) + hinge(w0 + w1 + b) +
                                   hinge(-b) + hinge(-(w1 + b)));
        grid_best = std::min(grid_best, obj);
      }
    }
  }
  const double trained = svm_objective(st, 10.0, ds, all_rows(ds));
  CHECK(trained <= grid_best * 1.01 + 1e-9);

  const auto preds = predict(score(art, ds, all_rows(ds)));
  CHECK(preds == std::vector<int>{1, 1, 0, 0});
}

TEST_CASE("SVM training is deterministic", "[svm]") {
  auto ds = make_dataset(3, {{0}, {0, 2}, {1}, {}, {2}, {0, 1}},
                         {1, 1, 0, 0, 0, 1});
  SvmParams params;
  params.c = 1.0;
  params.max_epochs = 50;
  const auto a = fit(params, ds, all_rows(ds), 3);
  const auto b = fit(params, ds, all_rows(ds), 99);  // seed is unused by svm
  CHECK(std::get<SvmState>(a.state) == std::get<SvmState>(b.state));
}

TEST_CASE("SVM rejects a single-class training set", "[svm]") {
  auto ds = make_dataset(2, {{0}, {1}}, {1, 1});
  CHECK_THROWS_WITH(fit(SvmParams{}, ds, all_rows(ds), 0),
                    Catch::Matchers::ContainsSubstring("single class"));
}

TEST_CASE("SVM scale-factor training equals a dense reference", "[svm]") {
  // The trainer keeps w as scale*v with a lazily reconstructed epoch
  // average; replay the same update sequence densely and compare.
  Rng rng(5150);
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint32_t vocab = 3 + static_cast<std::uint32_t>(rng.next_below(20));
    const std::size_t n = 5 + rng.next_below(60);
    std::vector<std::vector<std::uint32_t>> rows_data(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint32_t f = 0; f < vocab; ++f)
        if (rng.next_bernoulli(0.3)) rows_data[i].push_back(f);
      labels[i] = static_cast<int>(rng.next_below(2));
    }
    labels[0] = 0;
    labels[1] = 1;
    auto ds = make_dataset(vocab, rows_data, labels);
    const auto rows = all_rows(ds);

    SvmParams p;
    p.c = 2.0;
    p.max_epochs = 7;
    p.tolerance = 0.0;
    const auto fast = svm_fit(p, ds, rows);

    const double lambda = 1.0 / (p.c * static_cast<double>(n));
    const double shift = 1.0 / lambda;
    std::vector<double> w(vocab, 0.0);
    double b = 0.0;
    SvmState best;
    best.vocab_size = vocab;
    best.weights.assign(vocab, 0.0);
    double best_obj = svm_objective(best, p.c, ds, rows);
    std::size_t t = 0;
    for (int epoch = 0; epoch < p.max_epochs; ++epoch) {
      std::vector<double> wsum(vocab, 0.0);
      double bsum = 0.0;
      for (auto r : rows) {
        ++t;
        const double eta = 1.0 / (lambda * (static_cast<double>(t) + shift));
        const double y = ds.labels[r] == 1 ? 1.0 : -1.0;
        double margin = b;
        for (auto j : ds.rows[r]) margin += w[j];
        for (auto& wi : w) wi *= 1.0 - eta * lambda;
        if (y * margin < 1.0) {
          for (auto j : ds.rows[r]) w[j] += eta * y;
          b += eta * y;
        }
        for (std::uint32_t j = 0; j < vocab; ++j) wsum[j] += w[j];
        bsum += b;
      }
      SvmState cand;
      cand.vocab_size = vocab;
      cand.weights.resize(vocab);
      for (std::uint32_t j = 0; j < vocab; ++j)
        cand.weights[j] = wsum[j] / static_cast<double>(n);
      cand.bias = bsum / static_cast<double>(n);
      const double obj = svm_objective(cand, p.c, ds, rows);
      if (obj < best_obj) {
        best_obj = obj;
        best = cand;
      }
    }
    CHECK_THAT(fast.bias, Catch::Matchers::WithinAbs(best.bias, 1e-9));
    for (std::uint32_t j = 0; j < vocab; ++j)
      CHECK_THAT(fast.weights[j],
                 Catch::Matchers::WithinAbs(best.weights[j], 1e-9));
  }
}
