#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "driftbench/error.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/models.hpp"

// Grid search over the per-family hyperparameter grids, selecting by
// validation F1 on the malicious class.

namespace driftbench {

namespace tuning_detail {
inline constexpr std::string_view kModule = "tuning";
}

struct Grid {
  Family family = Family::nb;
  std::vector<Hyperparams> candidates;
};

inline Grid default_grid(Family family) {
  Grid grid;
  grid.family = family;
  switch (family) {
    case Family::nb:
      grid.candidates = {NbParams{1.0}};
      break;
    case Family::knn:
      for (int k : {3, 5, 7, 9, 11, 13, 15})
        grid.candidates.push_back(KnnParams{k});
      break;
    case Family::svm:
      for (double c : {0.001, 0.1, 1.0, 10.0}) {
        SvmParams p;
        p.c = c;
        grid.candidates.push_back(p);
      }
      break;
    case Family::rf:
      for (int n : {100, 200, 300}) {
        RfParams p;
        p.n_trees = n;
        grid.candidates.push_back(p);
      }
      break;
    case Family::gbdt:
      grid.candidates = {GbdtParams{}};  // single CatBoost-style configuration
      break;
    case Family::mlp:
      for (double lr : {0.1, 0.01}) {
        MlpParams p;
        p.learning_rate = lr;
        grid.candidates.push_back(p);
      }
      break;
  }
  return grid;
}

struct GridSearchResult {
  ModelArtifact best;
  std::size_t best_index = 0;
  std::vector<double> validation_f1;  // aligned with the grid
};

/// Trains every candidate and keeps the one with the highest validation F1
/// (malicious class, threshold 0.5); ties break toward the earlier grid
/// position. The full score table comes back for reporting.
inline GridSearchResult grid_search(const Grid& grid, const SparseDataset& ds,
                                    std::span<const std::uint32_t> train_rows,
                                    std::span<const std::uint32_t> val_rows,
                                    std::uint64_t seed) {
  using tuning_detail::kModule;
  if (grid.candidates.empty()) throw Error(kModule, "empty grid");
  for (const auto& hp : grid.candidates)
    if (family_of(hp) != grid.family)
      throw Error(kModule, "grid candidates must share one family");
  if (train_rows.empty() || val_rows.empty())
    throw Error(kModule, "train and validation must be non-empty");
  bool val_has_malware = false;
  for (std::uint32_t r : val_rows) val_has_malware |= ds.labels[r] == 1;
  if (!val_has_malware)
    throw Error(kModule, "validation has no malware rows; F1 undefined");

  std::vector<int> actual;
  actual.reserve(val_rows.size());
  for (std::uint32_t r : val_rows) actual.push_back(ds.labels[r]);

  GridSearchResult result;
  result.validation_f1.resize(grid.candidates.size());
  std::vector<ModelArtifact> artifacts(grid.candidates.size());
  for (std::size_t i = 0; i < grid.candidates.size(); ++i) {
    artifacts[i] = fit(grid.candidates[i], ds, train_rows, seed);
    const auto preds = predict(score(artifacts[i], ds, val_rows), 0.5);
    result.validation_f1[i] = compute_metrics(confusion(actual, preds)).f1;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < artifacts.size(); ++i)
    if (result.validation_f1[i] > result.validation_f1[best]) best = i;
  result.best_index = best;
  result.best = std::move(artifacts[best]);
  return result;
}

}  // namespace driftbench
