#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftbench/error.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/models.hpp"
#include "driftbench/tuning.hpp"
#include "driftbench/windows.hpp"

// Budgeted uncertainty-sampling loop for concept drift: score each month
// with the current model, evaluate before any labels are revealed, reveal
// the most uncertain rows within the budget, cold-retrain from scratch.

namespace driftbench {

namespace active_detail {
inline constexpr std::string_view kModule = "active";
}

struct ActiveConfig {
  Hyperparams hyperparams;
  // When set, an initial grid search on the training pool picks the
  // hyperparameters, which stay fixed for every later cold retrain.
  std::optional<Grid> tune_grid;
  std::size_t budget = 50;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  // Fraction of the initial pool (temporal tail) held out for the grid
  // search when tune_grid is set.
  double tune_holdout = 0.2;
};

struct MonthRecord {
  std::string tag;
  ConfusionMatrix cm;
  MetricRecord metrics;
  std::vector<std::uint32_t> selected;  // revealed dataset row ids
  std::size_t train_size_at_scoring = 0;
  std::size_t train_size_after = 0;
};

struct ActiveTrace {
  Hyperparams chosen;
  std::vector<MonthRecord> months;
  MetricRecord averages;
};

/// Hooks for auditing the reveal protocol; every callback is optional.
struct ActiveObserver {
  std::function<void(std::size_t month, std::size_t train_size)> on_scored;
  std::function<void(std::size_t month, std::span<const std::uint32_t>)>
      on_revealed;
  std::function<void(std::size_t month)> on_retrained;
};

/// Positions (0-based, ascending) of the min(budget, n) most uncertain
/// scores; ties at equal uncertainty break toward the lower position.
inline std::vector<std::uint32_t> select_uncertain(
    std::span<const double> scores, std::size_t budget) {
  const std::size_t take = std::min(budget, scores.size());
  if (take == 0) return {};
  const auto u = uncertainty(scores);
  std::vector<std::uint32_t> order(scores.size());
  for (std::uint32_t i = 0; i < scores.size(); ++i) order[i] = i;
  std::partial_sort(order.begin(),
                    order.begin() + static_cast<std::ptrdiff_t>(take),
                    order.end(), [&](std::uint32_t a, std::uint32_t b) {
                      if (u[a] != u[b]) return u[a] > u[b];
                      return a < b;
                    });
  order.resize(take);
  std::sort(order.begin(), order.end());
  return order;
}

inline ActiveTrace run_active_loop(const ActiveConfig& config,
                                   const MonthlySplit& split,
                                   const SparseDataset& ds,
                                   const ActiveObserver& observer = {}) {
  using active_detail::kModule;
  if (split.months.empty()) throw Error(kModule, "no test months");
  {
    bool has[2] = {false, false};
    for (std::uint32_t r : split.initial_train) has[ds.labels[r]] = true;
    if (!has[0] || !has[1])
      throw Error(kModule, "initial training pool contains a single class");
  }

  ActiveTrace trace;
  std::vector<std::uint32_t> train_rows = split.initial_train;

  Hyperparams hp = config.hyperparams;
  if (config.tune_grid) {
    // Temporal tail of the initial pool serves as the tuning validation set.
    const std::size_t holdout = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(train_rows.size()) *
                                    config.tune_holdout));
    if (holdout >= train_rows.size())
      throw Error(kModule, "initial pool too small for the tuning holdout");
    const std::size_t cut = train_rows.size() - holdout;
    std::span<const std::uint32_t> tr(train_rows.data(), cut);
    std::span<const std::uint32_t> va(train_rows.data() + cut, holdout);
    const auto tuned =
        grid_search(*config.tune_grid, ds, tr, va, config.seed);
    hp = config.tune_grid->candidates[tuned.best_index];
  }
  trace.chosen = hp;

  ModelArtifact model = fit(hp, ds, train_rows, derive_seed(config.seed, 0));

  std::vector<MetricRecord> per_month;
  for (std::size_t m = 0; m < split.months.size(); ++m) {
    const auto& month = split.months[m];
    MonthRecord rec;
    rec.tag = month.tag;
    rec.train_size_at_scoring = train_rows.size();

    const auto scores = score(model, ds, month.row_ids);
    if (observer.on_scored) observer.on_scored(m, train_rows.size());
    const auto preds = predict(scores, config.threshold);
    std::vector<int> actual;
    actual.reserve(month.row_ids.size());
    for (std::uint32_t r : month.row_ids) actual.push_back(ds.labels[r]);
    rec.cm = confusion(actual, preds);
    rec.metrics = compute_metrics(rec.cm);
    per_month.push_back(rec.metrics);

    // Reveal phase: ground-truth labels of the selected rows join the pool.
    const auto positions = select_uncertain(scores, config.budget);
    rec.selected.reserve(positions.size());
    for (std::uint32_t pos : positions)
      rec.selected.push_back(month.row_ids[pos]);
    if (observer.on_revealed) observer.on_revealed(m, rec.selected);
    train_rows.insert(train_rows.end(), rec.selected.begin(),
                      rec.selected.end());
    rec.train_size_after = train_rows.size();

    if (!rec.selected.empty()) {
      model = fit(hp, ds, train_rows, derive_seed(config.seed, m + 1));
      if (observer.on_retrained) observer.on_retrained(m);
    }
    trace.months.push_back(std::move(rec));
  }
  trace.averages = aggregate(per_month);
  return trace;
}

}  // namespace driftbench
