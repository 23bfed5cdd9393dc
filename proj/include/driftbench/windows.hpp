#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "driftbench/civil.hpp"
#include "driftbench/error.hpp"
#include "driftbench/features.hpp"

// Temporal batch construction, sliding-window plans and monthly splits.

namespace driftbench {

namespace windows_detail {
inline constexpr std::string_view kModule = "windows";
}

struct Batch {
  std::uint32_t ordinal = 0;
  std::vector<std::uint32_t> row_ids;  // ascending dataset row indices
  std::int64_t n_mal = 0;
  std::int64_t n_ben = 0;
  bool short_batch = false;  // failed its per-class quota

  friend bool operator==(const Batch&, const Batch&) = default;
};

struct Window {
  std::vector<std::uint32_t> train_batches;
  std::uint32_t val_batch = 0;
  std::uint32_t test_batch = 0;

  friend bool operator==(const Window&, const Window&) = default;
};

struct WindowPlan {
  std::vector<Window> windows;

  friend bool operator==(const WindowPlan&, const WindowPlan&) = default;
};

struct MonthBucket {
  std::string tag;  // "2013-01"
  std::vector<std::uint32_t> row_ids;

  friend bool operator==(const MonthBucket&, const MonthBucket&) = default;
};

struct MonthlySplit {
  std::vector<std::uint32_t> initial_train;
  std::vector<MonthBucket> months;

  friend bool operator==(const MonthlySplit&, const MonthlySplit&) = default;
};

/// Greedy time-ordered batching with a fixed per-class quota: every batch
/// takes the next `mal_per_batch` malware rows and the next
/// `batch_size - mal_per_batch` benign rows. Any batch that cannot fill a
/// quota is flagged short; all rows end up assigned.
inline std::vector<Batch> make_batches(const SparseDataset& ds,
                                       std::size_t batch_size,
                                       std::size_t mal_per_batch) {
  using windows_detail::kModule;
  if (batch_size == 0) throw Error(kModule, "batch size must be > 0");
  if (mal_per_batch > batch_size)
    throw Error(kModule, "malware quota exceeds batch size");
  const std::size_t ben_per_batch = batch_size - mal_per_batch;

  std::vector<std::uint32_t> mal_rows, ben_rows;
  for (std::uint32_t i = 0; i < ds.size(); ++i)
    (ds.labels[i] == 1 ? mal_rows : ben_rows).push_back(i);

  std::vector<Batch> batches;
  std::size_t mi = 0, bi = 0;
  while (mi < mal_rows.size() || bi < ben_rows.size()) {
    Batch b;
    b.ordinal = static_cast<std::uint32_t>(batches.size());
    const std::size_t take_mal =
        std::min(mal_per_batch, mal_rows.size() - mi);
    const std::size_t take_ben =
        std::min(ben_per_batch, ben_rows.size() - bi);
    if (take_mal == 0 && take_ben == 0) break;  // quotas are both zero
    for (std::size_t k = 0; k < take_mal; ++k)
      b.row_ids.push_back(mal_rows[mi++]);
    for (std::size_t k = 0; k < take_ben; ++k)
      b.row_ids.push_back(ben_rows[bi++]);
    std::sort(b.row_ids.begin(), b.row_ids.end());
    b.n_mal = static_cast<std::int64_t>(take_mal);
    b.n_ben = static_cast<std::int64_t>(take_ben);
    b.short_batch = take_mal < mal_per_batch || take_ben < ben_per_batch;
    batches.push_back(std::move(b));
  }
  return batches;
}

/// Windows of n_train consecutive training batches + 1 validation + 1 test,
/// advanced one batch at a time.
inline WindowPlan plan_windows(const std::vector<Batch>& batches,
                               std::size_t n_train) {
  using windows_detail::kModule;
  if (n_train == 0) throw Error(kModule, "need at least 1 training batch");
  const std::size_t w = n_train + 2;
  if (batches.size() < w)
    throw Error(kModule, "need at least " + std::to_string(w) +
                             " batches for " + std::to_string(n_train) +
                             " training batches, got " +
                             std::to_string(batches.size()));
  WindowPlan plan;
  const std::size_t count = batches.size() - w + 1;
  plan.windows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Window win;
    for (std::size_t k = 0; k < n_train; ++k)
      win.train_batches.push_back(static_cast<std::uint32_t>(i + k));
    win.val_batch = static_cast<std::uint32_t>(i + n_train);
    win.test_batch = static_cast<std::uint32_t>(i + n_train + 1);
    plan.windows.push_back(std::move(win));
  }
  return plan;
}

/// First `initial_span` calendar months (counted from the month of the
/// earliest row) become the training pool; every later non-empty month is a
/// test bucket, in order.
inline MonthlySplit plan_monthly(const SparseDataset& ds,
                                 std::size_t initial_span) {
  using windows_detail::kModule;
  if (ds.size() == 0) throw Error(kModule, "empty dataset");
  if (initial_span == 0) throw Error(kModule, "initial span must be >= 1");

  const std::int64_t first_month = month_index_of_day(ds.timestamps.front());
  MonthlySplit split;
  std::map<std::int64_t, std::vector<std::uint32_t>> buckets;
  for (std::uint32_t i = 0; i < ds.size(); ++i) {
    const std::int64_t m = month_index_of_day(ds.timestamps[i]);
    if (m < first_month + static_cast<std::int64_t>(initial_span))
      split.initial_train.push_back(i);
    else
      buckets[m].push_back(i);
  }
  if (buckets.empty())
    throw Error(kModule,
                "all rows fall inside the initial span; nothing to test");
  for (auto& [m, rows] : buckets)
    split.months.push_back(MonthBucket{format_month_tag(m), std::move(rows)});
  return split;
}

/// Checks that every training key strictly precedes every evaluation key.
/// Returns an empty string when clean, else a description of the violation.
inline std::string leakage_violation(const SparseDataset& ds,
                                     std::span<const std::uint32_t> train,
                                     std::span<const std::uint32_t> test) {
  auto key = [&](std::uint32_t r) {
    return std::pair<std::int64_t, const std::string&>(ds.timestamps[r],
                                                       ds.ids[r]);
  };
  if (train.empty() || test.empty()) return {};
  std::uint32_t max_train = train[0];
  for (auto r : train)
    if (key(r) > key(max_train)) max_train = r;
  std::uint32_t min_test = test[0];
  for (auto r : test)
    if (key(r) < key(min_test)) min_test = r;
  if (key(max_train) < key(min_test)) return {};
  return "training row " + ds.ids[max_train] + " (day " +
         std::to_string(ds.timestamps[max_train]) +
         ") does not precede test row " + ds.ids[min_test] + " (day " +
         std::to_string(ds.timestamps[min_test]) + ")";
}

}  // namespace driftbench
