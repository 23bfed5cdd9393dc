#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "driftbench/features.hpp"
#include "driftbench/models/decision_tree.hpp"
#include "driftbench/models/params.hpp"
#include "driftbench/parallel.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

struct RfState {
  std::uint32_t vocab_size = 0;
  std::vector<DecisionTree> trees;

  friend bool operator==(const RfState&, const RfState&) = default;
};

/// Trains `n_trees` Gini trees on bootstrap samples. Per-tree seeds derive
/// from (master seed, tree index), never from row order or thread schedule,
/// so parallel and serial training produce identical forests.
inline RfState rf_fit(const RfParams& params, const SparseDataset& ds,
                      std::span<const std::uint32_t> rows,
                      std::uint64_t seed) {
  RfState st;
  st.vocab_size = ds.vocab_size;
  st.trees.resize(static_cast<std::size_t>(params.n_trees));

  TreeConfig config;
  config.max_depth = params.max_depth;
  if (params.feature_fraction > 0.0) {
    config.features_per_split = static_cast<std::uint32_t>(
        std::ceil(params.feature_fraction * ds.vocab_size));
  } else {
    config.features_per_split = static_cast<std::uint32_t>(
        std::ceil(std::sqrt(static_cast<double>(ds.vocab_size))));
  }
  if (config.features_per_split == 0 && ds.vocab_size > 0)
    config.features_per_split = 1;

  parallel_for(st.trees.size(), [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    std::vector<std::uint32_t> sample;
    sample.reserve(rows.size());
    if (params.bootstrap) {
      for (std::size_t k = 0; k < rows.size(); ++k)
        sample.push_back(rows[rng.next_below(rows.size())]);
    } else {
      sample.assign(rows.begin(), rows.end());
    }
    st.trees[i] = build_tree(ds, std::move(sample), config, rng);
  });
  return st;
}

/// Fraction of trees voting malware; a tree votes 1 when its leaf's malware
/// fraction is >= 0.5.
inline double rf_score_row(const RfState& st,
                           std::span<const std::uint32_t> row) {
  int votes = 0;
  for (const auto& tree : st.trees)
    if (tree.score_row(row) >= 0.5) ++votes;
  return static_cast<double>(votes) / static_cast<double>(st.trees.size());
}

}  // namespace driftbench
