#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "driftbench/features.hpp"
#include "driftbench/rng.hpp"

// Gini decision tree over binary "feature present?" splits, shared by the
// random forest.

namespace driftbench {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  std::uint32_t absent_child = 0;
  std::uint32_t present_child = 0;
  double value = 0.0;  // leaf malware fraction

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

  double score_row(std::span<const std::uint32_t> row) const {
    std::uint32_t at = 0;
    while (nodes[at].feature >= 0) {
      const bool present = std::binary_search(
          row.begin(), row.end(),
          static_cast<std::uint32_t>(nodes[at].feature));
      at = present ? nodes[at].present_child : nodes[at].absent_child;
    }
    return nodes[at].value;
  }
};

namespace tree_detail {

struct Split {
  std::int32_t feature = -1;
  double gain = 0.0;
};

inline double gini(std::int64_t pos, std::int64_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

}  // namespace tree_detail

struct TreeConfig {
  int max_depth = 0;  // 0 = unbounded
  std::uint32_t features_per_split = 0;  // 0 = all features
};

/// Grows a tree on dataset rows `rows` (indices into ds). Feature candidates
/// at each split are sampled without replacement from the tree's RNG stream;
/// ties on gain break toward the lower feature index.
inline DecisionTree build_tree(const SparseDataset& ds,
                               std::vector<std::uint32_t> rows,
                               const TreeConfig& config, Rng& rng) {
  DecisionTree tree;
  const std::uint32_t vocab = ds.vocab_size;
  const std::uint32_t per_split =
      config.features_per_split == 0 || config.features_per_split > vocab
          ? vocab
          : config.features_per_split;

  // Scratch: candidate slot per feature, stamped per node to avoid clearing.
  std::vector<std::uint32_t> slot_of(vocab, 0);
  std::vector<std::uint32_t> stamp(vocab, 0);
  std::uint32_t node_stamp = 0;
  std::vector<std::uint32_t> universe(vocab);
  for (std::uint32_t f = 0; f < vocab; ++f) universe[f] = f;

  struct Pending {
    std::uint32_t node;
    std::vector<std::uint32_t> rows;
    int depth;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back(Pending{0, std::move(rows), 0});

  std::vector<std::uint32_t> candidates;
  std::vector<std::int64_t> present_count, present_mal;

  while (!stack.empty()) {
    Pending task = std::move(stack.back());
    stack.pop_back();
    auto& node_rows = task.rows;
    const std::int64_t total = static_cast<std::int64_t>(node_rows.size());
    std::int64_t mal = 0;
    for (std::uint32_t r : node_rows) mal += ds.labels[r];
    const double fraction =
        total == 0 ? 0.0
                   : static_cast<double>(mal) / static_cast<double>(total);

    auto make_leaf = [&] {
      tree.nodes[task.node].feature = -1;
      tree.nodes[task.node].value = fraction;
    };
    const bool pure = mal == 0 || mal == total;
    const bool depth_stop =
        config.max_depth > 0 && task.depth >= config.max_depth;
    if (total < 2 || pure || depth_stop || vocab == 0) {
      make_leaf();
      continue;
    }

    // Sample candidate features without replacement.
    candidates.clear();
    if (per_split >= vocab) {
      candidates = universe;
    } else {
      // Partial Fisher-Yates over a fresh copy of the universe prefix.
      std::vector<std::uint32_t> pool = universe;
      for (std::uint32_t i = 0; i < per_split; ++i) {
        const std::uint64_t j =
            i + rng.next_below(static_cast<std::uint64_t>(vocab - i));
        std::swap(pool[i], pool[j]);
        candidates.push_back(pool[i]);
      }
      std::sort(candidates.begin(), candidates.end());
    }

    ++node_stamp;
    for (std::uint32_t s = 0; s < candidates.size(); ++s) {
      slot_of[candidates[s]] = s;
      stamp[candidates[s]] = node_stamp;
    }
    present_count.assign(candidates.size(), 0);
    present_mal.assign(candidates.size(), 0);
    for (std::uint32_t r : node_rows) {
      const int y = ds.labels[r];
      for (std::uint32_t j : ds.rows[r]) {
        if (stamp[j] == node_stamp) {
          const std::uint32_t s = slot_of[j];
          ++present_count[s];
          present_mal[s] += y;
        }
      }
    }

    // An impure node keeps splitting even at zero gain (any valid split
    // partitions it further toward purity); candidates are in ascending
    // feature order, so ties keep the lowest feature index.
    const double parent_gini = tree_detail::gini(mal, total);
    tree_detail::Split best;
    best.gain = -1.0;
    for (std::uint32_t s = 0; s < candidates.size(); ++s) {
      const std::int64_t n1 = present_count[s];
      if (n1 == 0 || n1 == total) continue;
      const std::int64_t m1 = present_mal[s];
      const std::int64_t n0 = total - n1;
      const std::int64_t m0 = mal - m1;
      const double child =
          (static_cast<double>(n1) * tree_detail::gini(m1, n1) +
           static_cast<double>(n0) * tree_detail::gini(m0, n0)) /
          static_cast<double>(total);
      const double gain = parent_gini - child;
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = static_cast<std::int32_t>(candidates[s]);
      }
    }
    if (best.feature < 0) {
      make_leaf();
      continue;
    }

    std::vector<std::uint32_t> absent_rows, present_rows;
    for (std::uint32_t r : node_rows) {
      const bool present = std::binary_search(
          ds.rows[r].begin(), ds.rows[r].end(),
          static_cast<std::uint32_t>(best.feature));
      (present ? present_rows : absent_rows).push_back(r);
    }
    const std::uint32_t absent_id =
        static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const std::uint32_t present_id =
        static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[task.node].feature = best.feature;
    tree.nodes[task.node].absent_child = absent_id;
    tree.nodes[task.node].present_child = present_id;
    stack.push_back(Pending{absent_id, std::move(absent_rows), task.depth + 1});
    stack.push_back(
        Pending{present_id, std::move(present_rows), task.depth + 1});
  }
  return tree;
}

}  // namespace driftbench
