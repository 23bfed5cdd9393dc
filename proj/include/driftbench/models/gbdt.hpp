#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "driftbench/features.hpp"
#include "driftbench/models/params.hpp"
#include "driftbench/parallel.hpp"

// Gradient-boosted oblivious (symmetric) trees on binary features, logloss
// objective, Newton leaf values with an L2 term in the denominator.

namespace driftbench {

struct ObliviousTree {
  // One split feature per level; a row's leaf index is the bit pattern of
  // its "feature present?" answers, first level = most significant bit.
  std::vector<std::uint32_t> split_features;
  std::vector<double> leaf_values;  // size 2^levels, learning rate applied

  friend bool operator==(const ObliviousTree&, const ObliviousTree&) = default;

  std::size_t leaf_of(std::span<const std::uint32_t> row) const {
    std::size_t leaf = 0;
    for (std::uint32_t f : split_features) {
      const bool present = std::binary_search(row.begin(), row.end(), f);
      leaf = (leaf << 1) | static_cast<std::size_t>(present);
    }
    return leaf;
  }
};

struct GbdtState {
  std::uint32_t vocab_size = 0;
  double base_score = 0.0;  // initial log-odds
  std::vector<ObliviousTree> trees;
  // Training logloss after each boosting iteration; diagnostic only, not
  // part of the persisted artifact.
  std::vector<double> train_logloss;

  friend bool operator==(const GbdtState& a, const GbdtState& b) {
    return a.vocab_size == b.vocab_size && a.base_score == b.base_score &&
           a.trees == b.trees;
  }

  double raw_score_row(std::span<const std::uint32_t> row) const {
    double f = base_score;
    for (const auto& tree : trees) f += tree.leaf_values[tree.leaf_of(row)];
    return f;
  }
};

namespace gbdt_detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Column access: training row ordinals per feature.
inline std::vector<std::vector<std::uint32_t>> build_columns(
    const SparseDataset& ds, std::span<const std::uint32_t> rows) {
  std::vector<std::vector<std::uint32_t>> columns(ds.vocab_size);
  for (std::uint32_t i = 0; i < rows.size(); ++i)
    for (std::uint32_t j : ds.rows[rows[i]]) columns[j].push_back(i);
  return columns;
}

}  // namespace gbdt_detail

inline GbdtState gbdt_fit(const GbdtParams& params, const SparseDataset& ds,
                          std::span<const std::uint32_t> rows) {
  using gbdt_detail::sigmoid;
  const std::size_t n = rows.size();
  const std::uint32_t vocab = ds.vocab_size;
  const double lambda = params.l2_leaf_reg;

  GbdtState st;
  st.vocab_size = vocab;
  std::int64_t positives = 0;
  for (std::uint32_t r : rows) positives += ds.labels[r];
  {
    double p = static_cast<double>(positives) / static_cast<double>(n);
    p = std::min(1.0 - 1e-12, std::max(1e-12, p));
    st.base_score = std::log(p / (1.0 - p));
  }

  const auto columns = gbdt_detail::build_columns(ds, rows);
  std::vector<double> raw(n, st.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<std::uint32_t> leaf_of(n);
  std::vector<double> leaf_grad, leaf_hess;
  std::vector<double> gains(vocab);

  st.trees.reserve(static_cast<std::size_t>(params.iterations));
  st.train_logloss.reserve(static_cast<std::size_t>(params.iterations));

  for (int iter = 0; iter < params.iterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(raw[i]);
      const double y = static_cast<double>(ds.labels[rows[i]]);
      grad[i] = p - y;
      hess[i] = p * (1.0 - p);
    }

    ObliviousTree tree;
    std::fill(leaf_of.begin(), leaf_of.end(), 0);
    std::size_t n_leaves = 1;
    for (int level = 0; level < params.depth; ++level) {
      leaf_grad.assign(n_leaves, 0.0);
      leaf_hess.assign(n_leaves, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        leaf_grad[leaf_of[i]] += grad[i];
        leaf_hess[leaf_of[i]] += hess[i];
      }
      double no_split = 0.0;
      for (std::size_t l = 0; l < n_leaves; ++l)
        no_split += leaf_grad[l] * leaf_grad[l] / (leaf_hess[l] + lambda);

      parallel_for(vocab, [&](std::size_t f) {
        std::vector<double> pg(n_leaves, 0.0), ph(n_leaves, 0.0);
        for (std::uint32_t i : columns[f]) {
          pg[leaf_of[i]] += grad[i];
          ph[leaf_of[i]] += hess[i];
        }
        double score = 0.0;
        for (std::size_t l = 0; l < n_leaves; ++l) {
          const double ag = leaf_grad[l] - pg[l];
          const double ah = leaf_hess[l] - ph[l];
          score += pg[l] * pg[l] / (ph[l] + lambda) + ag * ag / (ah + lambda);
        }
        gains[f] = score - no_split;
      });

      std::int64_t best_feature = -1;
      double best_gain = 1e-12;
      for (std::uint32_t f = 0; f < vocab; ++f) {
        if (gains[f] > best_gain) {
          best_gain = gains[f];
          best_feature = static_cast<std::int64_t>(f);
        }
      }
      if (best_feature < 0) break;

      const auto& col = columns[static_cast<std::size_t>(best_feature)];
      // present bit set last: leaf = leaf*2 + present
      for (std::size_t i = 0; i < n; ++i) leaf_of[i] <<= 1;
      for (std::uint32_t i : col) leaf_of[i] |= 1;
      tree.split_features.push_back(static_cast<std::uint32_t>(best_feature));
      n_leaves <<= 1;
    }

    leaf_grad.assign(n_leaves, 0.0);
    leaf_hess.assign(n_leaves, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      leaf_grad[leaf_of[i]] += grad[i];
      leaf_hess[leaf_of[i]] += hess[i];
    }
    tree.leaf_values.resize(n_leaves);
    for (std::size_t l = 0; l < n_leaves; ++l) {
      const double value = leaf_hess[l] + lambda > 0.0
                               ? -leaf_grad[l] / (leaf_hess[l] + lambda)
                               : 0.0;
      tree.leaf_values[l] = params.learning_rate * value;
    }
    for (std::size_t i = 0; i < n; ++i) raw[i] += tree.leaf_values[leaf_of[i]];
    st.trees.push_back(std::move(tree));

    double logloss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = static_cast<double>(ds.labels[rows[i]]);
      // log(1 + exp(-z)) form is stable for both signs of z
      const double z = y > 0.5 ? raw[i] : -raw[i];
      logloss += z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
    }
    st.train_logloss.push_back(logloss / static_cast<double>(n));
  }
  return st;
}

inline double gbdt_score_row(const GbdtState& st,
                             std::span<const std::uint32_t> row) {
  return gbdt_detail::sigmoid(st.raw_score_row(row));
}

}  // namespace driftbench
