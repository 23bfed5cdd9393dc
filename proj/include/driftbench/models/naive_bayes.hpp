#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "driftbench/features.hpp"
#include "driftbench/models/params.hpp"

// Bernoulli Naive Bayes over binary presence features.

namespace driftbench {

struct NbState {
  std::uint32_t vocab_size = 0;
  // Per class c: score(x) = base[c] + sum_{j in x} delta[c][j], where
  // base folds the log-prior together with sum_j log(1 - theta_cj) and
  // delta[c][j] = log theta_cj - log(1 - theta_cj).
  double base[2] = {0.0, 0.0};
  std::vector<double> delta[2];
  bool class_present[2] = {false, false};

  friend bool operator==(const NbState& a, const NbState& b) {
    return a.vocab_size == b.vocab_size && a.base[0] == b.base[0] &&
           a.base[1] == b.base[1] && a.delta[0] == b.delta[0] &&
           a.delta[1] == b.delta[1] &&
           a.class_present[0] == b.class_present[0] &&
           a.class_present[1] == b.class_present[1];
  }
};

inline NbState nb_fit(const NbParams& params, const SparseDataset& ds,
                      std::span<const std::uint32_t> rows) {
  const std::uint32_t vocab = ds.vocab_size;
  std::int64_t n_class[2] = {0, 0};
  std::vector<std::int64_t> present[2];
  present[0].assign(vocab, 0);
  present[1].assign(vocab, 0);
  for (std::uint32_t r : rows) {
    const int y = ds.labels[r];
    ++n_class[y];
    for (std::uint32_t j : ds.rows[r]) ++present[y][j];
  }
  const std::int64_t n = n_class[0] + n_class[1];

  NbState st;
  st.vocab_size = vocab;
  for (int c = 0; c < 2; ++c) {
    st.class_present[c] = n_class[c] > 0;
    st.delta[c].assign(vocab, 0.0);
    if (!st.class_present[c]) {
      st.base[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double prior =
        static_cast<double>(n_class[c]) / static_cast<double>(n);
    double base = std::log(prior);
    const double denom =
        static_cast<double>(n_class[c]) + 2.0 * params.alpha;
    for (std::uint32_t j = 0; j < vocab; ++j) {
      const double theta =
          (static_cast<double>(present[c][j]) + params.alpha) / denom;
      base += std::log1p(-theta);
      st.delta[c][j] = std::log(theta) - std::log1p(-theta);
    }
    st.base[c] = base;
  }
  return st;
}

inline double nb_score_row(const NbState& st,
                           std::span<const std::uint32_t> row) {
  if (!st.class_present[1]) return 0.0;
  if (!st.class_present[0]) return 1.0;
  double s0 = st.base[0];
  double s1 = st.base[1];
  for (std::uint32_t j : row) {
    s0 += st.delta[0][j];
    s1 += st.delta[1][j];
  }
  // exp-normalize
  const double m = s0 > s1 ? s0 : s1;
  const double e0 = std::exp(s0 - m);
  const double e1 = std::exp(s1 - m);
  return e1 / (e0 + e1);
}

}  // namespace driftbench
