#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "driftbench/features.hpp"
#include "driftbench/models/params.hpp"

// k-nearest-neighbour scoring with Hamming distance over binary vectors.
// Neighbour ties at the k-th distance break toward the lower training-row
// ordinal.

namespace driftbench {

struct KnnState {
  std::uint32_t vocab_size = 0;
  int k = 1;
  std::vector<std::vector<std::uint32_t>> rows;  // stored training rows
  std::vector<int> labels;

  friend bool operator==(const KnnState&, const KnnState&) = default;
};

inline std::uint32_t intersection_size(std::span<const std::uint32_t> a,
                                       std::span<const std::uint32_t> b) {
  std::uint32_t n = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else
      ++n, ++i, ++j;
  }
  return n;
}

inline KnnState knn_fit(const KnnParams& params, const SparseDataset& ds,
                        std::span<const std::uint32_t> rows) {
  KnnState st;
  st.vocab_size = ds.vocab_size;
  st.k = params.k;
  st.rows.reserve(rows.size());
  st.labels.reserve(rows.size());
  for (std::uint32_t r : rows) {
    st.rows.push_back(ds.rows[r]);
    st.labels.push_back(ds.labels[r]);
  }
  return st;
}

inline double knn_score_row(const KnnState& st,
                            std::span<const std::uint32_t> query) {
  const std::size_t n = st.rows.size();
  const std::size_t k = std::min<std::size_t>(
      static_cast<std::size_t>(st.k), n);
  // (hamming distance, training ordinal)
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t inter = intersection_size(st.rows[i], query);
    const std::uint32_t d = static_cast<std::uint32_t>(st.rows[i].size()) +
                            static_cast<std::uint32_t>(query.size()) -
                            2 * inter;
    dist[i] = {d, static_cast<std::uint32_t>(i)};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                    dist.end());
  int votes = 0;
  for (std::size_t i = 0; i < k; ++i) votes += st.labels[dist[i].second];
  return static_cast<double>(votes) / static_cast<double>(k);
}

}  // namespace driftbench
