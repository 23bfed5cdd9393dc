#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "driftbench/error.hpp"
#include "driftbench/features.hpp"
#include "driftbench/models/params.hpp"

// Linear SVM: hinge loss + L2, trained with deterministic epoch-ordered
// subgradient descent. Each epoch's iterate average is scored against the
// primal objective and the best snapshot is kept.

namespace driftbench {

struct SvmState {
  std::uint32_t vocab_size = 0;
  std::vector<double> weights;
  double bias = 0.0;

  friend bool operator==(const SvmState&, const SvmState&) = default;
};

/// Primal objective 0.5*||w||^2 + C * sum_i hinge(i).
inline double svm_objective(const SvmState& st, double c,
                            const SparseDataset& ds,
                            std::span<const std::uint32_t> rows) {
  double norm = 0.0;
  for (double w : st.weights) norm += w * w;
  double hinge = 0.0;
  for (std::uint32_t r : rows) {
    double margin = st.bias;
    for (std::uint32_t j : ds.rows[r]) margin += st.weights[j];
    const double y = ds.labels[r] == 1 ? 1.0 : -1.0;
    const double loss = 1.0 - y * margin;
    if (loss > 0.0) hinge += loss;
  }
  return 0.5 * norm + c * hinge;
}

inline SvmState svm_fit(const SvmParams& params, const SparseDataset& ds,
                        std::span<const std::uint32_t> rows) {
  const std::uint32_t vocab = ds.vocab_size;
  const std::size_t n = rows.size();
  const double lambda = 1.0 / (params.c * static_cast<double>(n));
  // Step-size shift keeps the first steps bounded near 1.
  const double shift = 1.0 / lambda;

  // w is kept as scale * v so the per-step L2 decay is a scalar multiply;
  // the within-epoch iterate sum is recovered from v, the prefix sum of
  // scales, and the correction vector u (sum over sparse updates of
  // delta * prefix-at-update-time).
  std::vector<double> v(vocab, 0.0);
  double scale = 1.0;
  double b = 0.0;
  std::vector<double> u(vocab, 0.0);

  SvmState best;
  best.vocab_size = vocab;
  best.weights.assign(vocab, 0.0);
  double best_obj = svm_objective(best, params.c, ds, rows);
  double prev_obj = best_obj;

  std::size_t t = 0;
  SvmState candidate;
  candidate.vocab_size = vocab;
  candidate.weights.resize(vocab);
  for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
    std::fill(u.begin(), u.end(), 0.0);
    double prefix = 0.0;  // sum of scales over this epoch's steps
    double b_sum = 0.0;
    for (std::uint32_t r : rows) {
      ++t;
      const double eta = 1.0 / (lambda * (static_cast<double>(t) + shift));
      const double y = ds.labels[r] == 1 ? 1.0 : -1.0;
      double dot = 0.0;
      for (std::uint32_t j : ds.rows[r]) dot += v[j];
      const double margin = scale * dot + b;
      scale *= 1.0 - eta * lambda;
      if (y * margin < 1.0) {
        const double delta = eta * y / scale;
        for (std::uint32_t j : ds.rows[r]) {
          v[j] += delta;
          u[j] += delta * prefix;
        }
        b += eta * y;
      }
      prefix += scale;
      b_sum += b;
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (std::uint32_t j = 0; j < vocab; ++j)
      candidate.weights[j] = (prefix * v[j] - u[j]) * inv;
    candidate.bias = b_sum * inv;
    const double obj = svm_objective(candidate, params.c, ds, rows);
    if (obj < best_obj) {
      best_obj = obj;
      best = candidate;
    }
    if (std::abs(prev_obj - obj) < params.tolerance * (1.0 + std::abs(obj)))
      break;
    prev_obj = obj;
  }
  return best;
}

inline double svm_score_row(const SvmState& st,
                            std::span<const std::uint32_t> row) {
  double margin = st.bias;
  for (std::uint32_t j : row) margin += st.weights[j];
  // Logistic link over the signed margin.
  return 1.0 / (1.0 + std::exp(-margin));
}

}  // namespace driftbench
