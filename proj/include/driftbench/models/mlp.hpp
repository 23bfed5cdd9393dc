#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "driftbench/features.hpp"
#include "driftbench/models/params.hpp"
#include "driftbench/rng.hpp"

// Fully connected binary classifier: tanh hidden layers, logistic output,
// cross-entropy loss, deterministic mini-batch gradient descent.

namespace driftbench {

struct MlpState {
  std::uint32_t vocab_size = 0;
  std::vector<int> layer_sizes;  // [vocab, hidden..., 1]
  // weights[l] has layer_sizes[l] * layer_sizes[l+1] entries, row-major by
  // input unit; biases[l] has layer_sizes[l+1].
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  friend bool operator==(const MlpState&, const MlpState&) = default;
};

namespace mlp_detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Activations {
  // layer outputs, excluding the sparse input layer
  std::vector<std::vector<double>> values;
};

inline void forward(const MlpState& st, std::span<const std::uint32_t> row,
                    Activations& act) {
  const std::size_t n_layers = st.weights.size();
  act.values.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int out_dim = st.layer_sizes[l + 1];
    auto& out = act.values[l];
    out.assign(st.biases[l].begin(), st.biases[l].end());
    if (l == 0) {
      for (std::uint32_t j : row) {
        const double* w = &st.weights[0][static_cast<std::size_t>(j) *
                                         static_cast<std::size_t>(out_dim)];
        for (int k = 0; k < out_dim; ++k) out[k] += w[k];
      }
    } else {
      const auto& in = act.values[l - 1];
      for (std::size_t j = 0; j < in.size(); ++j) {
        const double x = in[j];
        if (x == 0.0) continue;
        const double* w =
            &st.weights[l][j * static_cast<std::size_t>(out_dim)];
        for (int k = 0; k < out_dim; ++k) out[k] += x * w[k];
      }
    }
    const bool last = l + 1 == n_layers;
    for (auto& v : out) v = last ? sigmoid(v) : std::tanh(v);
  }
}

}  // namespace mlp_detail

inline double mlp_score_row(const MlpState& st,
                            std::span<const std::uint32_t> row) {
  mlp_detail::Activations act;
  mlp_detail::forward(st, row, act);
  return act.values.back()[0];
}

/// Mean cross-entropy of the network on the given rows; used by training and
/// by the finite-difference gradient check.
inline double mlp_loss(const MlpState& st, const SparseDataset& ds,
                       std::span<const std::uint32_t> rows) {
  double loss = 0.0;
  for (std::uint32_t r : rows) {
    const double p = mlp_score_row(st, ds.rows[r]);
    const double y = static_cast<double>(ds.labels[r]);
    const double clamped = std::min(1.0 - 1e-12, std::max(1e-12, p));
    loss -= y * std::log(clamped) + (1.0 - y) * std::log1p(-clamped);
  }
  return loss / static_cast<double>(rows.size());
}

/// Mean cross-entropy gradients for the given rows, same shapes as the
/// state's weights/biases.
inline void mlp_gradients(const MlpState& st, const SparseDataset& ds,
                          std::span<const std::uint32_t> rows,
                          std::vector<std::vector<double>>& grad_w,
                          std::vector<std::vector<double>>& grad_b) {
  const std::size_t n_layers = st.weights.size();
  grad_w.resize(n_layers);
  grad_b.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    grad_w[l].assign(st.weights[l].size(), 0.0);
    grad_b[l].assign(st.biases[l].size(), 0.0);
  }
  mlp_detail::Activations act;
  std::vector<std::vector<double>> delta(n_layers);
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (std::uint32_t r : rows) {
    mlp_detail::forward(st, ds.rows[r], act);
    // output delta: dL/dz = p - y for sigmoid + cross-entropy
    delta[n_layers - 1] = {act.values.back()[0] -
                           static_cast<double>(ds.labels[r])};
    for (std::size_t l = n_layers - 1; l-- > 0;) {
      const int out_dim = st.layer_sizes[l + 1];
      const int next_dim = st.layer_sizes[l + 2];
      delta[l].assign(static_cast<std::size_t>(out_dim), 0.0);
      for (int j = 0; j < out_dim; ++j) {
        const double* w = &st.weights[l + 1][static_cast<std::size_t>(j) *
                                             static_cast<std::size_t>(next_dim)];
        double sum = 0.0;
        for (int k = 0; k < next_dim; ++k) sum += w[k] * delta[l + 1][k];
        const double a = act.values[l][static_cast<std::size_t>(j)];
        delta[l][static_cast<std::size_t>(j)] = sum * (1.0 - a * a);  // tanh'
      }
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
      const int out_dim = st.layer_sizes[l + 1];
      for (int k = 0; k < out_dim; ++k)
        grad_b[l][static_cast<std::size_t>(k)] +=
            inv_n * delta[l][static_cast<std::size_t>(k)];
      if (l == 0) {
        for (std::uint32_t j : ds.rows[r]) {
          double* g = &grad_w[0][static_cast<std::size_t>(j) *
                                 static_cast<std::size_t>(out_dim)];
          for (int k = 0; k < out_dim; ++k)
            g[k] += inv_n * delta[0][static_cast<std::size_t>(k)];
        }
      } else {
        const auto& in = act.values[l - 1];
        for (std::size_t j = 0; j < in.size(); ++j) {
          if (in[j] == 0.0) continue;
          double* g = &grad_w[l][j * static_cast<std::size_t>(out_dim)];
          for (int k = 0; k < out_dim; ++k)
            g[k] += inv_n * in[j] * delta[l][static_cast<std::size_t>(k)];
        }
      }
    }
  }
}

inline MlpState mlp_init(const MlpParams& params, std::uint32_t vocab_size,
                         std::uint64_t seed) {
  MlpState st;
  st.vocab_size = vocab_size;
  st.layer_sizes.push_back(static_cast<int>(vocab_size));
  for (int h : params.hidden) st.layer_sizes.push_back(h);
  st.layer_sizes.push_back(1);
  Rng rng(derive_seed(seed, 0x6d6c70));
  for (std::size_t l = 0; l + 1 < st.layer_sizes.size(); ++l) {
    const std::size_t fan_in = static_cast<std::size_t>(st.layer_sizes[l]);
    const std::size_t fan_out =
        static_cast<std::size_t>(st.layer_sizes[l + 1]);
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(fan_in * fan_out);
    for (auto& v : w) v = (2.0 * rng.next_double() - 1.0) * r;
    st.weights.push_back(std::move(w));
    st.biases.emplace_back(fan_out, 0.0);
  }
  return st;
}

inline MlpState mlp_fit(const MlpParams& params, const SparseDataset& ds,
                        std::span<const std::uint32_t> rows,
                        std::uint64_t seed) {
  MlpState st = mlp_init(params, ds.vocab_size, seed);
  std::vector<std::uint32_t> order(rows.begin(), rows.end());
  std::vector<std::vector<double>> grad_w, grad_b;
  Rng shuffle_rng(derive_seed(seed, 0x736875));
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    // Fisher-Yates from the run's own stream keeps epochs deterministic.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = shuffle_rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(params.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(params.batch_size));
      std::span<const std::uint32_t> batch(order.data() + start, end - start);
      mlp_gradients(st, ds, batch, grad_w, grad_b);
      for (std::size_t l = 0; l < st.weights.size(); ++l) {
        for (std::size_t i = 0; i < st.weights[l].size(); ++i)
          st.weights[l][i] -= params.learning_rate * grad_w[l][i];
        for (std::size_t i = 0; i < st.biases[l].size(); ++i)
          st.biases[l][i] -= params.learning_rate * grad_b[l][i];
      }
    }
  }
  return st;
}

}  // namespace driftbench
