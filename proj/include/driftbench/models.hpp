#pragma once

#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "driftbench/error.hpp"
#include "driftbench/features.hpp"
#include "driftbench/io.hpp"
#include "driftbench/models/gbdt.hpp"
#include "driftbench/models/knn.hpp"
#include "driftbench/models/linear_svm.hpp"
#include "driftbench/models/mlp.hpp"
#include "driftbench/models/naive_bayes.hpp"
#include "driftbench/models/params.hpp"
#include "driftbench/models/random_forest.hpp"
#include "driftbench/parallel.hpp"

// One fit/score contract over the whole classifier zoo.

namespace driftbench {

inline constexpr std::string_view kModelFilePrefix = "driftbench-model v1";

using ModelState =
    std::variant<NbState, KnnState, SvmState, RfState, GbdtState, MlpState>;

struct ModelArtifact {
  Family family = Family::nb;
  Hyperparams hyperparams;
  std::uint64_t seed = 0;
  std::uint32_t vocab_size = 0;
  std::uint64_t train_size = 0;
  // Fit wall time; in-memory diagnostic only, excluded from serialization so
  // persisted artifacts and reports stay byte-identical across reruns.
  double wall_seconds = 0.0;
  ModelState state;
};

using PredictionScores = std::vector<double>;

namespace models_detail {

inline void require_both_classes(const SparseDataset& ds,
                                 std::span<const std::uint32_t> rows,
                                 Family family) {
  bool has[2] = {false, false};
  for (std::uint32_t r : rows) has[ds.labels[r]] = true;
  if (!has[0] || !has[1])
    throw Error(kModule, std::string(family_name(family)) +
                             ": training set contains a single class");
}

}  // namespace models_detail

/// Trains one classifier. Deterministic for fixed (hyperparams, rows, seed)
/// independent of the thread count.
inline ModelArtifact fit(const Hyperparams& hp, const SparseDataset& ds,
                         std::span<const std::uint32_t> rows,
                         std::uint64_t seed) {
  using models_detail::kModule;
  validate_hyperparams(hp);
  if (rows.empty()) throw Error(kModule, "empty training set");
  for (std::uint32_t r : rows)
    if (r >= ds.size()) throw Error(kModule, "training row out of range");

  ModelArtifact art;
  art.family = family_of(hp);
  art.hyperparams = hp;
  art.seed = seed;
  art.vocab_size = ds.vocab_size;
  art.train_size = rows.size();
  const auto fit_start = std::chrono::steady_clock::now();
  switch (art.family) {
    case Family::nb:
      art.state = nb_fit(std::get<NbParams>(hp), ds, rows);
      break;
    case Family::knn:
      art.state = knn_fit(std::get<KnnParams>(hp), ds, rows);
      break;
    case Family::svm:
      models_detail::require_both_classes(ds, rows, art.family);
      art.state = svm_fit(std::get<SvmParams>(hp), ds, rows);
      break;
    case Family::rf:
      models_detail::require_both_classes(ds, rows, art.family);
      art.state = rf_fit(std::get<RfParams>(hp), ds, rows, seed);
      break;
    case Family::gbdt:
      models_detail::require_both_classes(ds, rows, art.family);
      art.state = gbdt_fit(std::get<GbdtParams>(hp), ds, rows);
      break;
    case Family::mlp:
      models_detail::require_both_classes(ds, rows, art.family);
      art.state = mlp_fit(std::get<MlpParams>(hp), ds, rows, seed);
      break;
  }
  art.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - fit_start)
                         .count();
  return art;
}

/// Malware probability per row, in [0, 1].
inline PredictionScores score(const ModelArtifact& art,
                              const SparseDataset& ds,
                              std::span<const std::uint32_t> rows) {
  using models_detail::kModule;
  if (ds.vocab_size != art.vocab_size)
    throw Error(kModule, "vocabulary size mismatch: artifact " +
                             std::to_string(art.vocab_size) + ", dataset " +
                             std::to_string(ds.vocab_size));
  PredictionScores out(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const auto& row = ds.rows[rows[i]];
    out[i] = std::visit(
        [&](const auto& state) -> double {
          using T = std::decay_t<decltype(state)>;
          if constexpr (std::is_same_v<T, NbState>)
            return nb_score_row(state, row);
          else if constexpr (std::is_same_v<T, KnnState>)
            return knn_score_row(state, row);
          else if constexpr (std::is_same_v<T, SvmState>)
            return svm_score_row(state, row);
          else if constexpr (std::is_same_v<T, RfState>)
            return rf_score_row(state, row);
          else if constexpr (std::is_same_v<T, GbdtState>)
            return gbdt_score_row(state, row);
          else
            return mlp_score_row(state, row);
        },
        art.state);
  });
  return out;
}

/// Label 1 iff score >= threshold.
inline std::vector<int> predict(std::span<const double> scores,
                                double threshold = 0.5) {
  if (threshold < 0.0 || threshold > 1.0)
    throw Error(models_detail::kModule, "threshold outside [0, 1]");
  std::vector<int> labels(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    labels[i] = scores[i] >= threshold ? 1 : 0;
  return labels;
}

/// u = 1 - max(p, 1-p), in [0, 0.5].
inline std::vector<double> uncertainty(std::span<const double> scores) {
  std::vector<double> u(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = scores[i];
    u[i] = 1.0 - (p >= 1.0 - p ? p : 1.0 - p);
  }
  return u;
}

// --- persistence -----------------------------------------------------------
//
// Text serialization; doubles are hexfloats so round-trips preserve scores
// bit-exactly.

namespace models_detail {

class TokenReader {
 public:
  explicit TokenReader(std::string_view text) : text_(text) {}

  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(
               static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ >= text_.size())
      throw Error(kModule, "model file: unexpected end of input");
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void expect(std::string_view word) {
    const auto got = next();
    if (got != word)
      throw Error(kModule, "model file: expected '" + std::string(word) +
                               "', got '" + std::string(got) + "'");
  }

  std::uint64_t next_u64() {
    return static_cast<std::uint64_t>(std::strtoull(
        std::string(next()).c_str(), nullptr, 10));
  }

  std::int64_t next_i64() {
    return std::strtoll(std::string(next()).c_str(), nullptr, 10);
  }

  double next_double() {
    return std::strtod(std::string(next()).c_str(), nullptr);
  }

  bool at_end() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    return pos_ >= text_.size();
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

inline void write_doubles(std::ostringstream& out, std::string_view tag,
                          std::span<const double> values) {
  out << tag << ' ' << values.size();
  for (double v : values) out << ' ' << format_double_exact(v);
  out << "\n";
}

inline std::vector<double> read_doubles(TokenReader& in,
                                        std::string_view tag) {
  in.expect(tag);
  const std::size_t n = in.next_u64();
  std::vector<double> values(n);
  for (auto& v : values) v = in.next_double();
  return values;
}

}  // namespace models_detail

inline std::string serialize_model(const ModelArtifact& art) {
  using models_detail::write_doubles;
  std::ostringstream out;
  out << kModelFilePrefix << ' ' << family_name(art.family) << "\n";
  out << "seed " << art.seed << "\n";
  out << "vocab " << art.vocab_size << "\n";
  out << "train_size " << art.train_size << "\n";
  std::visit(
      [&](const auto& hp) {
        using T = std::decay_t<decltype(hp)>;
        if constexpr (std::is_same_v<T, NbParams>) {
          out << "hp alpha " << format_double_exact(hp.alpha) << "\n";
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          out << "hp k " << hp.k << "\n";
        } else if constexpr (std::is_same_v<T, SvmParams>) {
          out << "hp c " << format_double_exact(hp.c) << " tol "
              << format_double_exact(hp.tolerance) << " max_epochs "
              << hp.max_epochs << "\n";
        } else if constexpr (std::is_same_v<T, RfParams>) {
          out << "hp n_trees " << hp.n_trees << " max_depth " << hp.max_depth
              << " feature_fraction "
              << format_double_exact(hp.feature_fraction) << " bootstrap "
              << (hp.bootstrap ? 1 : 0) << "\n";
        } else if constexpr (std::is_same_v<T, GbdtParams>) {
          out << "hp iterations " << hp.iterations << " learning_rate "
              << format_double_exact(hp.learning_rate) << " depth "
              << hp.depth << " l2_leaf_reg "
              << format_double_exact(hp.l2_leaf_reg) << "\n";
        } else if constexpr (std::is_same_v<T, MlpParams>) {
          out << "hp hidden " << hp.hidden.size();
          for (int h : hp.hidden) out << ' ' << h;
          out << " learning_rate " << format_double_exact(hp.learning_rate)
              << " epochs " << hp.epochs << " batch_size " << hp.batch_size
              << "\n";
        }
      },
      art.hyperparams);
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, NbState>) {
          out << "present " << (st.class_present[0] ? 1 : 0) << ' '
              << (st.class_present[1] ? 1 : 0) << "\n";
          out << "base " << format_double_exact(st.base[0]) << ' '
              << format_double_exact(st.base[1]) << "\n";
          write_doubles(out, "delta0", st.delta[0]);
          write_doubles(out, "delta1", st.delta[1]);
        } else if constexpr (std::is_same_v<T, KnnState>) {
          out << "stored " << st.rows.size() << "\n";
          for (std::size_t i = 0; i < st.rows.size(); ++i) {
            out << st.labels[i] << ' ' << st.rows[i].size();
            for (std::uint32_t j : st.rows[i]) out << ' ' << j;
            out << "\n";
          }
        } else if constexpr (std::is_same_v<T, SvmState>) {
          out << "bias " << format_double_exact(st.bias) << "\n";
          write_doubles(out, "weights", st.weights);
        } else if constexpr (std::is_same_v<T, RfState>) {
          out << "trees " << st.trees.size() << "\n";
          for (const auto& tree : st.trees) {
            out << "tree " << tree.nodes.size() << "\n";
            for (const auto& node : tree.nodes)
              out << node.feature << ' ' << node.absent_child << ' '
                  << node.present_child << ' '
                  << format_double_exact(node.value) << "\n";
          }
        } else if constexpr (std::is_same_v<T, GbdtState>) {
          out << "base " << format_double_exact(st.base_score) << "\n";
          out << "trees " << st.trees.size() << "\n";
          for (const auto& tree : st.trees) {
            out << "splits " << tree.split_features.size();
            for (std::uint32_t f : tree.split_features) out << ' ' << f;
            out << "\n";
            write_doubles(out, "leaves", tree.leaf_values);
          }
        } else if constexpr (std::is_same_v<T, MlpState>) {
          out << "layers " << st.layer_sizes.size();
          for (int s : st.layer_sizes) out << ' ' << s;
          out << "\n";
          for (std::size_t l = 0; l < st.weights.size(); ++l) {
            write_doubles(out, "w", st.weights[l]);
            write_doubles(out, "b", st.biases[l]);
          }
        }
      },
      art.state);
  out << "end\n";
  return std::move(out).str();
}

inline ModelArtifact parse_model(std::string_view text) {
  using models_detail::kModule;
  using models_detail::TokenReader;
  using models_detail::read_doubles;
  TokenReader in(text);
  in.expect("driftbench-model");
  in.expect("v1");
  ModelArtifact art;
  art.family = parse_family(in.next());
  in.expect("seed");
  art.seed = in.next_u64();
  in.expect("vocab");
  art.vocab_size = static_cast<std::uint32_t>(in.next_u64());
  in.expect("train_size");
  art.train_size = in.next_u64();
  in.expect("hp");
  switch (art.family) {
    case Family::nb: {
      NbParams hp;
      in.expect("alpha");
      hp.alpha = in.next_double();
      art.hyperparams = hp;
      NbState st;
      st.vocab_size = art.vocab_size;
      in.expect("present");
      st.class_present[0] = in.next_u64() != 0;
      st.class_present[1] = in.next_u64() != 0;
      in.expect("base");
      st.base[0] = in.next_double();
      st.base[1] = in.next_double();
      st.delta[0] = read_doubles(in, "delta0");
      st.delta[1] = read_doubles(in, "delta1");
      art.state = std::move(st);
      break;
    }
    case Family::knn: {
      KnnParams hp;
      in.expect("k");
      hp.k = static_cast<int>(in.next_i64());
      art.hyperparams = hp;
      KnnState st;
      st.vocab_size = art.vocab_size;
      st.k = hp.k;
      in.expect("stored");
      const std::size_t n = in.next_u64();
      st.rows.resize(n);
      st.labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        st.labels[i] = static_cast<int>(in.next_i64());
        const std::size_t len = in.next_u64();
        st.rows[i].resize(len);
        for (auto& j : st.rows[i])
          j = static_cast<std::uint32_t>(in.next_u64());
      }
      art.state = std::move(st);
      break;
    }
    case Family::svm: {
      SvmParams hp;
      in.expect("c");
      hp.c = in.next_double();
      in.expect("tol");
      hp.tolerance = in.next_double();
      in.expect("max_epochs");
      hp.max_epochs = static_cast<int>(in.next_i64());
      art.hyperparams = hp;
      SvmState st;
      st.vocab_size = art.vocab_size;
      in.expect("bias");
      st.bias = in.next_double();
      st.weights = read_doubles(in, "weights");
      art.state = std::move(st);
      break;
    }
    case Family::rf: {
      RfParams hp;
      in.expect("n_trees");
      hp.n_trees = static_cast<int>(in.next_i64());
      in.expect("max_depth");
      hp.max_depth = static_cast<int>(in.next_i64());
      in.expect("feature_fraction");
      hp.feature_fraction = in.next_double();
      in.expect("bootstrap");
      hp.bootstrap = in.next_u64() != 0;
      art.hyperparams = hp;
      RfState st;
      st.vocab_size = art.vocab_size;
      in.expect("trees");
      const std::size_t n = in.next_u64();
      st.trees.resize(n);
      for (auto& tree : st.trees) {
        in.expect("tree");
        const std::size_t n_nodes = in.next_u64();
        tree.nodes.resize(n_nodes);
        for (auto& node : tree.nodes) {
          node.feature = static_cast<std::int32_t>(in.next_i64());
          node.absent_child = static_cast<std::uint32_t>(in.next_u64());
          node.present_child = static_cast<std::uint32_t>(in.next_u64());
          node.value = in.next_double();
        }
      }
      art.state = std::move(st);
      break;
    }
    case Family::gbdt: {
      GbdtParams hp;
      in.expect("iterations");
      hp.iterations = static_cast<int>(in.next_i64());
      in.expect("learning_rate");
      hp.learning_rate = in.next_double();
      in.expect("depth");
      hp.depth = static_cast<int>(in.next_i64());
      in.expect("l2_leaf_reg");
      hp.l2_leaf_reg = in.next_double();
      art.hyperparams = hp;
      GbdtState st;
      st.vocab_size = art.vocab_size;
      in.expect("base");
      st.base_score = in.next_double();
      in.expect("trees");
      const std::size_t n = in.next_u64();
      st.trees.resize(n);
      for (auto& tree : st.trees) {
        in.expect("splits");
        const std::size_t n_splits = in.next_u64();
        tree.split_features.resize(n_splits);
        for (auto& f : tree.split_features)
          f = static_cast<std::uint32_t>(in.next_u64());
        tree.leaf_values = read_doubles(in, "leaves");
      }
      art.state = std::move(st);
      break;
    }
    case Family::mlp: {
      MlpParams hp;
      in.expect("hidden");
      const std::size_t n_hidden = in.next_u64();
      hp.hidden.resize(n_hidden);
      for (auto& h : hp.hidden) h = static_cast<int>(in.next_i64());
      in.expect("learning_rate");
      hp.learning_rate = in.next_double();
      in.expect("epochs");
      hp.epochs = static_cast<int>(in.next_i64());
      in.expect("batch_size");
      hp.batch_size = static_cast<int>(in.next_i64());
      art.hyperparams = hp;
      MlpState st;
      st.vocab_size = art.vocab_size;
      in.expect("layers");
      const std::size_t n_layers = in.next_u64();
      st.layer_sizes.resize(n_layers);
      for (auto& s : st.layer_sizes) s = static_cast<int>(in.next_i64());
      for (std::size_t l = 0; l + 1 < n_layers; ++l) {
        st.weights.push_back(read_doubles(in, "w"));
        st.biases.push_back(read_doubles(in, "b"));
      }
      art.state = std::move(st);
      break;
    }
  }
  in.expect("end");
  return art;
}

inline void save_model(const ModelArtifact& art,
                       const std::filesystem::path& path) {
  atomic_write_file(path, serialize_model(art), models_detail::kModule);
}

inline ModelArtifact load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path, models_detail::kModule));
}

}  // namespace driftbench
