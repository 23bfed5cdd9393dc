#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "driftbench/error.hpp"

namespace driftbench {

namespace models_detail {
inline constexpr std::string_view kModule = "models";
}

enum class Family { nb, knn, svm, rf, gbdt, mlp };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::nb: return "nb";
    case Family::knn: return "knn";
    case Family::svm: return "svm";
    case Family::rf: return "rf";
    case Family::gbdt: return "gbdt";
    case Family::mlp: return "mlp";
  }
  return "?";
}

inline Family parse_family(std::string_view name) {
  if (name == "nb") return Family::nb;
  if (name == "knn") return Family::knn;
  if (name == "svm") return Family::svm;
  if (name == "rf") return Family::rf;
  if (name == "gbdt") return Family::gbdt;
  if (name == "mlp") return Family::mlp;
  throw Error(models_detail::kModule,
              "unknown model family '" + std::string(name) + "'");
}

struct NbParams {
  double alpha = 1.0;  // Laplace smoothing
  friend bool operator==(const NbParams&, const NbParams&) = default;
};

struct KnnParams {
  int k = 5;  // odd, >= 1
  friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

struct SvmParams {
  double c = 1.0;
  double tolerance = 1e-6;  // relative objective-change stop
  int max_epochs = 200;
  friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

struct RfParams {
  int n_trees = 100;
  int max_depth = 0;  // 0 = unbounded
  // Fraction of features considered per split; 0 selects ceil(sqrt(V)).
  double feature_fraction = 0.0;
  bool bootstrap = true;
  friend bool operator==(const RfParams&, const RfParams&) = default;
};

struct GbdtParams {
  int iterations = 1000;
  double learning_rate = 0.1;
  int depth = 10;
  double l2_leaf_reg = 5.0;
  friend bool operator==(const GbdtParams&, const GbdtParams&) = default;
};

struct MlpParams {
  std::vector<int> hidden = {256};
  double learning_rate = 0.1;
  int epochs = 20;
  int batch_size = 64;
  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

using Hyperparams =
    std::variant<NbParams, KnnParams, SvmParams, RfParams, GbdtParams,
                 MlpParams>;

inline Family family_of(const Hyperparams& hp) {
  return static_cast<Family>(hp.index());
}

inline void validate_hyperparams(const Hyperparams& hp) {
  using models_detail::kModule;
  if (const auto* nb = std::get_if<NbParams>(&hp)) {
    if (nb->alpha <= 0.0) throw Error(kModule, "nb: alpha must be > 0");
  } else if (const auto* knn = std::get_if<KnnParams>(&hp)) {
    if (knn->k < 1 || knn->k % 2 == 0)
      throw Error(kModule, "knn: k must be odd and >= 1");
  } else if (const auto* svm = std::get_if<SvmParams>(&hp)) {
    if (svm->c <= 0.0) throw Error(kModule, "svm: C must be > 0");
    if (svm->max_epochs < 1) throw Error(kModule, "svm: max_epochs must be >= 1");
    if (svm->tolerance < 0.0) throw Error(kModule, "svm: tolerance must be >= 0");
  } else if (const auto* rf = std::get_if<RfParams>(&hp)) {
    if (rf->n_trees < 1) throw Error(kModule, "rf: n_trees must be >= 1");
    if (rf->max_depth < 0) throw Error(kModule, "rf: max_depth must be >= 0");
    if (rf->feature_fraction < 0.0 || rf->feature_fraction > 1.0)
      throw Error(kModule, "rf: feature_fraction must be in [0, 1]");
  } else if (const auto* gbdt = std::get_if<GbdtParams>(&hp)) {
    if (gbdt->iterations < 1) throw Error(kModule, "gbdt: iterations must be >= 1");
    if (gbdt->learning_rate <= 0.0)
      throw Error(kModule, "gbdt: learning_rate must be > 0");
    if (gbdt->depth < 1) throw Error(kModule, "gbdt: depth must be >= 1");
    if (gbdt->l2_leaf_reg < 0.0)
      throw Error(kModule, "gbdt: l2_leaf_reg must be >= 0");
  } else if (const auto* mlp = std::get_if<MlpParams>(&hp)) {
    if (mlp->hidden.empty())
      throw Error(kModule, "mlp: need at least one hidden layer");
    for (int h : mlp->hidden)
      if (h < 1) throw Error(kModule, "mlp: hidden sizes must be >= 1");
    if (mlp->learning_rate <= 0.0)
      throw Error(kModule, "mlp: learning_rate must be > 0");
    if (mlp->epochs < 1) throw Error(kModule, "mlp: epochs must be >= 1");
    if (mlp->batch_size < 1) throw Error(kModule, "mlp: batch_size must be >= 1");
  }
}

}  // namespace driftbench
