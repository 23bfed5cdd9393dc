#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "driftbench/error.hpp"

// Confusion matrices and the derived malicious-class metrics.

namespace driftbench {

namespace metrics_detail {
inline constexpr std::string_view kModule = "metrics";
}

struct ConfusionMatrix {
  std::int64_t tp = 0, fn = 0, fp = 0, tn = 0;

  std::int64_t total() const { return tp + fn + fp + tn; }

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;
};

/// Tallies predictions against ground truth. Positive class is malware
/// (label 1).
inline ConfusionMatrix confusion(std::span<const int> actual,
                                 std::span<const int> predicted) {
  if (actual.size() != predicted.size())
    throw Error(metrics_detail::kModule, "label length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 1)
      (predicted[i] == 1 ? cm.tp : cm.fn)++;
    else
      (predicted[i] == 1 ? cm.fp : cm.tn)++;
  }
  return cm;
}

struct MetricRecord {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double fnr = 0.0;
  double fpr = 0.0;
  // 0/0 cases are reported as 0 with the corresponding flag set.
  bool precision_undefined = false;
  bool recall_undefined = false;  // also covers fnr
  bool f1_undefined = false;
  bool fpr_undefined = false;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

inline MetricRecord compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0)
    throw Error(metrics_detail::kModule, "empty confusion matrix");
  MetricRecord m;
  const double tp = static_cast<double>(cm.tp);
  const double fn = static_cast<double>(cm.fn);
  const double fp = static_cast<double>(cm.fp);
  const double tn = static_cast<double>(cm.tn);
  if (cm.tp + cm.fp > 0)
    m.precision = tp / (tp + fp);
  else
    m.precision_undefined = true;
  if (cm.tp + cm.fn > 0) {
    m.recall = tp / (tp + fn);
    m.fnr = fn / (tp + fn);
  } else {
    m.recall_undefined = true;
  }
  if (m.precision + m.recall > 0.0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  else
    m.f1_undefined = true;
  m.accuracy = (tp + tn) / static_cast<double>(cm.total());
  if (cm.fp + cm.tn > 0)
    m.fpr = fp / (fp + tn);
  else
    m.fpr_undefined = true;
  return m;
}

/// Unweighted arithmetic mean across periods (Table-IV style averaging).
inline MetricRecord aggregate(std::span<const MetricRecord> periods) {
  if (periods.empty())
    throw Error(metrics_detail::kModule, "nothing to aggregate");
  MetricRecord avg;
  const double n = static_cast<double>(periods.size());
  for (const auto& m : periods) {
    avg.precision += m.precision / n;
    avg.recall += m.recall / n;
    avg.f1 += m.f1 / n;
    avg.accuracy += m.accuracy / n;
    avg.fnr += m.fnr / n;
    avg.fpr += m.fpr / n;
    avg.precision_undefined |= m.precision_undefined;
    avg.recall_undefined |= m.recall_undefined;
    avg.f1_undefined |= m.f1_undefined;
    avg.fpr_undefined |= m.fpr_undefined;
  }
  return avg;
}

/// "93.87" style percent formatting used in report tables.
inline std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

}  // namespace driftbench
