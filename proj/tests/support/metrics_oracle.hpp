#pragma once

#include <cstddef>
#include <vector>

// Brute-force metric oracle, written directly from the per-class definitions
// and kept independent of the library implementation it checks.
namespace pdd_test {

struct OracleMetrics {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double balanced_accuracy = 0.0;
};

inline OracleMetrics oracle_metrics(const std::vector<bool>& pred,
                                    const std::vector<bool>& truth) {
  const bool classes[2] = {true, false};  // personal, non-personal
  double f1_sum = 0.0;
  double recall_sum = 0.0;
  std::size_t pooled_tp = 0;
  std::size_t pooled_fp = 0;
  std::size_t pooled_fn = 0;

  for (bool cls : classes) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] == cls && truth[i] == cls) ++tp;
      if (pred[i] == cls && truth[i] != cls) ++fp;
      if (pred[i] != cls && truth[i] == cls) ++fn;
    }
    double precision = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
    double recall = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
    double f1 = (precision + recall)
                    ? 2.0 * precision * recall / (precision + recall)
                    : 0.0;
    f1_sum += f1;
    recall_sum += recall;
    pooled_tp += tp;
    pooled_fp += fp;
    pooled_fn += fn;
  }

  OracleMetrics m;
  m.macro_f1 = f1_sum / 2.0;
  double pooled_precision =
      (pooled_tp + pooled_fp)
          ? static_cast<double>(pooled_tp) / (pooled_tp + pooled_fp)
          : 0.0;
  double pooled_recall =
      (pooled_tp + pooled_fn)
          ? static_cast<double>(pooled_tp) / (pooled_tp + pooled_fn)
          : 0.0;
  m.micro_f1 = (pooled_precision + pooled_recall)
                   ? 2.0 * pooled_precision * pooled_recall /
                         (pooled_precision + pooled_recall)
                   : 0.0;
  m.balanced_accuracy = recall_sum / 2.0;
  return m;
}

}  // namespace pdd_test
