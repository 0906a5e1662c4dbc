#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pdd/corpus.hpp"
#include "pdd/error.hpp"
#include "pdd/verdict.hpp"

namespace pdd {

/// Binary confusion counts with personal as the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

/// Counts predictions against truth; every predicted column must be labeled.
ConfusionMatrix confusion(const std::vector<ColumnVerdict>& preds,
                          const AnnotationSet& truth);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-class metrics; any zero-denominator ratio is defined as 0.
ClassMetrics personal_class_metrics(const ConfusionMatrix& cm);
ClassMetrics non_personal_class_metrics(const ConfusionMatrix& cm);

/// Unweighted mean of the two per-class F1 scores.
double macro_f1(const ConfusionMatrix& cm);

/// F1 from globally pooled per-class TP/FP/FN counts; for single-label binary
/// classification this equals accuracy (tp+tn)/n exactly.
double micro_f1(const ConfusionMatrix& cm);

/// Mean of per-class recalls; requires both classes present in truth.
double balanced_accuracy(const ConfusionMatrix& cm);

struct MetricsReport {
  std::string detector_id;
  std::string dataset_id;
  std::size_t n_columns = 0;
  std::size_t n_errors = 0;  // columns excluded for prediction errors
  ConfusionMatrix cm;
  bool has_confusion = false;
  ClassMetrics personal;
  ClassMetrics non_personal;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double balanced_accuracy = 0.0;

  static MetricsReport from_confusion(const ConfusionMatrix& cm,
                                      std::string detector_id,
                                      std::string dataset_id,
                                      std::size_t n_errors = 0);
};

nlohmann::json metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& doc);
MetricsReport load_metrics(const std::string& path);

// ---------------------------------------------------------------------------
// DeSSI class mapping
// ---------------------------------------------------------------------------

/// The 20 DeSSI class names with their binary mapping (15 personal,
/// 5 non-personal).
const std::vector<std::pair<std::string, bool>>& dessi_class_map();

/// Binary mapping for one class name; unknown names raise UnknownClass.
bool dessi_class_is_personal(std::string_view class_name);

/// A column is personal iff at least one of its class labels is personal.
bool map_dessi(const std::vector<std::string>& class_names);

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

enum class ReportFormat { json, markdown };

/// Cross-detector, cross-dataset grid with rows Macro F1 / Micro F1 /
/// Balanced Acc. per dataset. With two or more datasets an Average block of
/// unweighted per-dataset means is appended.
std::string render_report(const std::vector<MetricsReport>& reports,
                          ReportFormat format);

}  // namespace pdd
