#include "pdd/eval.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>

namespace pdd {

ConfusionMatrix confusion(const std::vector<ColumnVerdict>& preds,
                          const AnnotationSet& truth) {
  ConfusionMatrix cm;
  for (const ColumnVerdict& pred : preds) {
    if (!truth.contains(pred.column_name)) {
      throw Error(Errc::missing_label, "'" + pred.column_name + "'");
    }
    bool actual = truth.at(pred.column_name);
    if (pred.is_personal && actual) ++cm.tp;
    else if (pred.is_personal && !actual) ++cm.fp;
    else if (!pred.is_personal && actual) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double f1_from(double precision, double recall) {
  double den = precision + recall;
  return den == 0.0 ? 0.0 : 2.0 * precision * recall / den;
}

void require_non_empty(const ConfusionMatrix& cm) {
  if (cm.total() == 0) {
    throw Error(Errc::empty_evaluation, "no evaluated columns");
  }
}

}  // namespace

ClassMetrics personal_class_metrics(const ConfusionMatrix& cm) {
  ClassMetrics m;
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  m.f1 = f1_from(m.precision, m.recall);
  return m;
}

ClassMetrics non_personal_class_metrics(const ConfusionMatrix& cm) {
  ClassMetrics m;
  m.precision = ratio(cm.tn, cm.tn + cm.fn);
  m.recall = ratio(cm.tn, cm.tn + cm.fp);
  m.f1 = f1_from(m.precision, m.recall);
  return m;
}

double macro_f1(const ConfusionMatrix& cm) {
  require_non_empty(cm);
  return (personal_class_metrics(cm).f1 + non_personal_class_metrics(cm).f1) /
         2.0;
}

double micro_f1(const ConfusionMatrix& cm) {
  require_non_empty(cm);
  // Pool per-class counts: each correct prediction is a true positive for its
  // class, each wrong one is a false positive for the predicted class and a
  // false negative for the actual class.
  const std::size_t pooled_tp = cm.tp + cm.tn;
  const std::size_t pooled_fp = cm.fp + cm.fn;
  const std::size_t pooled_fn = cm.fn + cm.fp;
  const double f1 = static_cast<double>(2 * pooled_tp) /
                    static_cast<double>(2 * pooled_tp + pooled_fp + pooled_fn);
  assert(f1 == ratio(cm.tp + cm.tn, cm.total()));
  return f1;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  require_non_empty(cm);
  if (cm.tp + cm.fn == 0 || cm.tn + cm.fp == 0) {
    throw Error(Errc::single_class_truth,
                "balanced accuracy needs both classes present in truth");
  }
  double recall_p = ratio(cm.tp, cm.tp + cm.fn);
  double recall_n = ratio(cm.tn, cm.tn + cm.fp);
  return (recall_p + recall_n) / 2.0;
}

MetricsReport MetricsReport::from_confusion(const ConfusionMatrix& cm,
                                            std::string detector_id,
                                            std::string dataset_id,
                                            std::size_t n_errors) {
  MetricsReport report;
  report.detector_id = std::move(detector_id);
  report.dataset_id = std::move(dataset_id);
  report.n_columns = cm.total();
  report.n_errors = n_errors;
  report.cm = cm;
  report.has_confusion = true;
  report.personal = personal_class_metrics(cm);
  report.non_personal = non_personal_class_metrics(cm);
  report.macro_f1 = pdd::macro_f1(cm);
  report.micro_f1 = pdd::micro_f1(cm);
  report.balanced_accuracy = pdd::balanced_accuracy(cm);
  return report;
}

nlohmann::json metrics_to_json(const MetricsReport& report) {
  nlohmann::json doc = {
      {"detector", report.detector_id},
      {"dataset", report.dataset_id},
      {"n_columns", report.n_columns},
      {"n_errors", report.n_errors},
      {"macro_f1", report.macro_f1},
      {"micro_f1", report.micro_f1},
      {"balanced_accuracy", report.balanced_accuracy},
      {"per_class",
       {{"personal",
         {{"precision", report.personal.precision},
          {"recall", report.personal.recall},
          {"f1", report.personal.f1}}},
        {"non_personal",
         {{"precision", report.non_personal.precision},
          {"recall", report.non_personal.recall},
          {"f1", report.non_personal.f1}}}}},
  };
  if (report.has_confusion) {
    doc["confusion"] = {{"tp", report.cm.tp},
                        {"fp", report.cm.fp},
                        {"fn", report.cm.fn},
                        {"tn", report.cm.tn}};
  }
  return doc;
}

MetricsReport metrics_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("detector") ||
      !doc.contains("dataset") || !doc.contains("macro_f1") ||
      !doc.contains("micro_f1") || !doc.contains("balanced_accuracy")) {
    throw Error(Errc::malformed_input,
                "metrics document must carry detector, dataset, and the "
                "three headline metrics");
  }
  MetricsReport report;
  report.detector_id = doc["detector"].get<std::string>();
  report.dataset_id = doc["dataset"].get<std::string>();
  report.macro_f1 = doc["macro_f1"].get<double>();
  report.micro_f1 = doc["micro_f1"].get<double>();
  report.balanced_accuracy = doc["balanced_accuracy"].get<double>();
  report.n_columns = doc.value("n_columns", std::size_t{0});
  report.n_errors = doc.value("n_errors", std::size_t{0});
  if (doc.contains("confusion")) {
    const auto& cm = doc["confusion"];
    report.cm = {cm.value("tp", std::size_t{0}), cm.value("fp", std::size_t{0}),
                 cm.value("fn", std::size_t{0}), cm.value("tn", std::size_t{0})};
    report.has_confusion = true;
  }
  if (doc.contains("per_class")) {
    const auto& pc = doc["per_class"];
    auto read = [](const nlohmann::json& c) {
      return ClassMetrics{c.value("precision", 0.0), c.value("recall", 0.0),
                          c.value("f1", 0.0)};
    };
    if (pc.contains("personal")) report.personal = read(pc["personal"]);
    if (pc.contains("non_personal"))
      report.non_personal = read(pc["non_personal"]);
  }
  return report;
}

MetricsReport load_metrics(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::unreadable_file, "cannot open '" + path + "'");
  }
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(Errc::malformed_input, "'" + path + "' is not valid JSON");
  }
  return metrics_from_json(doc);
}

// ---------------------------------------------------------------------------
// DeSSI class mapping
// ---------------------------------------------------------------------------

const std::vector<std::pair<std::string, bool>>& dessi_class_map() {
  static const std::vector<std::pair<std::string, bool>> kMap = {
      {"Phone number", true}, {"Address", true},     {"Person", true},
      {"Email", true},        {"NIN", true},         {"Date", true},
      {"Passport", true},     {"CCN", true},         {"ID Card", true},
      {"Sexuality", true},    {"Gender", true},      {"Nationality", true},
      {"Race", true},         {"Religion", true},    {"IBAN", true},
      {"Other data", false},  {"Organization", false}, {"GPE", false},
      {"SWIFT/BIC", false},   {"Geolocation", false},
  };
  return kMap;
}

bool dessi_class_is_personal(std::string_view class_name) {
  for (const auto& [name, personal] : dessi_class_map()) {
    if (name == class_name) return personal;
  }
  throw Error(Errc::unknown_class, "'" + std::string(class_name) + "'");
}

bool map_dessi(const std::vector<std::string>& class_names) {
  bool personal = false;
  for (const std::string& name : class_names) {
    if (dessi_class_is_personal(name)) personal = true;
  }
  return personal;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

namespace {

struct Grid {
  std::vector<std::string> detectors;  // column order of first appearance
  std::vector<std::string> datasets;   // block order of first appearance
  // dataset -> detector -> report
  std::map<std::string, std::map<std::string, const MetricsReport*>> cells;
};

Grid build_grid(const std::vector<MetricsReport>& reports) {
  Grid grid;
  for (const MetricsReport& report : reports) {
    if (std::find(grid.detectors.begin(), grid.detectors.end(),
                  report.detector_id) == grid.detectors.end()) {
      grid.detectors.push_back(report.detector_id);
    }
    if (std::find(grid.datasets.begin(), grid.datasets.end(),
                  report.dataset_id) == grid.datasets.end()) {
      grid.datasets.push_back(report.dataset_id);
    }
    grid.cells[report.dataset_id][report.detector_id] = &report;
  }
  return grid;
}

constexpr const char* kMetricLabels[3] = {"Macro F1", "Micro F1",
                                          "Balanced Acc."};
constexpr const char* kMetricKeys[3] = {"macro_f1", "micro_f1",
                                        "balanced_accuracy"};

double metric_value(const MetricsReport& report, int metric) {
  switch (metric) {
    case 0: return report.macro_f1;
    case 1: return report.micro_f1;
    default: return report.balanced_accuracy;
  }
}

std::string format3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

/// Unweighted mean over the datasets where the detector has a value.
std::optional<double> average_metric(const Grid& grid,
                                     const std::string& detector,
                                     int metric) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const std::string& dataset : grid.datasets) {
    auto ds_it = grid.cells.find(dataset);
    auto it = ds_it->second.find(detector);
    if (it == ds_it->second.end()) continue;
    sum += metric_value(*it->second, metric);
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::string render_markdown(const Grid& grid) {
  std::string out = "| Dataset | Metric |";
  for (const std::string& detector : grid.detectors) {
    out += " " + detector + " |";
  }
  out += "\n| --- | --- |";
  for (std::size_t i = 0; i < grid.detectors.size(); ++i) out += " --- |";
  out += "\n";

  auto emit_row = [&](const std::string& dataset, int metric,
                      bool average_block) {
    out += "| " + dataset + " | " + kMetricLabels[metric] + " |";
    for (const std::string& detector : grid.detectors) {
      if (average_block) {
        auto avg = average_metric(grid, detector, metric);
        out += avg ? " " + format3(*avg) + " |" : " - |";
      } else {
        auto it = grid.cells.at(dataset).find(detector);
        out += it != grid.cells.at(dataset).end()
                   ? " " + format3(metric_value(*it->second, metric)) + " |"
                   : " - |";
      }
    }
    out += "\n";
  };

  for (const std::string& dataset : grid.datasets) {
    for (int metric = 0; metric < 3; ++metric) emit_row(dataset, metric, false);
  }
  if (grid.datasets.size() > 1) {
    for (int metric = 0; metric < 3; ++metric) emit_row("Average", metric, true);
  }
  return out;
}

std::string render_json(const Grid& grid) {
  nlohmann::json doc;
  doc["detectors"] = grid.detectors;
  doc["datasets"] = nlohmann::json::array();
  for (const std::string& dataset : grid.datasets) {
    nlohmann::json block;
    block["dataset"] = dataset;
    for (int metric = 0; metric < 3; ++metric) {
      nlohmann::json values = nlohmann::json::object();
      for (const std::string& detector : grid.detectors) {
        auto it = grid.cells.at(dataset).find(detector);
        if (it != grid.cells.at(dataset).end()) {
          values[detector] = metric_value(*it->second, metric);
        }
      }
      block[kMetricKeys[metric]] = std::move(values);
    }
    doc["datasets"].push_back(std::move(block));
  }
  if (grid.datasets.size() > 1) {
    nlohmann::json average;
    for (int metric = 0; metric < 3; ++metric) {
      nlohmann::json values = nlohmann::json::object();
      for (const std::string& detector : grid.detectors) {
        if (auto avg = average_metric(grid, detector, metric)) {
          values[detector] = *avg;
        }
      }
      average[kMetricKeys[metric]] = std::move(values);
    }
    doc["average"] = std::move(average);
  }
  return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const std::vector<MetricsReport>& reports,
                          ReportFormat format) {
  if (reports.empty()) {
    throw Error(Errc::invalid_argument, "render_report needs >= 1 report");
  }
  Grid grid = build_grid(reports);
  return format == ReportFormat::markdown ? render_markdown(grid)
                                          : render_json(grid);
}

}  // namespace pdd
