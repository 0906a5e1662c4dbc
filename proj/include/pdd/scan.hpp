#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdd/corpus.hpp"
#include "pdd/llm.hpp"
#include "pdd/rules.hpp"
#include "pdd/verdict.hpp"

namespace pdd {

enum class DetectorKind { rules, llm };

std::string_view detector_name(DetectorKind d);

/// Effective settings for one scan or eval run. Flags override config-file
/// values which override these defaults.
struct RunConfig {
  DetectorKind detector = DetectorKind::rules;
  std::size_t values_per_column = 10;
  AggregationPolicy policy;
  TransportConfig transport;
  std::string dataset_path;
  std::string meta_path;
  std::string labels_path;
  std::string mock_path;
  std::string out_path;
  std::string names_list_path;
  std::string locations_list_path;
  std::size_t workers = 1;
  char delimiter = ',';
};

struct ColumnError {
  std::string column;
  std::string message;
};

struct ScanResult {
  std::vector<ColumnVerdict> verdicts;  // dataset column order
  std::vector<ColumnError> errors;      // dataset column order
  std::size_t requests = 0;             // transport request counter
};

/// Classifies every column of the dataset with the configured detector.
/// Columns are processed by a bounded worker pool (config.workers); results
/// are always emitted in dataset column order. Per-column failures become
/// error entries instead of aborting the scan. `transport` may be null for
/// the rules detector.
ScanResult scan_dataset(const Dataset& ds, const RunConfig& config,
                        Transport* transport);

/// Renders the predictions document: the effective result-affecting config
/// (secrets and worker count excluded) plus one entry per column in dataset
/// order. Byte-stable for identical (config, dataset, replies).
std::string predictions_to_json(const Dataset& ds, const RunConfig& config,
                                const ScanResult& result);

/// A parsed predictions document. Readers accept both the wrapped object
/// written by scan and a bare entry array.
struct PredictionsFile {
  std::string detector;
  std::string dataset;
  nlohmann::json config;
  std::vector<ColumnVerdict> predictions;
  std::vector<ColumnError> errors;
};

PredictionsFile load_predictions(const std::string& path);

}  // namespace pdd
