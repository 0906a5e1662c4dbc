#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pdd/error.hpp"

namespace pdd {

/// One named column of string-coerced cell values. Missing cells are stored
/// as empty text and carry no signal for sampling or recognition.
struct Column {
  std::string name;
  std::vector<std::string> values;  // row order preserved
  std::size_t position = 0;         // zero-based index within the dataset

  bool has_non_empty_value() const;
};

bool operator==(const Column& a, const Column& b);

/// A titled, described collection of columns loaded from a delimited file
/// plus its metadata sidecar.
struct Dataset {
  std::string title;
  std::string description;
  std::vector<Column> columns;
  std::string source_path;

  std::size_t row_count() const;
  const Column* find_column(std::string_view name) const;
};

/// Content equality; source_path is provenance and not compared.
bool operator==(const Dataset& a, const Dataset& b);

/// Column name -> binary label (true = personal).
class AnnotationSet {
 public:
  AnnotationSet() = default;

  void insert(std::string name, bool personal);
  bool contains(std::string_view name) const;
  bool at(std::string_view name) const;  // throws UnknownColumn
  std::size_t size() const { return labels_.size(); }
  const std::map<std::string, bool>& labels() const { return labels_; }

 private:
  std::map<std::string, bool> labels_;
};

/// Up to k distinct non-empty values ranked by descending frequency,
/// ties broken by first occurrence in row order.
struct ValueSample {
  std::vector<std::string> values;
  std::size_t k = 0;  // count requested
};

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Loads a header-bearing delimited file plus its `<name>.meta.json` sidecar.
/// Column names are trimmed and must be unique; every column must contain at
/// least one non-empty cell. Short rows are padded with empty cells.
Dataset load_dataset(const std::string& csv_path, const std::string& meta_path,
                     char delimiter = ',');

/// Loads a `<name>.labels.json` object mapping column name -> boolean.
/// Every key must name a column of `ds`; partial annotation is allowed.
AnnotationSet load_annotations(const std::string& labels_path,
                               const Dataset& ds);

/// Same file format without binding to a dataset; used when scoring a
/// predictions file whose dataset is not at hand.
AnnotationSet load_labels(const std::string& labels_path);

ValueSample sample_top_k(const Column& col, std::size_t k);

/// Serializes back to delimited text (header + rows); fields are quoted when
/// they contain the delimiter, a quote, or a line break. Round-trips through
/// load_dataset.
std::string to_csv(const Dataset& ds, char delimiter = ',');

/// Caps a description at `max_chars` (including the marker), cutting at a
/// word boundary and appending " ...". UTF-8 sequences are never split.
std::string truncate_description(std::string_view text,
                                 std::size_t max_chars = 2000);

/// Parses delimited text: quoted fields may contain the delimiter, quotes
/// escaped by doubling, and embedded line breaks.
std::vector<std::vector<std::string>> parse_delimited(std::string_view text,
                                                      char delimiter);

std::string trim(std::string_view s);

}  // namespace pdd
