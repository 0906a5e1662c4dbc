#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdd {

/// Error categories shared across the library. Each maps to one failure
/// condition a caller may want to branch on.
enum class Errc {
  // corpus
  missing_header,
  duplicate_column,
  unreadable_file,
  malformed_metadata,
  malformed_csv,
  empty_column,
  unknown_column,
  malformed_labels,
  // rules
  row_out_of_range,
  not_digits,
  bad_length,
  bad_format,
  unknown_entity_kind,
  // llm
  column_not_in_dataset,
  unparseable_reply,
  column_mismatch,
  transport_error,
  // eval
  missing_label,
  empty_evaluation,
  single_class_truth,
  unknown_class,
  malformed_input,
  // cli / general
  config_error,
  invalid_argument,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::missing_header: return "MissingHeader";
    case Errc::duplicate_column: return "DuplicateColumn";
    case Errc::unreadable_file: return "UnreadableFile";
    case Errc::malformed_metadata: return "MalformedMetadata";
    case Errc::malformed_csv: return "MalformedCsv";
    case Errc::empty_column: return "EmptyColumn";
    case Errc::unknown_column: return "UnknownColumn";
    case Errc::malformed_labels: return "MalformedLabels";
    case Errc::row_out_of_range: return "RowOutOfRange";
    case Errc::not_digits: return "NotDigits";
    case Errc::bad_length: return "BadLength";
    case Errc::bad_format: return "BadFormat";
    case Errc::unknown_entity_kind: return "UnknownEntityKind";
    case Errc::column_not_in_dataset: return "ColumnNotInDataset";
    case Errc::unparseable_reply: return "UnparseableReply";
    case Errc::column_mismatch: return "ColumnMismatch";
    case Errc::transport_error: return "TransportError";
    case Errc::missing_label: return "MissingLabel";
    case Errc::empty_evaluation: return "EmptyEvaluation";
    case Errc::single_class_truth: return "SingleClassTruth";
    case Errc::unknown_class: return "UnknownClass";
    case Errc::malformed_input: return "MalformedInput";
    case Errc::config_error: return "ConfigError";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace pdd
