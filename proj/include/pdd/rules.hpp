#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pdd/corpus.hpp"
#include "pdd/error.hpp"
#include "pdd/verdict.hpp"

namespace pdd {

/// Entity inventory of the rule engine. The first twelve kinds classify as
/// personal, the remaining six as non-personal.
enum class EntityKind {
  CREDIT_CARD,
  CRYPTO,
  EMAIL_ADDRESS,
  IBAN_CODE,
  NRP,
  PERSON,
  PHONE_NUMBER,
  US_SSN,
  US_BANK_NUMBER,
  US_DRIVER_LICENSE,
  US_ITIN,
  US_PASSPORT,
  DATE_TIME,
  IP_ADDRESS,
  LOCATION,
  URL,
  AU_ABN,
  AU_ACN,
};

inline constexpr std::size_t kEntityKindCount = 18;

const std::array<EntityKind, kEntityKindCount>& all_entity_kinds();
bool entity_is_personal(EntityKind kind);
std::string_view entity_kind_name(EntityKind kind);

/// Resolves a kind token; "SSN" is accepted as an alias of US_SSN. Any other
/// unknown token raises UnknownEntityKind rather than defaulting.
EntityKind entity_kind_from_name(std::string_view name);

/// Half-open character range within one cell's text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// One recognizer firing on one cell.
struct EntityHit {
  EntityKind kind;
  double confidence = 0.0;
  std::size_t cell_index = 0;
  Span span;
};

enum class Strategy { columnwise, rowwise };

std::string_view strategy_name(Strategy s);
Strategy strategy_from_name(std::string_view name);  // throws InvalidArgument

/// Two-threshold aggregation: an entity kind counts for a column only when
/// at least min_hits of its hits clear min_confidence.
struct AggregationPolicy {
  std::size_t min_hits = 3;
  double min_confidence = 0.4;
  Strategy strategy = Strategy::columnwise;
};

// ---------------------------------------------------------------------------
// Serialization of tabular data into recognizer input
// ---------------------------------------------------------------------------

/// Column name followed by all non-empty cell values, newline-separated.
std::string serialize_columnwise(const Column& col);

/// All non-empty cell values of one row joined by single spaces, column order.
std::string serialize_rowwise(const Dataset& ds, std::size_t row);

// ---------------------------------------------------------------------------
// Checksums
// ---------------------------------------------------------------------------

/// Luhn mod-10 check over a digit string of any positive length.
bool luhn_checksum_ok(std::string_view digits);

/// Strips spaces and hyphens, then requires 12-19 ASCII digits
/// (NotDigits/BadLength otherwise) and a passing Luhn checksum.
bool luhn_valid(std::string_view text);

/// Strips spaces, then requires 2 letters + 2 digits + up to 30 alphanumerics
/// (BadFormat otherwise); true iff the rearranged, letter-expanded integer is
/// congruent to 1 mod 97.
bool iban_valid(std::string_view text);

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

/// Deterministic recognizer set: regex patterns, checksum validation for
/// CREDIT_CARD and IBAN_CODE, and word-list lookups for PERSON and LOCATION.
/// Immutable after construction and safe to share across threads.
class RuleEngine {
 public:
  struct Options {
    std::string names_list_path;      // empty -> builtin list
    std::string locations_list_path;  // empty -> builtin list
  };

  RuleEngine();
  explicit RuleEngine(const Options& options);
  ~RuleEngine();
  RuleEngine(RuleEngine&&) noexcept;
  RuleEngine& operator=(RuleEngine&&) noexcept;

  /// All entity hits in one text. Spans are relative to the text; hits of the
  /// same kind never overlap. cell_index is 0.
  std::vector<EntityHit> recognize(std::string_view text) const;

  /// Column-wise classification: recognize every non-empty cell, apply the
  /// two-threshold policy, map surviving kinds to a binary verdict.
  ColumnVerdict classify_column(const Column& col,
                                const AggregationPolicy& policy) const;

  /// Classifies every column honoring policy.strategy. In row-wise mode each
  /// hit counts toward the column containing the matched span's cell.
  std::vector<ColumnVerdict> classify_dataset(
      const Dataset& ds, const AggregationPolicy& policy) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pdd
