#include "pdd/rules.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <regex>
#include <unordered_set>

namespace pdd {

namespace {

// Fixed confidences for pattern-only recognizers; checksum-validated hits
// (CREDIT_CARD, IBAN_CODE) always score 1.0.
constexpr double kConfEmail = 1.0;
constexpr double kConfUrl = 0.9;
constexpr double kConfIp = 0.9;
constexpr double kConfPhone = 0.6;
constexpr double kConfDateTime = 0.6;
constexpr double kConfLookup = 0.4;
constexpr double kConfDefault = 0.5;

// Builtin given-name lookup list; override with Options::names_list_path.
constexpr const char* kGivenNames[] = {
    "tom", "walter", "mia", "lena", "john", "jack", "felice", "anna",
    "lukas", "will", "james", "mary", "robert", "patricia", "michael",
    "linda", "david", "barbara", "william", "elizabeth", "richard", "susan",
    "joseph", "jessica", "thomas", "sarah", "charles", "karen",
    "christopher", "nancy", "daniel", "lisa", "matthew", "betty", "anthony",
    "margaret", "mark", "sandra", "donald", "ashley", "steven", "kimberly",
    "paul", "emily", "andrew", "donna", "joshua", "michelle", "kenneth",
    "dorothy", "kevin", "carol", "brian", "amanda", "george", "melissa",
    "edward", "deborah", "ronald", "stephanie", "timothy", "rebecca",
    "jason", "sharon", "jeffrey", "laura", "ryan", "cynthia", "jacob",
    "kathleen", "gary", "amy", "nicholas", "angela", "eric", "shirley",
    "jonathan", "brenda", "stephen", "emma", "larry", "olivia", "justin",
    "sophia", "scott", "isabella", "brandon", "charlotte", "benjamin",
    "amelia", "samuel", "evelyn", "gregory", "abigail", "frank", "harper",
    "alexander", "luna", "raymond", "camila", "patrick", "gianna", "hans",
    "pierre", "marie", "claire", "giulia", "marco", "sofia", "ivan", "olga",
    "yuki", "wei", "ahmed", "fatima", "omar", "aisha", "carlos", "lucia",
    "pedro", "ana", "miguel", "ines", "diego", "alejandro", "valentina",
};

// Builtin location lookup list (countries and major cities); override with
// Options::locations_list_path.
constexpr const char* kLocations[] = {
    "germany", "france", "spain", "italy", "portugal", "brazil",
    "argentina", "chile", "mexico", "canada", "england", "scotland",
    "ireland", "poland", "austria", "switzerland", "belgium", "netherlands",
    "denmark", "sweden", "norway", "finland", "croatia", "serbia", "greece",
    "turkey", "egypt", "morocco", "nigeria", "kenya", "india", "china",
    "japan", "korea", "vietnam", "thailand", "indonesia", "australia",
    "russia", "ukraine", "london", "paris", "berlin", "madrid", "rome",
    "lisbon", "vienna", "zurich", "geneva", "amsterdam", "brussels",
    "copenhagen", "stockholm", "oslo", "helsinki", "warsaw", "prague",
    "budapest", "athens", "istanbul", "cairo", "lagos", "nairobi", "mumbai",
    "delhi", "beijing", "shanghai", "tokyo", "osaka", "seoul", "hanoi",
    "bangkok", "jakarta", "sydney", "melbourne", "moscow", "kyiv",
    "toronto", "montreal", "chicago", "boston", "seattle", "denver",
    "dallas", "houston", "phoenix", "miami", "atlanta", "detroit",
    "philadelphia", "campinas", "niteroi",
};

const std::array<EntityKind, kEntityKindCount> kAllKinds = {
    EntityKind::CREDIT_CARD,    EntityKind::CRYPTO,
    EntityKind::EMAIL_ADDRESS,  EntityKind::IBAN_CODE,
    EntityKind::NRP,            EntityKind::PERSON,
    EntityKind::PHONE_NUMBER,   EntityKind::US_SSN,
    EntityKind::US_BANK_NUMBER, EntityKind::US_DRIVER_LICENSE,
    EntityKind::US_ITIN,        EntityKind::US_PASSPORT,
    EntityKind::DATE_TIME,      EntityKind::IP_ADDRESS,
    EntityKind::LOCATION,       EntityKind::URL,
    EntityKind::AU_ABN,         EntityKind::AU_ACN,
};

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ascii_alpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_ascii_alnum(char c) { return is_ascii_digit(c) || is_ascii_alpha(c); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

}  // namespace

const std::array<EntityKind, kEntityKindCount>& all_entity_kinds() {
  return kAllKinds;
}

bool entity_is_personal(EntityKind kind) {
  switch (kind) {
    case EntityKind::CREDIT_CARD:
    case EntityKind::CRYPTO:
    case EntityKind::EMAIL_ADDRESS:
    case EntityKind::IBAN_CODE:
    case EntityKind::NRP:
    case EntityKind::PERSON:
    case EntityKind::PHONE_NUMBER:
    case EntityKind::US_SSN:
    case EntityKind::US_BANK_NUMBER:
    case EntityKind::US_DRIVER_LICENSE:
    case EntityKind::US_ITIN:
    case EntityKind::US_PASSPORT:
      return true;
    case EntityKind::DATE_TIME:
    case EntityKind::IP_ADDRESS:
    case EntityKind::LOCATION:
    case EntityKind::URL:
    case EntityKind::AU_ABN:
    case EntityKind::AU_ACN:
      return false;
  }
  throw Error(Errc::unknown_entity_kind, "invalid EntityKind value");
}

std::string_view entity_kind_name(EntityKind kind) {
  switch (kind) {
    case EntityKind::CREDIT_CARD: return "CREDIT_CARD";
    case EntityKind::CRYPTO: return "CRYPTO";
    case EntityKind::EMAIL_ADDRESS: return "EMAIL_ADDRESS";
    case EntityKind::IBAN_CODE: return "IBAN_CODE";
    case EntityKind::NRP: return "NRP";
    case EntityKind::PERSON: return "PERSON";
    case EntityKind::PHONE_NUMBER: return "PHONE_NUMBER";
    case EntityKind::US_SSN: return "US_SSN";
    case EntityKind::US_BANK_NUMBER: return "US_BANK_NUMBER";
    case EntityKind::US_DRIVER_LICENSE: return "US_DRIVER_LICENSE";
    case EntityKind::US_ITIN: return "US_ITIN";
    case EntityKind::US_PASSPORT: return "US_PASSPORT";
    case EntityKind::DATE_TIME: return "DATE_TIME";
    case EntityKind::IP_ADDRESS: return "IP_ADDRESS";
    case EntityKind::LOCATION: return "LOCATION";
    case EntityKind::URL: return "URL";
    case EntityKind::AU_ABN: return "AU_ABN";
    case EntityKind::AU_ACN: return "AU_ACN";
  }
  return "UNKNOWN";
}

EntityKind entity_kind_from_name(std::string_view name) {
  for (EntityKind kind : kAllKinds) {
    if (entity_kind_name(kind) == name) return kind;
  }
  if (name == "SSN") return EntityKind::US_SSN;  // printed alias
  throw Error(Errc::unknown_entity_kind, "'" + std::string(name) + "'");
}

std::string_view strategy_name(Strategy s) {
  return s == Strategy::columnwise ? "columnwise" : "rowwise";
}

Strategy strategy_from_name(std::string_view name) {
  if (name == "columnwise") return Strategy::columnwise;
  if (name == "rowwise") return Strategy::rowwise;
  throw Error(Errc::invalid_argument,
              "unknown strategy '" + std::string(name) + "'");
}

std::string serialize_columnwise(const Column& col) {
  if (!col.has_non_empty_value()) {
    throw Error(Errc::empty_column,
                "column '" + col.name + "' has no non-empty values");
  }
  std::string out = col.name;
  for (const auto& v : col.values) {
    if (v.empty()) continue;
    out += '\n';
    out += v;
  }
  return out;
}

std::string serialize_rowwise(const Dataset& ds, std::size_t row) {
  if (row >= ds.row_count()) {
    throw Error(Errc::row_out_of_range,
                "row " + std::to_string(row) + " of " +
                    std::to_string(ds.row_count()));
  }
  std::string out;
  for (const auto& col : ds.columns) {
    const std::string& v = col.values[row];
    if (v.empty()) continue;
    if (!out.empty()) out += ' ';
    out += v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checksums
// ---------------------------------------------------------------------------

bool luhn_checksum_ok(std::string_view digits) {
  // Doubled-digit lookup: 2*d folded back to a single digit.
  static constexpr int kDoubled[10] = {0, 2, 4, 6, 8, 1, 3, 5, 7, 9};
  int sum = 0;
  bool double_next = false;
  for (std::size_t i = digits.size(); i > 0; --i) {
    int d = digits[i - 1] - '0';
    sum += double_next ? kDoubled[d] : d;
    double_next = !double_next;
  }
  return sum % 10 == 0;
}

bool luhn_valid(std::string_view text) {
  std::string digits;
  digits.reserve(text.size());
  for (char c : text) {
    if (c == ' ' || c == '-') continue;
    if (!is_ascii_digit(c)) {
      throw Error(Errc::not_digits,
                  "luhn input contains a non-digit character");
    }
    digits.push_back(c);
  }
  if (digits.size() < 12 || digits.size() > 19) {
    throw Error(Errc::bad_length, "luhn input must be 12-19 digits, got " +
                                      std::to_string(digits.size()));
  }
  return luhn_checksum_ok(digits);
}

namespace {

/// mod-97 of the rearranged, letter-expanded IBAN; input must already be
/// normalized (no spaces, uppercase handled here).
int iban_mod97(std::string_view normalized) {
  // Move the first four characters to the end, then stream mod 97 with
  // letters expanded to two digits (A=10 .. Z=35).
  std::string rearranged(normalized.substr(4));
  rearranged += normalized.substr(0, 4);
  long long r = 0;
  for (char c : rearranged) {
    if (is_ascii_digit(c)) {
      r = (r * 10 + (c - '0')) % 97;
    } else {
      int v = std::toupper(static_cast<unsigned char>(c)) - 'A' + 10;
      r = (r * 100 + v) % 97;
    }
  }
  return static_cast<int>(r);
}

bool iban_shape_ok(std::string_view s) {
  if (s.size() < 4 || s.size() > 34) return false;
  if (!is_ascii_alpha(s[0]) || !is_ascii_alpha(s[1])) return false;
  if (!is_ascii_digit(s[2]) || !is_ascii_digit(s[3])) return false;
  return std::all_of(s.begin() + 4, s.end(), is_ascii_alnum);
}

}  // namespace

bool iban_valid(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (char c : text) {
    if (c == ' ') continue;
    s.push_back(c);
  }
  if (!iban_shape_ok(s)) {
    throw Error(Errc::bad_format,
                "iban input must be 2 letters + 2 digits + up to 30 "
                "alphanumerics");
  }
  return iban_mod97(s) == 1;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace {

struct PatternRule {
  EntityKind kind;
  std::regex pattern;
  double confidence;
};

std::unordered_set<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::unreadable_file, "cannot open word list '" + path + "'");
  }
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string token = to_lower(trim(line));
    if (!token.empty() && token[0] != '#') words.insert(std::move(token));
  }
  return words;
}

std::unordered_set<std::string> builtin_list(const char* const* begin,
                                             std::size_t count) {
  std::unordered_set<std::string> words;
  for (std::size_t i = 0; i < count; ++i) words.insert(begin[i]);
  return words;
}

}  // namespace

struct RuleEngine::Impl {
  std::vector<PatternRule> patterns;
  std::unordered_set<std::string> given_names;
  std::unordered_set<std::string> locations;

  explicit Impl(const Options& options) {
    if (options.names_list_path.empty()) {
      given_names = builtin_list(kGivenNames, std::size(kGivenNames));
    } else {
      given_names = load_word_list(options.names_list_path);
    }
    if (options.locations_list_path.empty()) {
      locations = builtin_list(kLocations, std::size(kLocations));
    } else {
      locations = load_word_list(options.locations_list_path);
    }
    build_patterns();
  }

  void add(EntityKind kind, const char* pattern, double confidence,
           bool icase = false) {
    auto flags = std::regex::ECMAScript | std::regex::optimize;
    if (icase) flags |= std::regex::icase;
    patterns.push_back({kind, std::regex(pattern, flags), confidence});
  }

  void build_patterns() {
    add(EntityKind::EMAIL_ADDRESS,
        R"(\b[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}\b)",
        kConfEmail);
    // Scheme or www prefix required; bare domains stay quiet.
    add(EntityKind::URL, R"((?:https?://|www\.)[^\s"'<>,;]+)", kConfUrl,
        true);
    add(EntityKind::IP_ADDRESS,
        R"(\b(?:(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)\.){3}(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)\b)",
        kConfIp);
    // Conservative IPv6: at least four colon-separated hex groups, so
    // hh:mm:ss times stay out.
    add(EntityKind::IP_ADDRESS,
        R"(\b(?:[0-9A-Fa-f]{1,4}:){3,7}[0-9A-Fa-f]{1,4}\b)", kConfIp);
    // Phone shapes require separators or an international prefix so that bare
    // digit runs (ids, measurements) stay quiet.
    add(EntityKind::PHONE_NUMBER,
        R"(\+\d{1,3}[ .-]?\(?\d{1,4}\)?(?:[ .-]\d{2,4}){2,4}\b)", kConfPhone);
    add(EntityKind::PHONE_NUMBER, R"(\(\d{3}\)[ .-]?\d{3}[ .-]\d{4}\b)",
        kConfPhone);
    add(EntityKind::PHONE_NUMBER, R"(\b\d{3}[ .-]\d{3}[ .-]\d{4}\b)",
        kConfPhone);
    add(EntityKind::DATE_TIME,
        R"(\b\d{4}-(?:0[1-9]|1[0-2])-(?:0[1-9]|[12]\d|3[01])\b)",
        kConfDateTime);
    add(EntityKind::DATE_TIME,
        R"(\b(?:0?[1-9]|1[0-2])/(?:0?[1-9]|[12]\d|3[01])/(?:19|20)\d{2}\b)",
        kConfDateTime);
    add(EntityKind::DATE_TIME,
        R"(\b(?:0?[1-9]|[12]\d|3[01])\.(?:0?[1-9]|1[0-2])\.(?:19|20)\d{2}\b)",
        kConfDateTime);
    add(EntityKind::DATE_TIME, R"(\b(?:[01]?\d|2[0-3]):[0-5]\d(?::[0-5]\d)?\b)",
        kConfDateTime);
    add(EntityKind::DATE_TIME,
        R"(\b(?:Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec)[a-z]* \d{1,2},? \d{4}\b)",
        kConfDateTime);
    add(EntityKind::US_SSN, R"(\b(?!000|666|9\d\d)\d{3}-(?!00)\d{2}-(?!0000)\d{4}\b)",
        kConfDefault);
    add(EntityKind::US_ITIN, R"(\b9\d{2}-[78]\d-\d{4}\b)", kConfDefault);
    add(EntityKind::CRYPTO,
        R"(\b(?:bc1[a-z0-9]{25,62}|[13][a-km-zA-HJ-NP-Z1-9]{25,34})\b)",
        kConfDefault);
    // Context-gated stubs: these fire only next to an explicit keyword, so
    // the binary mapping covers every kind without flooding plain numeric
    // text.
    add(EntityKind::US_BANK_NUMBER,
        R"(\b(?:account|acct)(?:\s*(?:no|number))?\s*[:#]?\s*\d{8,17}\b)",
        kConfDefault, true);
    add(EntityKind::US_DRIVER_LICENSE,
        R"(\b(?:driver'?s?\s+licen[sc]e|dl)(?:\s*(?:no|number))?\s*[:#]?\s*[A-Z0-9]{5,13}\b)",
        kConfDefault, true);
    add(EntityKind::US_PASSPORT,
        R"(\bpassport(?:\s*(?:no|number))?\s*[:#]?\s*(?:[A-Z]\d{8}|\d{9})\b)",
        kConfDefault, true);
    add(EntityKind::AU_ABN,
        R"(\babn(?:\s*(?:no|number))?\s*[:#]?\s*\d{2}\s?\d{3}\s?\d{3}\s?\d{3}\b)",
        kConfDefault, true);
    add(EntityKind::AU_ACN,
        R"(\bacn(?:\s*(?:no|number))?\s*[:#]?\s*\d{3}\s?\d{3}\s?\d{3}\b)",
        kConfDefault, true);
    add(EntityKind::NRP,
        R"(\b(?:american|british|german|french|chinese|indian|brazilian|croatian|italian|spanish|muslim|christian|jewish|buddhist|hindu|catholic|protestant|democrat|republican)s?\b)",
        kConfDefault, true);
  }
};

RuleEngine::RuleEngine() : impl_(std::make_unique<Impl>(Options{})) {}
RuleEngine::RuleEngine(const Options& options)
    : impl_(std::make_unique<Impl>(options)) {}
RuleEngine::~RuleEngine() = default;
RuleEngine::RuleEngine(RuleEngine&&) noexcept = default;
RuleEngine& RuleEngine::operator=(RuleEngine&&) noexcept = default;

namespace {

/// Maximal runs of digits, spaces, and hyphens; candidates for checksum-backed
/// recognizers. Returns trimmed [begin, end) spans.
std::vector<Span> digit_runs(std::string_view text) {
  std::vector<Span> runs;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_ascii_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    std::size_t last_digit = i;
    while (i < text.size() &&
           (is_ascii_digit(text[i]) || text[i] == ' ' || text[i] == '-')) {
      if (is_ascii_digit(text[i])) last_digit = i;
      ++i;
    }
    runs.push_back({begin, last_digit + 1});
  }
  return runs;
}

std::string strip_separators(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != ' ' && c != '-') out.push_back(c);
  }
  return out;
}

void add_credit_card_hits(std::string_view text,
                          std::vector<EntityHit>& hits) {
  for (const Span& run : digit_runs(text)) {
    std::string_view raw = text.substr(run.begin, run.end - run.begin);
    std::string digits = strip_separators(raw);
    if (digits.size() < 12 || digits.size() > 19) continue;
    if (!std::all_of(digits.begin(), digits.end(), is_ascii_digit)) continue;
    if (!luhn_checksum_ok(digits)) continue;
    hits.push_back({EntityKind::CREDIT_CARD, 1.0, 0, run});
  }
}

void add_iban_hits(std::string_view text, std::vector<EntityHit>& hits) {
  static const std::regex candidate(
      R"(\b[A-Za-z]{2}\d{2}(?: ?[A-Za-z0-9]{1,4})+\b)",
      std::regex::ECMAScript | std::regex::optimize);
  auto begin = std::cregex_iterator(text.data(), text.data() + text.size(),
                                    candidate);
  for (auto it = begin; it != std::cregex_iterator(); ++it) {
    std::string normalized = strip_separators(it->str());
    if (!iban_shape_ok(normalized)) continue;
    if (iban_mod97(normalized) != 1) continue;
    std::size_t b = static_cast<std::size_t>(it->position());
    hits.push_back({EntityKind::IBAN_CODE, 1.0, 0,
                    {b, b + static_cast<std::size_t>(it->length())}});
  }
}

/// Word-boundary token scan against a lowercase lookup set.
void add_lookup_hits(std::string_view text,
                     const std::unordered_set<std::string>& words,
                     EntityKind kind, std::vector<EntityHit>& hits) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_ascii_alpha(text[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < text.size() && is_ascii_alpha(text[i])) ++i;
    std::string token = to_lower(text.substr(begin, i - begin));
    if (words.count(token)) {
      hits.push_back({kind, kConfLookup, 0, {begin, i}});
    }
  }
}

/// Drops overlapping spans within each kind, keeping the earliest start and,
/// on equal starts, the longest match.
void dedupe_same_kind(std::vector<EntityHit>& hits) {
  std::stable_sort(hits.begin(), hits.end(),
                   [](const EntityHit& a, const EntityHit& b) {
                     if (a.kind != b.kind) return a.kind < b.kind;
                     if (a.span.begin != b.span.begin)
                       return a.span.begin < b.span.begin;
                     return a.span.end > b.span.end;
                   });
  std::vector<EntityHit> out;
  out.reserve(hits.size());
  for (const EntityHit& h : hits) {
    if (!out.empty() && out.back().kind == h.kind &&
        h.span.begin < out.back().span.end) {
      continue;
    }
    out.push_back(h);
  }
  hits = std::move(out);
}

}  // namespace

std::vector<EntityHit> RuleEngine::recognize(std::string_view text) const {
  std::vector<EntityHit> hits;
  if (text.empty()) return hits;

  for (const PatternRule& rule : impl_->patterns) {
    auto begin = std::cregex_iterator(text.data(), text.data() + text.size(),
                                      rule.pattern);
    for (auto it = begin; it != std::cregex_iterator(); ++it) {
      std::size_t b = static_cast<std::size_t>(it->position());
      hits.push_back({rule.kind, rule.confidence, 0,
                      {b, b + static_cast<std::size_t>(it->length())}});
    }
  }
  add_credit_card_hits(text, hits);
  add_iban_hits(text, hits);
  add_lookup_hits(text, impl_->given_names, EntityKind::PERSON, hits);
  add_lookup_hits(text, impl_->locations, EntityKind::LOCATION, hits);

  dedupe_same_kind(hits);
  return hits;
}

namespace {

void check_policy(const AggregationPolicy& policy) {
  if (policy.min_hits < 1) {
    throw Error(Errc::invalid_argument, "min_hits must be >= 1");
  }
  if (policy.min_confidence < 0.0 || policy.min_confidence > 1.0) {
    throw Error(Errc::invalid_argument, "min_confidence must be in [0, 1]");
  }
}

ColumnVerdict verdict_from_counts(
    const std::string& column_name,
    const std::map<EntityKind, std::size_t>& counts,
    const AggregationPolicy& policy) {
  ColumnVerdict verdict;
  verdict.column_name = column_name;
  verdict.detector = "rules";
  for (const auto& [kind, count] : counts) {
    if (count < policy.min_hits) continue;
    verdict.entity_kinds.emplace_back(entity_kind_name(kind));
    if (entity_is_personal(kind)) verdict.is_personal = true;
  }
  return verdict;
}

}  // namespace

ColumnVerdict RuleEngine::classify_column(
    const Column& col, const AggregationPolicy& policy) const {
  check_policy(policy);
  if (!col.has_non_empty_value()) {
    throw Error(Errc::empty_column,
                "column '" + col.name + "' has no non-empty values");
  }
  std::map<EntityKind, std::size_t> counts;
  for (std::size_t row = 0; row < col.values.size(); ++row) {
    const std::string& cell = col.values[row];
    if (cell.empty()) continue;
    for (EntityHit hit : recognize(cell)) {
      if (hit.confidence < policy.min_confidence) continue;
      hit.cell_index = row;
      ++counts[hit.kind];
    }
  }
  return verdict_from_counts(col.name, counts, policy);
}

std::vector<ColumnVerdict> RuleEngine::classify_dataset(
    const Dataset& ds, const AggregationPolicy& policy) const {
  check_policy(policy);
  if (policy.strategy == Strategy::columnwise) {
    std::vector<ColumnVerdict> verdicts;
    verdicts.reserve(ds.columns.size());
    for (const auto& col : ds.columns) {
      verdicts.push_back(classify_column(col, policy));
    }
    return verdicts;
  }

  // Row-wise: recognize each serialized row, attribute every hit back to the
  // column whose cell contains the span start.
  std::vector<std::map<EntityKind, std::size_t>> counts(ds.columns.size());
  const std::size_t rows = ds.row_count();
  for (std::size_t row = 0; row < rows; ++row) {
    std::string text;
    struct CellRef {
      std::size_t column;
      std::size_t begin;
      std::size_t end;
    };
    std::vector<CellRef> cells;
    for (const auto& col : ds.columns) {
      const std::string& v = col.values[row];
      if (v.empty()) continue;
      if (!text.empty()) text += ' ';
      cells.push_back({col.position, text.size(), text.size() + v.size()});
      text += v;
    }
    if (text.empty()) continue;
    for (const EntityHit& hit : recognize(text)) {
      if (hit.confidence < policy.min_confidence) continue;
      for (const CellRef& cell : cells) {
        if (hit.span.begin >= cell.begin && hit.span.begin < cell.end) {
          ++counts[cell.column][hit.kind];
          break;
        }
      }
    }
  }

  std::vector<ColumnVerdict> verdicts;
  verdicts.reserve(ds.columns.size());
  for (const auto& col : ds.columns) {
    verdicts.push_back(verdict_from_counts(col.name, counts[col.position],
                                           policy));
  }
  return verdicts;
}

}  // namespace pdd
