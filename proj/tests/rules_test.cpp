#include "pdd/rules.hpp"

#include <algorithm>
#include <random>

#include "doctest.h"

using namespace pdd;

TEST_SUITE_BEGIN("rules");

namespace {

// Independent Luhn oracle: plain doubling sum, no shared code with the
// implementation.
bool oracle_luhn(const std::string& digits) {
  int sum = 0;
  bool second = false;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    int d = *it - '0';
    if (second) {
      d *= 2;
      if (d > 9) d -= 9;
    }
    sum += d;
    second = !second;
  }
  return sum % 10 == 0;
}

// Independent IBAN oracle using string-based big-integer mod.
bool oracle_iban(const std::string& iban) {
  std::string rearranged = iban.substr(4) + iban.substr(0, 4);
  std::string expanded;
  for (char c : rearranged) {
    if (c >= 'A' && c <= 'Z') {
      expanded += std::to_string(c - 'A' + 10);
    } else {
      expanded += c;
    }
  }
  int r = 0;
  for (char c : expanded) r = (r * 10 + (c - '0')) % 97;
  return r == 1;
}

bool has_kind(const std::vector<EntityHit>& hits, EntityKind kind) {
  return std::any_of(hits.begin(), hits.end(),
                     [&](const EntityHit& h) { return h.kind == kind; });
}

const RuleEngine& engine() {
  static RuleEngine instance;
  return instance;
}

}  // namespace

TEST_CASE("entity kind table covers 18 kinds, 12 personal / 6 non-personal") {
  CHECK(all_entity_kinds().size() == 18);
  std::size_t personal = 0;
  for (EntityKind kind : all_entity_kinds()) {
    if (entity_is_personal(kind)) ++personal;
    // Names round-trip.
    CHECK(entity_kind_from_name(entity_kind_name(kind)) == kind);
  }
  CHECK(personal == 12);
  CHECK(entity_is_personal(EntityKind::EMAIL_ADDRESS));
  CHECK_FALSE(entity_is_personal(EntityKind::URL));
  CHECK_FALSE(entity_is_personal(EntityKind::IP_ADDRESS));
}

TEST_CASE("unknown entity names raise instead of defaulting") {
  try {
    entity_kind_from_name("TELEPATHY");
    FAIL("expected UnknownEntityKind");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_entity_kind);
  }
  // Printed alias from the recognizer table.
  CHECK(entity_kind_from_name("SSN") == EntityKind::US_SSN);
}

TEST_CASE("serialize_columnwise joins name and non-empty values") {
  Column col{"Email", {"a@b.c", "d@e.f"}, 0};
  CHECK(serialize_columnwise(col) == "Email\na@b.c\nd@e.f");

  Column gaps{"x", {"", "v"}, 0};
  CHECK(serialize_columnwise(gaps) == "x\nv");

  Column id{"ID", {"3", "20", "28"}, 0};
  CHECK(serialize_columnwise(id).rfind("ID\n3\n20\n28", 0) == 0);

  Column hollow{"h", {"", ""}, 0};
  try {
    serialize_columnwise(hollow);
    FAIL("expected EmptyColumn");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_column);
  }
}

TEST_CASE("serialize_rowwise joins one row across columns") {
  Dataset ds;
  ds.columns = {{"c0", {"p", "r"}, 0}, {"c1", {"q", "s"}, 1}};
  CHECK(serialize_rowwise(ds, 0) == "p q");
  CHECK(serialize_rowwise(ds, 1) == "r s");

  Dataset gaps;
  gaps.columns = {{"c0", {"p"}, 0}, {"c1", {""}, 1}, {"c2", {"s"}, 2}};
  CHECK(serialize_rowwise(gaps, 0) == "p s");

  try {
    serialize_rowwise(ds, 2);
    FAIL("expected RowOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::row_out_of_range);
  }
}

TEST_CASE("luhn_valid on fixed and oracle-derived inputs") {
  CHECK(luhn_valid("0000000000000000"));        // all-zero sum is 0 mod 10
  CHECK_FALSE(luhn_valid("0000000000000001"));  // perturbed check digit

  // Derive a valid 16-digit number with the oracle, then freeze the check.
  std::string body = "453957876362148";
  std::string valid;
  for (char check = '0'; check <= '9'; ++check) {
    std::string candidate = body + check;
    if (oracle_luhn(candidate)) {
      valid = candidate;
      break;
    }
  }
  REQUIRE(!valid.empty());
  CHECK(luhn_valid(valid));

  // Separators are stripped.
  std::string spaced = valid.substr(0, 4) + " " + valid.substr(4, 4) + "-" +
                       valid.substr(8, 4) + " " + valid.substr(12, 4);
  CHECK(luhn_valid(spaced));
}

TEST_CASE("luhn_valid input contract") {
  try {
    luhn_valid("12ab56789012");
    FAIL("expected NotDigits");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::not_digits);
  }
  try {
    luhn_valid("12345678901");  // 11 digits
    FAIL("expected BadLength");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_length);
  }
  try {
    luhn_valid("12345678901234567890");  // 20 digits
    FAIL("expected BadLength");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_length);
  }
}

TEST_CASE("luhn agrees with the oracle on random 12-19 digit strings") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t len = 12 + rng() % 8;
    std::string digits;
    for (std::size_t i = 0; i < len; ++i) {
      digits += static_cast<char>('0' + rng() % 10);
    }
    CHECK(luhn_valid(digits) == oracle_luhn(digits));
  }
}

TEST_CASE("iban_valid accepts exactly one check pair per body") {
  // For a fixed body, brute-force all 100 check-digit pairs; exactly one
  // passes, and it matches the oracle.
  const std::string country = "DE";
  const std::string body = "370400440532013000";
  int valid_count = 0;
  std::string the_valid;
  for (int dd = 0; dd < 100; ++dd) {
    char check[3];
    std::snprintf(check, sizeof(check), "%02d", dd);
    std::string candidate = country + check + body;
    bool ok = iban_valid(candidate);
    CHECK(ok == oracle_iban(candidate));
    if (ok) {
      ++valid_count;
      the_valid = candidate;
    }
  }
  CHECK(valid_count == 1);
  CHECK(the_valid == "DE89370400440532013000");  // canonical example IBAN
  CHECK(iban_valid("DE89 3704 0044 0532 0130 00"));
}

TEST_CASE("iban_valid format contract") {
  CHECK_FALSE(iban_valid("XX00"));  // shape ok, residue != 1
  try {
    iban_valid("1X00ABC");
    FAIL("expected BadFormat");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_format);
  }
  try {
    iban_valid("DE89" + std::string(31, '0'));  // body > 30
    FAIL("expected BadFormat");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_format);
  }
}

TEST_CASE("recognize finds emails with spans inside the text") {
  auto hits = engine().recognize("contact g-h@hotmail.com now");
  REQUIRE(has_kind(hits, EntityKind::EMAIL_ADDRESS));
  for (const auto& h : hits) {
    if (h.kind != EntityKind::EMAIL_ADDRESS) continue;
    CHECK(h.confidence == doctest::Approx(1.0));
    CHECK(h.span.begin == 8);
    CHECK(h.span.end == 23);
  }
}

TEST_CASE("recognize returns nothing for empty text") {
  CHECK(engine().recognize("").empty());
}

TEST_CASE("recognize ip addresses map to the non-personal side") {
  auto hits = engine().recognize("10.0.0.1");
  REQUIRE(has_kind(hits, EntityKind::IP_ADDRESS));
  CHECK_FALSE(entity_is_personal(EntityKind::IP_ADDRESS));
  // Out-of-range octets are not addresses.
  CHECK_FALSE(has_kind(engine().recognize("999.888.777.666"),
                       EntityKind::IP_ADDRESS));
  CHECK(has_kind(
      engine().recognize("2001:0db8:85a3:0000:0000:8a2e:0370:7334"),
      EntityKind::IP_ADDRESS));
  // Clock times are not ipv6 fragments.
  CHECK_FALSE(has_kind(engine().recognize("12:30:45"),
                       EntityKind::IP_ADDRESS));
}

TEST_CASE("recognize url, phone, date, ssn, iban, card shapes") {
  CHECK(has_kind(engine().recognize("see https://example.org/x?q=1"),
                 EntityKind::URL));
  CHECK(has_kind(engine().recognize("www.example.org"), EntityKind::URL));
  CHECK(has_kind(engine().recognize("call 555-123-4567"),
                 EntityKind::PHONE_NUMBER));
  CHECK(has_kind(engine().recognize("+49 170 555 1234"),
                 EntityKind::PHONE_NUMBER));
  CHECK(has_kind(engine().recognize("2014-07-23"), EntityKind::DATE_TIME));
  CHECK(has_kind(engine().recognize("07/23/2014"), EntityKind::DATE_TIME));
  CHECK(has_kind(engine().recognize("078-05-1120"), EntityKind::US_SSN));
  CHECK(has_kind(engine().recognize("DE89 3704 0044 0532 0130 00"),
                 EntityKind::IBAN_CODE));
  CHECK(has_kind(engine().recognize("4539578763621486"),
                 EntityKind::CREDIT_CARD));
  CHECK(has_kind(engine().recognize("tom"), EntityKind::PERSON));
  CHECK(has_kind(engine().recognize("Brazil"), EntityKind::LOCATION));
}

TEST_CASE("bare digit runs and dates stay quiet for personal kinds") {
  // Plain numerics: no credit card (fails length or checksum), no phone
  // (no separators), no ssn (no hyphens).
  for (const char* text : {"7", "123456", "2021", "99999999"}) {
    auto hits = engine().recognize(text);
    CHECK_FALSE(has_kind(hits, EntityKind::CREDIT_CARD));
    CHECK_FALSE(has_kind(hits, EntityKind::PHONE_NUMBER));
    CHECK_FALSE(has_kind(hits, EntityKind::US_SSN));
  }
  // Dates must not read as phones or ssns.
  for (const char* text : {"2021-05-06", "07/23/2014", "1999-12-31"}) {
    auto hits = engine().recognize(text);
    CHECK_FALSE(has_kind(hits, EntityKind::PHONE_NUMBER));
    CHECK_FALSE(has_kind(hits, EntityKind::US_SSN));
  }
  // A 16-digit non-Luhn number is not a credit card.
  CHECK_FALSE(has_kind(engine().recognize("1234567890123456"),
                       EntityKind::CREDIT_CARD));
}

TEST_CASE("context-gated stubs fire only next to their keyword") {
  CHECK(has_kind(engine().recognize("account no: 123456789012"),
                 EntityKind::US_BANK_NUMBER));
  CHECK_FALSE(has_kind(engine().recognize("123456789012 units sold"),
                       EntityKind::US_BANK_NUMBER));
  CHECK(has_kind(engine().recognize("passport 123456789"),
                 EntityKind::US_PASSPORT));
  CHECK(has_kind(engine().recognize("ABN 51 824 753 556"),
                 EntityKind::AU_ABN));
  CHECK(has_kind(engine().recognize("ACN 000 000 019"), EntityKind::AU_ACN));
  CHECK(has_kind(engine().recognize("driver's license B1234567"),
                 EntityKind::US_DRIVER_LICENSE));
  CHECK(has_kind(engine().recognize("900-70-1234"), EntityKind::US_ITIN));
  CHECK(has_kind(engine().recognize("she is Brazilian"), EntityKind::NRP));
}

TEST_CASE("same-kind spans never overlap within one text") {
  std::mt19937 rng(23);
  const char* snippets[] = {
      "a@b.com",       "x@y.org",     "https://a.io", "10.0.0.1",
      "2020-01-02",    "tom",         "berlin",       "555-123-4567",
      "plain words",   "42",          "DE89370400440532013000",
  };
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    std::size_t parts = 1 + rng() % 8;
    for (std::size_t i = 0; i < parts; ++i) {
      if (i) text += ' ';
      text += snippets[rng() % std::size(snippets)];
    }
    auto hits = engine().recognize(text);
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
      if (a.kind != b.kind) return a.kind < b.kind;
      return a.span.begin < b.span.begin;
    });
    for (std::size_t i = 1; i < hits.size(); ++i) {
      if (hits[i].kind != hits[i - 1].kind) continue;
      CHECK(hits[i].span.begin >= hits[i - 1].span.end);
    }
    for (const auto& h : hits) {
      CHECK(h.span.begin < h.span.end);
      CHECK(h.span.end <= text.size());
      CHECK(h.confidence >= 0.0);
      CHECK(h.confidence <= 1.0);
    }
  }
}

TEST_CASE("classify_column applies both thresholds") {
  AggregationPolicy policy{3, 0.5, Strategy::columnwise};

  Column emails{"contact", {}, 0};
  for (int i = 0; i < 10; ++i) {
    emails.values.push_back("user" + std::to_string(i) + "@mail.com");
  }
  ColumnVerdict verdict = engine().classify_column(emails, policy);
  CHECK(verdict.is_personal);
  CHECK(std::find(verdict.entity_kinds.begin(), verdict.entity_kinds.end(),
                  "EMAIL_ADDRESS") != verdict.entity_kinds.end());

  Column urls{"link", {}, 0};
  for (int i = 0; i < 10; ++i) {
    urls.values.push_back("https://site" + std::to_string(i) + ".com/p");
  }
  CHECK_FALSE(engine().classify_column(urls, policy).is_personal);

  Column two_emails{"contact", {"a@b.com", "c@d.com", "meeting notes"}, 0};
  CHECK_FALSE(engine().classify_column(two_emails, policy).is_personal);

  Column hollow{"h", {"", ""}, 0};
  try {
    engine().classify_column(hollow, policy);
    FAIL("expected EmptyColumn");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_column);
  }
}

TEST_CASE("confidence threshold filters weak lookup hits") {
  Column names{"first", {"tom", "anna", "walter", "mia"}, 0};
  AggregationPolicy lenient{3, 0.4, Strategy::columnwise};
  CHECK(engine().classify_column(names, lenient).is_personal);

  AggregationPolicy strict{3, 0.5, Strategy::columnwise};  // lookups are 0.4
  CHECK_FALSE(engine().classify_column(names, strict).is_personal);
}

TEST_CASE("verdicts are monotone in both thresholds") {
  std::mt19937 rng(31);
  const char* cells[] = {"a@b.com", "tom", "https://x.io", "2020-01-02",
                         "plain", "555-123-4567", "42"};
  for (int trial = 0; trial < 100; ++trial) {
    Column col{"c", {}, 0};
    std::size_t n = 1 + rng() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      col.values.push_back(cells[rng() % std::size(cells)]);
    }
    AggregationPolicy base{1 + rng() % 4, (rng() % 10) / 10.0,
                           Strategy::columnwise};
    AggregationPolicy tighter{base.min_hits + rng() % 3,
                              std::min(1.0, base.min_confidence +
                                                (rng() % 5) / 10.0),
                              Strategy::columnwise};
    bool before = engine().classify_column(col, base).is_personal;
    bool after = engine().classify_column(col, tighter).is_personal;
    // Raising thresholds never flips non-personal to personal.
    if (!before) CHECK_FALSE(after);
  }
}

TEST_CASE("column verdicts are invariant under row permutation") {
  std::mt19937 rng(37);
  Column col{"mixed", {}, 0};
  const char* cells[] = {"a@b.com", "x@y.org", "tom", "https://x.io",
                         "2020-01-02", "word"};
  for (int i = 0; i < 30; ++i) {
    col.values.push_back(cells[rng() % std::size(cells)]);
  }
  AggregationPolicy policy{2, 0.4, Strategy::columnwise};
  ColumnVerdict base = engine().classify_column(col, policy);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(col.values.begin(), col.values.end(), rng);
    ColumnVerdict shuffled = engine().classify_column(col, policy);
    CHECK(shuffled.is_personal == base.is_personal);
    CHECK(shuffled.entity_kinds == base.entity_kinds);
  }
}

TEST_CASE("rowwise strategy attributes hits to the owning column") {
  Dataset ds;
  ds.title = "t";
  Column emails{"contact", {}, 0};
  Column notes{"note", {}, 1};
  for (int i = 0; i < 5; ++i) {
    emails.values.push_back("user" + std::to_string(i) + "@mail.com");
    notes.values.push_back("plain text");
  }
  ds.columns = {emails, notes};

  AggregationPolicy policy{3, 0.4, Strategy::rowwise};
  auto verdicts = RuleEngine().classify_dataset(ds, policy);
  REQUIRE(verdicts.size() == 2);
  CHECK(verdicts[0].column_name == "contact");
  CHECK(verdicts[0].is_personal);
  CHECK_FALSE(verdicts[1].is_personal);
}

TEST_CASE("word lists can be overridden from files") {
  // With an override list that lacks common names, 'tom' stops matching.
  RuleEngine::Options options;
  options.names_list_path = std::string(PDD_TEST_DIR) +
                            "/fixtures/names_small.txt";
  RuleEngine custom(options);
  CHECK_FALSE(has_kind(custom.recognize("tom"), EntityKind::PERSON));
  CHECK(has_kind(custom.recognize("zephyrine"), EntityKind::PERSON));
  // Locations still use the builtin list.
  CHECK(has_kind(custom.recognize("berlin"), EntityKind::LOCATION));
}

TEST_CASE("invalid policies are rejected") {
  Column col{"c", {"x"}, 0};
  try {
    engine().classify_column(col, {0, 0.4, Strategy::columnwise});
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_argument);
  }
  try {
    engine().classify_column(col, {1, 1.5, Strategy::columnwise});
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_argument);
  }
}

TEST_SUITE_END();
