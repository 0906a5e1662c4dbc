#include "pdd/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace pdd {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::unreadable_file, "cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw Error(Errc::unreadable_file, "read failed for '" + path + "'");
  }
  return buf.str();
}

void strip_bom(std::string& text) {
  if (text.size() >= 3 && text[0] == '\xEF' && text[1] == '\xBB' &&
      text[2] == '\xBF') {
    text.erase(0, 3);
  }
}

bool is_continuation_byte(char c) {
  return (static_cast<unsigned char>(c) & 0xC0) == 0x80;
}

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool Column::has_non_empty_value() const {
  return std::any_of(values.begin(), values.end(),
                     [](const std::string& v) { return !v.empty(); });
}

bool operator==(const Column& a, const Column& b) {
  return a.name == b.name && a.position == b.position && a.values == b.values;
}

std::size_t Dataset::row_count() const {
  return columns.empty() ? 0 : columns.front().values.size();
}

const Column* Dataset::find_column(std::string_view name) const {
  for (const auto& col : columns) {
    if (col.name == name) return &col;
  }
  return nullptr;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.title == b.title && a.description == b.description &&
         a.columns == b.columns;
}

void AnnotationSet::insert(std::string name, bool personal) {
  labels_[std::move(name)] = personal;
}

bool AnnotationSet::contains(std::string_view name) const {
  return labels_.find(std::string(name)) != labels_.end();
}

bool AnnotationSet::at(std::string_view name) const {
  auto it = labels_.find(std::string(name));
  if (it == labels_.end()) {
    throw Error(Errc::unknown_column, "no label for '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::vector<std::string>> parse_delimited(std::string_view text,
                                                      char delimiter) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  enum class State { field_start, unquoted, quoted, quote_in_quoted };
  State state = State::field_start;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    switch (state) {
      case State::field_start:
        if (c == '"') {
          state = State::quoted;
        } else if (c == delimiter) {
          end_field();
        } else if (c == '\n' || c == '\r') {
          if (c == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
          // A line break before any field content: blank lines are
          // separators, not records. A quoted "" lands in quote_in_quoted
          // instead and survives as an empty cell.
          if (!row.empty() || !field.empty()) end_row();
        } else {
          field.push_back(c);
          state = State::unquoted;
        }
        break;
      case State::unquoted:
        if (c == delimiter) {
          end_field();
          state = State::field_start;
        } else if (c == '\n') {
          end_row();
          state = State::field_start;
        } else if (c == '\r') {
          if (i + 1 < n && text[i + 1] == '\n') ++i;
          end_row();
          state = State::field_start;
        } else {
          field.push_back(c);
        }
        break;
      case State::quoted:
        if (c == '"') {
          state = State::quote_in_quoted;
        } else {
          field.push_back(c);
        }
        break;
      case State::quote_in_quoted:
        if (c == '"') {
          field.push_back('"');
          state = State::quoted;
        } else if (c == delimiter) {
          end_field();
          state = State::field_start;
        } else if (c == '\n') {
          end_row();
          state = State::field_start;
        } else if (c == '\r') {
          if (i + 1 < n && text[i + 1] == '\n') ++i;
          end_row();
          state = State::field_start;
        } else {
          throw Error(Errc::malformed_csv,
                      "unexpected character after closing quote at offset " +
                          std::to_string(i));
        }
        break;
    }
    ++i;
  }

  if (state == State::quoted) {
    throw Error(Errc::malformed_csv, "unterminated quoted field");
  }
  // Flush the final record unless the text ended with a line break.
  if (state != State::field_start || !field.empty() || !row.empty()) {
    end_row();
  }
  return rows;
}

namespace {

nlohmann::json parse_json_file(const std::string& path, Errc malformed_code,
                               const char* what) {
  std::string text = read_file(path);
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(malformed_code, std::string(what) + " '" + path +
                                    "' is not valid JSON");
  }
  return doc;
}

}  // namespace

Dataset load_dataset(const std::string& csv_path, const std::string& meta_path,
                     char delimiter) {
  nlohmann::json meta =
      parse_json_file(meta_path, Errc::malformed_metadata, "metadata sidecar");
  if (!meta.is_object() || !meta.contains("title") ||
      !meta.contains("description") || !meta["title"].is_string() ||
      !meta["description"].is_string()) {
    throw Error(Errc::malformed_metadata,
                "sidecar '" + meta_path +
                    "' must be an object with string fields "
                    "'title' and 'description'");
  }

  std::string text = read_file(csv_path);
  strip_bom(text);
  auto rows = parse_delimited(text, delimiter);
  if (rows.empty()) {
    throw Error(Errc::missing_header, "'" + csv_path + "' has no header row");
  }

  std::vector<std::string> header;
  header.reserve(rows.front().size());
  for (const auto& raw : rows.front()) {
    header.push_back(trim(raw));
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : header) {
    if (name.empty()) {
      throw Error(Errc::malformed_csv,
                  "'" + csv_path + "' has an empty column name in the header");
    }
    if (!seen.insert(name).second) {
      throw Error(Errc::duplicate_column, "'" + name + "'");
    }
  }

  const std::size_t ncols = header.size();
  Dataset ds;
  ds.title = meta["title"].get<std::string>();
  ds.description = meta["description"].get<std::string>();
  ds.source_path = csv_path;
  ds.columns.resize(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    ds.columns[c].name = header[c];
    ds.columns[c].position = c;
    ds.columns[c].values.reserve(rows.size() - 1);
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() > ncols) {
      throw Error(Errc::malformed_csv,
                  "row " + std::to_string(r) + " has " +
                      std::to_string(row.size()) + " fields, header has " +
                      std::to_string(ncols));
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      ds.columns[c].values.push_back(c < row.size() ? row[c] : std::string());
    }
  }

  for (const auto& col : ds.columns) {
    if (!col.has_non_empty_value()) {
      throw Error(Errc::empty_column,
                  "column '" + col.name + "' has no non-empty values");
    }
  }
  return ds;
}

AnnotationSet load_labels(const std::string& labels_path) {
  nlohmann::json doc =
      parse_json_file(labels_path, Errc::malformed_labels, "labels file");
  if (!doc.is_object()) {
    throw Error(Errc::malformed_labels,
                "'" + labels_path + "' must be an object of name -> boolean");
  }
  AnnotationSet out;
  for (const auto& [name, value] : doc.items()) {
    if (!value.is_boolean()) {
      throw Error(Errc::malformed_labels,
                  "label for '" + name + "' is not a boolean");
    }
    out.insert(name, value.get<bool>());
  }
  return out;
}

AnnotationSet load_annotations(const std::string& labels_path,
                               const Dataset& ds) {
  AnnotationSet out = load_labels(labels_path);
  for (const auto& [name, value] : out.labels()) {
    if (ds.find_column(name) == nullptr) {
      throw Error(Errc::unknown_column, "'" + name + "'");
    }
  }
  return out;
}

ValueSample sample_top_k(const Column& col, std::size_t k) {
  if (k < 1) {
    throw Error(Errc::invalid_argument, "sample_top_k requires k >= 1");
  }
  struct Entry {
    std::size_t count = 0;
    std::size_t first_index = 0;
  };
  std::unordered_map<std::string, Entry> freq;
  std::size_t next_first = 0;
  for (const auto& v : col.values) {
    if (v.empty()) continue;
    auto [it, inserted] = freq.try_emplace(v);
    if (inserted) it->second.first_index = next_first;
    ++it->second.count;
    ++next_first;
  }
  if (freq.empty()) {
    throw Error(Errc::empty_column,
                "column '" + col.name + "' has no non-empty values");
  }

  std::vector<std::pair<std::string, Entry>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first_index < b.second.first_index;
  });

  ValueSample sample;
  sample.k = k;
  for (const auto& [value, entry] : ranked) {
    if (sample.values.size() == k) break;
    sample.values.push_back(value);
  }
  return sample;
}

namespace {

bool needs_quoting(const std::string& field, char delimiter) {
  return field.find(delimiter) != std::string::npos ||
         field.find('"') != std::string::npos ||
         field.find('\n') != std::string::npos ||
         field.find('\r') != std::string::npos;
}

void write_field(std::string& out, const std::string& field, char delimiter) {
  if (!needs_quoting(field, delimiter)) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

std::string to_csv(const Dataset& ds, char delimiter) {
  std::string out;
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    if (c) out += delimiter;
    write_field(out, ds.columns[c].name, delimiter);
  }
  out += '\n';
  const std::size_t rows = ds.row_count();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
      if (c) out += delimiter;
      // A lone empty cell must not serialize as a blank line.
      if (ds.columns.size() == 1 && ds.columns[c].values[r].empty()) {
        out += "\"\"";
        continue;
      }
      write_field(out, ds.columns[c].values[r], delimiter);
    }
    out += '\n';
  }
  return out;
}

std::string truncate_description(std::string_view text,
                                 std::size_t max_chars) {
  static constexpr std::string_view kMarker = " ...";
  if (text.size() <= max_chars) return std::string(text);
  if (max_chars <= kMarker.size()) {
    return std::string(kMarker.substr(0, max_chars));
  }

  std::size_t cut = max_chars - kMarker.size();
  // Prefer the last word boundary inside the budget.
  std::size_t boundary = cut;
  while (boundary > 0 &&
         !std::isspace(static_cast<unsigned char>(text[boundary - 1]))) {
    --boundary;
  }
  if (boundary > 0) {
    cut = boundary;
    while (cut > 0 && std::isspace(static_cast<unsigned char>(text[cut - 1]))) {
      --cut;
    }
  } else {
    // No whitespace at all; hard cut, but never inside a UTF-8 sequence.
    while (cut > 0 && is_continuation_byte(text[cut])) --cut;
  }
  return std::string(text.substr(0, cut)) + std::string(kMarker);
}

}  // namespace pdd
