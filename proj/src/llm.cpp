#include "pdd/llm.hpp"

#include <cctype>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace pdd {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "unknown";
}

std::string build_initial_prompt() {
  return
      "As a classifier of person-related data in tabular datasets, your task "
      "is to analyze the provided columns (each containing up to ten distinct "
      "values) and determine whether they contain information that originates "
      "from or relates to a person, even if it is not directly identifiable.\n"
      "Detecting person-related information helps ensure compliance with data "
      "protection regulations and safeguards individuals' privacy and "
      "security.\n"
      "Output your results in a dictionary format with a boolean indicating "
      "if the column contains person-related data or not.";
}

namespace {

bool looks_numeric(std::string_view v) {
  if (v.empty()) return false;
  std::size_t i = (v[0] == '-') ? 1 : 0;
  if (i == v.size()) return false;
  bool seen_dot = false;
  for (; i < v.size(); ++i) {
    if (v[i] == '.') {
      if (seen_dot) return false;
      seen_dot = true;
    } else if (!std::isdigit(static_cast<unsigned char>(v[i]))) {
      return false;
    }
  }
  return true;
}

std::string quote_always(std::string_view v) {
  std::string out = "'";
  for (char c : v) {
    if (c == '\\' || c == '\'') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

// Numeric-looking values render bare, everything else single-quoted, so a
// sampled id list reads [3, 20, 28] while names read ['Tom', 'Walter'].
std::string quote_value(std::string_view v) {
  if (looks_numeric(v)) return std::string(v);
  return quote_always(v);
}

std::string render_value_list(const std::vector<std::string>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += quote_value(values[i]);
  }
  out += ']';
  return out;
}

// Feature names are always quoted, even numeric-looking ones.
std::string render_feature_list(const Dataset& ds) {
  // TODO: optional cap on the feature-name list for very wide datasets.
  std::string out = "[";
  for (std::size_t i = 0; i < ds.columns.size(); ++i) {
    if (i) out += ", ";
    out += quote_always(ds.columns[i].name);
  }
  out += ']';
  return out;
}

const char* kNaturalPersonQuestion =
    "Does this column, in the context of the dataset, contain information "
    "relating to a natural person?";

}  // namespace

std::pair<std::string, std::string> build_example_pair() {
  std::string prompt =
      "You can use the following example as a guideline:\n"
      "Classify the following column with careful consideration of the "
      "dataset description:\n"
      "\n"
      "Dataset:\n"
      "Title: 'Test Dataset'\n"
      "Description: 'This dataset was used for a linear regression.'\n"
      "Features: ['first_name_en_10', 'last_name_en_10', 'email_en_10', "
      "'phone_number', 'address_en_10', 'city_en_10', 'country_en_10', "
      "'date', 'target']\n"
      "Column of the dataset to classify: 'first_name_en_10': ['Tom', "
      "'Walter', 'Mia', 'Lena', 'John', 'Jack', 'Felice', 'Anna', 'Lukas', "
      "'Will']\n"
      "\n"
      "Does this column, in the context of the dataset, contain information "
      "relating to a natural person?";
  std::string answer = "{'first_name_en_10': true}";
  return {std::move(prompt), std::move(answer)};
}

std::string build_data_prompt(const Dataset& ds, const Column& col,
                              const ValueSample& sample) {
  const Column* found = ds.find_column(col.name);
  if (found == nullptr || found->position != col.position) {
    throw Error(Errc::column_not_in_dataset,
                "column '" + col.name + "' does not belong to dataset '" +
                    ds.title + "'");
  }

  std::string out =
      "Classify the following column with careful consideration of the "
      "dataset description.\n\n";
  out += "Dataset:\n";
  out += "Title: '" + ds.title + "'\n";
  out += "Description: '" + truncate_description(ds.description) + "'\n";
  out += "Features: " + render_feature_list(ds) + "\n";
  out += "Column of the dataset to classify: " + quote_always(col.name) +
         ": " + render_value_list(sample.values) + "\n\n";
  out += kNaturalPersonQuestion;
  return out;
}

PromptBundle build_prompt_bundle(const Dataset& ds, const Column& col,
                                 const ValueSample& sample) {
  PromptBundle bundle;
  bundle.initial_prompt = build_initial_prompt();
  auto [example, answer] = build_example_pair();
  bundle.example_prompt = std::move(example);
  bundle.example_answer = std::move(answer);
  bundle.data_prompt = build_data_prompt(ds, col, sample);
  return bundle;
}

Conversation assemble_conversation(const PromptBundle& bundle) {
  return {
      {Role::system, bundle.initial_prompt},
      {Role::user, bundle.example_prompt},
      {Role::assistant, bundle.example_answer},
      {Role::user, bundle.data_prompt},
  };
}

std::string dump_conversation(const Conversation& conversation) {
  std::string out;
  for (std::size_t i = 0; i < conversation.size(); ++i) {
    if (i) out += '\n';
    out += '[';
    out += role_name(conversation[i].role);
    out += "]\n";
    out += conversation[i].content;
    out += '\n';
  }
  return out;
}

std::string render_verdict_dict(std::string_view column, bool value) {
  std::string out = "{'";
  for (char c : column) {
    if (c == '\\' || c == '\'') out += '\\';
    out += c;
  }
  out += "': ";
  out += value ? "true" : "false";
  out += '}';
  return out;
}

namespace {

struct ParsedDict {
  std::string key;
  bool value;
};

bool parse_bool_word(std::string_view word, bool& out) {
  if (word == "true" || word == "True" || word == "TRUE") {
    out = true;
    return true;
  }
  if (word == "false" || word == "False" || word == "FALSE") {
    out = false;
    return true;
  }
  return false;
}

void skip_ws(std::string_view s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

/// Parses `{ key : bool }` starting at the brace; key may be single-quoted,
/// double-quoted (with backslash escapes), or bare.
bool try_parse_dict(std::string_view s, std::size_t brace, std::size_t& end,
                    ParsedDict& out) {
  std::size_t i = brace + 1;
  skip_ws(s, i);
  if (i >= s.size()) return false;

  std::string key;
  if (s[i] == '\'' || s[i] == '"') {
    char quote = s[i++];
    while (i < s.size() && s[i] != quote) {
      if (s[i] == '\\' && i + 1 < s.size()) ++i;
      key += s[i++];
    }
    if (i >= s.size()) return false;
    ++i;  // closing quote
  } else {
    std::size_t start = i;
    while (i < s.size() && s[i] != ':' && s[i] != '}') ++i;
    if (i >= s.size() || s[i] != ':') return false;
    key = trim(s.substr(start, i - start));
    if (key.empty()) return false;
  }

  skip_ws(s, i);
  if (i >= s.size() || s[i] != ':') return false;
  ++i;
  skip_ws(s, i);

  std::size_t word_start = i;
  while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
  bool value = false;
  if (!parse_bool_word(s.substr(word_start, i - word_start), value)) {
    return false;
  }
  skip_ws(s, i);
  if (i >= s.size() || s[i] != '}') return false;

  end = i + 1;
  out = {std::move(key), value};
  return true;
}

}  // namespace

LlmVerdict parse_verdict(std::string_view reply,
                         std::string_view expected_column) {
  std::vector<ParsedDict> candidates;
  for (std::size_t i = 0; i < reply.size(); ++i) {
    if (reply[i] != '{') continue;
    std::size_t end = 0;
    ParsedDict dict;
    if (try_parse_dict(reply, i, end, dict)) {
      candidates.push_back(std::move(dict));
      i = end - 1;
    }
  }

  for (const ParsedDict& dict : candidates) {
    if (dict.key == expected_column) {
      return {dict.key, dict.value, std::string(reply)};
    }
  }
  if (!candidates.empty()) {
    throw Error(Errc::column_mismatch,
                "expected '" + std::string(expected_column) + "', got '" +
                    candidates.front().key + "'");
  }
  throw Error(Errc::unparseable_reply,
              "no boolean dictionary found in reply: " +
                  std::string(reply.substr(0, 200)));
}

// ---------------------------------------------------------------------------
// Transports
// ---------------------------------------------------------------------------

std::string Transport::complete(const Conversation& conversation) {
  requests_.fetch_add(1, std::memory_order_relaxed);
  return do_complete(conversation);
}

namespace {

nlohmann::json conversation_to_body(const Conversation& conversation,
                                    const TransportConfig& config) {
  nlohmann::json messages = nlohmann::json::array();
  for (const Message& m : conversation) {
    messages.push_back({{"role", std::string(role_name(m.role))},
                        {"content", m.content}});
  }
  nlohmann::json body = {
      {"model", config.model_id},
      {"messages", std::move(messages)},
      {"temperature", config.temperature},
  };
  if (config.seed) body["seed"] = *config.seed;
  return body;
}

/// Splits "http://host:port/path" into base url and path.
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::config_error, "endpoint url '" + url +
                                        "' must start with http:// or "
                                        "https://");
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// Simple counting semaphore; std::counting_semaphore needs a compile-time
/// bound, while max_inflight is a runtime setting.
class InflightGate {
 public:
  explicit InflightGate(std::size_t limit) : limit_(limit == 0 ? 1 : limit) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return inflight_ < limit_; });
    ++inflight_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      --inflight_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t limit_;
  std::size_t inflight_ = 0;
};

bool retryable_status(int status) {
  return status == 429 || status == 500 || status == 502 || status == 503 ||
         status == 504;
}

}  // namespace

struct HttpTransport::Impl {
  TransportConfig config;
  std::string base_url;
  std::string path;
  std::string api_key;
  InflightGate gate;

  explicit Impl(TransportConfig cfg)
      : config(std::move(cfg)), gate(config.max_inflight) {
    if (config.timeout <= std::chrono::milliseconds::zero()) {
      throw Error(Errc::config_error, "transport timeout must be positive");
    }
    if (config.max_inflight < 1) {
      throw Error(Errc::config_error, "max_inflight must be >= 1");
    }
    auto [base, p] = split_endpoint(config.endpoint_url);
    base_url = base;
    path = p;
    if (const char* key = std::getenv(config.api_key_env.c_str())) {
      api_key = key;
    }
  }
};

HttpTransport::HttpTransport(TransportConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpTransport::~HttpTransport() = default;

std::string HttpTransport::do_complete(const Conversation& conversation) {
  const TransportConfig& cfg = impl_->config;
  const std::string body =
      conversation_to_body(conversation, cfg).dump();

  impl_->gate.acquire();
  struct Release {
    InflightGate& gate;
    ~Release() { gate.release(); }
  } release{impl_->gate};

  std::string last_error;
  for (std::size_t attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      auto backoff = std::chrono::milliseconds(200) * (1 << (attempt - 1));
      std::this_thread::sleep_for(std::min(
          backoff, std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::seconds(2))));
    }

    httplib::Client client(impl_->base_url);
    auto total_us =
        std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout);
    client.set_connection_timeout(total_us.count() / 1000000,
                                  total_us.count() % 1000000);
    client.set_read_timeout(total_us.count() / 1000000,
                            total_us.count() % 1000000);
    httplib::Headers headers;
    if (!impl_->api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + impl_->api_key);
    }

    auto res = client.Post(impl_->path, headers, body, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;  // retryable
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      if (retryable_status(res->status)) continue;
      throw Error(Errc::transport_error, last_error + " from " +
                                             cfg.endpoint_url);
    }

    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") ||
        !doc["choices"].is_array() || doc["choices"].empty() ||
        !doc["choices"][0].contains("message") ||
        !doc["choices"][0]["message"].contains("content") ||
        !doc["choices"][0]["message"]["content"].is_string()) {
      throw Error(Errc::transport_error,
                  "malformed completion response from " + cfg.endpoint_url);
    }
    return doc["choices"][0]["message"]["content"].get<std::string>();
  }
  throw Error(Errc::transport_error,
              last_error + " after " + std::to_string(cfg.max_retries + 1) +
                  " attempts to " + cfg.endpoint_url);
}

MockTransport::MockTransport(std::map<std::string, std::string> replies)
    : replies_(std::move(replies)) {}

MockTransport MockTransport::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::unreadable_file, "cannot open mock script '" + path +
                                           "'");
  }
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(Errc::malformed_input,
                "mock script '" + path + "' must be a JSON object");
  }
  std::map<std::string, std::string> replies;
  for (const auto& [column, value] : doc.items()) {
    if (value.is_string()) {
      replies[column] = value.get<std::string>();
    } else if (value.is_boolean()) {
      replies[column] = render_verdict_dict(column, value.get<bool>());
    } else {
      throw Error(Errc::malformed_input,
                  "mock reply for '" + column +
                      "' must be a string or a boolean");
    }
  }
  return MockTransport(std::move(replies));
}

std::optional<std::string> column_from_data_prompt(std::string_view prompt) {
  static constexpr std::string_view kMarker =
      "Column of the dataset to classify: '";
  auto pos = prompt.rfind(kMarker);
  if (pos == std::string_view::npos) return std::nullopt;
  std::size_t i = pos + kMarker.size();
  std::string name;
  while (i < prompt.size() && prompt[i] != '\'') {
    if (prompt[i] == '\\' && i + 1 < prompt.size()) ++i;
    name += prompt[i++];
  }
  if (i >= prompt.size()) return std::nullopt;
  return name;
}

std::string MockTransport::do_complete(const Conversation& conversation) {
  if (conversation.empty()) {
    throw Error(Errc::transport_error, "mock: empty conversation");
  }
  auto column = column_from_data_prompt(conversation.back().content);
  if (!column) {
    throw Error(Errc::transport_error,
                "mock: data prompt does not name a column");
  }
  auto it = replies_.find(*column);
  if (it == replies_.end()) {
    throw Error(Errc::transport_error,
                "mock: no scripted reply for '" + *column + "'");
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

LlmVerdict classify_column_llm(const Dataset& ds, const Column& col,
                               const TransportConfig& config,
                               Transport& transport,
                               std::size_t values_per_column) {
  ValueSample sample = sample_top_k(col, values_per_column);
  Conversation conversation =
      assemble_conversation(build_prompt_bundle(ds, col, sample));

  for (std::size_t attempt = 0;; ++attempt) {
    std::string reply = transport.complete(conversation);
    try {
      return parse_verdict(reply, col.name);
    } catch (const Error& e) {
      if (e.code() == Errc::unparseable_reply &&
          attempt < config.max_retries) {
        continue;
      }
      throw;
    }
  }
}

}  // namespace pdd
