#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pdd/corpus.hpp"
#include "pdd/error.hpp"

namespace pdd {

/// The three prompt components plus the one-shot answer that together form a
/// classification conversation for one column.
struct PromptBundle {
  std::string initial_prompt;
  std::string example_prompt;
  std::string example_answer;
  std::string data_prompt;
};

enum class Role { system, user, assistant };

std::string_view role_name(Role role);

struct Message {
  Role role;
  std::string content;
};

/// Fixed four-message exchange: system, user (example), assistant (example
/// answer), user (data prompt).
using Conversation = std::vector<Message>;

struct LlmVerdict {
  std::string column_name;
  bool is_personal = false;
  std::string raw_reply;
};

struct TransportConfig {
  std::string endpoint_url;
  std::string model_id = "gpt-4o";
  std::string api_key_env = "PDD_API_KEY";  // name of the env var, never the key
  double temperature = 0.0;
  std::optional<long> seed;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_retries = 2;
  std::size_t max_inflight = 4;
};

// ---------------------------------------------------------------------------
// Prompt construction (pure; identical inputs yield identical bytes)
// ---------------------------------------------------------------------------

/// The fixed role/statement/reason/format instruction.
std::string build_initial_prompt();

/// The fixed one-shot example prompt and its answer.
std::pair<std::string, std::string> build_example_pair();

/// Context-rich prompt for one column: title, truncated description, all
/// feature names, and the sampled values, closed by the natural-person
/// question.
std::string build_data_prompt(const Dataset& ds, const Column& col,
                              const ValueSample& sample);

PromptBundle build_prompt_bundle(const Dataset& ds, const Column& col,
                                 const ValueSample& sample);

Conversation assemble_conversation(const PromptBundle& bundle);

/// Role-labeled transcript of a conversation; also the cmd-prompt output and
/// the golden-file format.
std::string dump_conversation(const Conversation& conversation);

/// Canonical single-key boolean dictionary, e.g. {'ID': true}.
std::string render_verdict_dict(std::string_view column, bool value);

/// Tolerant reply parser: accepts either quote style, true/True/false/False,
/// and dictionaries embedded in prose or code fences. The key must equal
/// expected_column exactly.
LlmVerdict parse_verdict(std::string_view reply,
                         std::string_view expected_column);

// ---------------------------------------------------------------------------
// Transports
// ---------------------------------------------------------------------------

class Transport {
 public:
  virtual ~Transport() = default;

  /// Sends one conversation, returns the raw reply text.
  std::string complete(const Conversation& conversation);

  std::size_t request_count() const { return requests_.load(); }

 protected:
  Transport() = default;
  Transport(const Transport&) = delete;
  Transport& operator=(const Transport&) = delete;

  virtual std::string do_complete(const Conversation& conversation) = 0;

 private:
  std::atomic<std::size_t> requests_{0};
};

/// JSON-over-HTTP chat client: POST {model, messages, temperature, seed?} with
/// a bearer token read from the configured environment variable. Retries
/// retryable failures (connect errors, 429, 5xx) with exponential backoff and
/// caps concurrent requests at max_inflight.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(TransportConfig config);
  ~HttpTransport() override;

 protected:
  std::string do_complete(const Conversation& conversation) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Offline transport scripted by a column -> reply map; the column is read
/// from the data prompt. Deterministic and safe under concurrency.
class MockTransport : public Transport {
 public:
  explicit MockTransport(std::map<std::string, std::string> replies);
  MockTransport(MockTransport&& other) noexcept
      : replies_(std::move(other.replies_)) {}

  /// Loads `<name>.mock.json`: object mapping column name -> reply text or
  /// boolean (rendered as the canonical dictionary).
  static MockTransport from_file(const std::string& path);

 protected:
  std::string do_complete(const Conversation& conversation) override;

 private:
  std::map<std::string, std::string> replies_;
};

/// Extracts the queried column name from a data prompt; used by the mock.
std::optional<std::string> column_from_data_prompt(std::string_view prompt);

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Builds the conversation for one column, exchanges it, parses the reply.
/// Unparseable replies are retried with the same conversation up to
/// config.max_retries times before the error surfaces. Verdicts are never
/// defaulted.
LlmVerdict classify_column_llm(const Dataset& ds, const Column& col,
                               const TransportConfig& config,
                               Transport& transport,
                               std::size_t values_per_column = 10);

}  // namespace pdd
