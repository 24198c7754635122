#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace windcommit {

struct ChatMessage {
  std::string role;  // "system", "user", "assistant"
  std::string content;
};

// Transport or protocol failure while talking to a chat backend.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Returns the assistant reply text or throws BackendError.
  virtual std::string send(const std::vector<ChatMessage>& messages) = 0;
};

inline constexpr const char* kApiKeyVariable = "WINDCOMMIT_API_KEY";

std::optional<std::string> api_key_from_env();

struct HttpBackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4";
  double temperature = 0.7;
  double timeout_seconds = 60.0;
  int max_retries = 2;
  double retry_backoff_seconds = 1.0;
  std::optional<std::int64_t> seed;
};

// POSTs chat-completions requests to {base_url}/chat/completions. One
// request in flight at a time; transport errors, 429 and 5xx responses are
// retried with exponential backoff.
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(HttpBackendConfig config, std::string api_key);
  std::string send(const std::vector<ChatMessage>& messages) override;

 private:
  HttpBackendConfig config_;
  std::string api_key_;
};

// Replays a fixed list of replies in order, wrapping around at the end.
// Sessions created with different offsets start at different replies.
class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies, std::size_t offset = 0);
  std::string send(const std::vector<ChatMessage>& messages) override;
  std::size_t calls() const { return calls_; }

 private:
  std::vector<std::string> replies_;
  std::size_t next_;
  std::size_t calls_ = 0;
};

// Script file: replies separated by lines containing only "---".
std::vector<std::string> load_mock_script(const std::filesystem::path& path);
std::vector<std::string> parse_mock_script(const std::string& text);

class NullBackend : public ChatBackend {
 public:
  std::string send(const std::vector<ChatMessage>& messages) override;
};

}  // namespace windcommit
