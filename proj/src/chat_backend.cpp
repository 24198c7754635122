#include "windcommit/chat_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace windcommit {

std::optional<std::string> api_key_from_env() {
  const char* v = std::getenv(kApiKeyVariable);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

HttpChatBackend::HttpChatBackend(HttpBackendConfig config, std::string api_key)
    : config_(std::move(config)), api_key_(std::move(api_key)) {}

namespace {

// Splits "https://host:port/v1" into "https://host:port" and "/v1".
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path};
}

}  // namespace

std::string HttpChatBackend::send(const std::vector<ChatMessage>& messages) {
  nlohmann::json body;
  body["model"] = config_.model;
  body["temperature"] = config_.temperature;
  if (config_.seed) body["seed"] = *config_.seed;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  const auto [origin, prefix] = split_url(config_.base_url);
  httplib::Client client(origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::duration<double>(
          config_.retry_backoff_seconds * static_cast<double>(1 << (attempt - 1))));
    auto res = client.Post(prefix + "/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
      continue;
    }
    if (res->status != 200)
      throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body);
    try {
      auto reply = nlohmann::json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("malformed chat response: ") + e.what());
    }
  }
  throw BackendError("chat request failed after " + std::to_string(config_.max_retries + 1) +
                     " attempts; " + last_error);
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> replies, std::size_t offset)
    : replies_(std::move(replies)), next_(replies_.empty() ? 0 : offset % replies_.size()) {}

std::string ScriptedBackend::send(const std::vector<ChatMessage>&) {
  ++calls_;
  if (replies_.empty()) throw BackendError("mock script has no replies");
  std::string reply = replies_[next_];
  next_ = (next_ + 1) % replies_.size();
  return reply;
}

std::vector<std::string> parse_mock_script(const std::string& text) {
  std::vector<std::string> replies;
  std::istringstream in(text);
  std::string line, current;
  bool any = false;
  auto flush = [&] {
    while (!current.empty() && (current.back() == '\n' || current.back() == '\r')) current.pop_back();
    if (any) replies.push_back(current);
    current.clear();
    any = false;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "---") {
      flush();
      continue;
    }
    current += line;
    current += '\n';
    any = true;
  }
  flush();
  return replies;
}

std::vector<std::string> load_mock_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendError("cannot open mock script " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse_mock_script(s.str());
}

std::string NullBackend::send(const std::vector<ChatMessage>&) {
  throw BackendError("null backend: no language model configured");
}

}  // namespace windcommit
