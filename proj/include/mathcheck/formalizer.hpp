#pragma once

#include "mathcheck/context.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace mathcheck {

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
};

class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  // Throws TransportError when the endpoint cannot be reached.
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

// Returns canned responses in order, then repeats the last one. Records the
// final user message of every call.
class MockEndpoint : public ChatEndpoint {
 public:
  explicit MockEndpoint(std::vector<std::string> responses);
  std::string complete(const std::vector<ChatMessage>& messages) override;

  std::vector<std::string> prompts() const;
  std::size_t calls() const;

 private:
  std::vector<std::string> responses_;
  std::vector<std::string> prompts_;
  mutable std::mutex mutex_;
};

struct LlmEndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o";
  // Name of the environment variable holding the key, never the key itself.
  std::string api_key_env = "MATHCHECK_API_KEY";
  double temperature = 0.0;
  int max_tokens = 4096;
  int timeout_ms = 120000;
  int retries = 2;
  int max_concurrent = 4;

  // Throws Error on out-of-range values.
  void validate() const;
};

// OpenAI-style chat completions over HTTP(S).
class HttpChatEndpoint : public ChatEndpoint {
 public:
  explicit HttpChatEndpoint(LlmEndpointConfig config);
  ~HttpChatEndpoint() override;
  std::string complete(const std::vector<ChatMessage>& messages) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Throws UnknownTemplate for anything but "default" and PromptError on an empty solution.
std::string build_formalization_prompt(const std::string& problem, const std::string& solution,
                                       const std::string& template_id = "default");

// The context text inside a reply, without surrounding prose or code fences.
std::string extract_context_text(const std::string& reply);

struct FormalizationRequest {
  std::string problem;
  std::string solution;
  std::string template_id = "default";
};

struct Attempt {
  int number = 1;
  std::string prompt;
  std::string response;
  std::string diagnostic;  // empty when the reply was accepted
};

struct FormalizationResult {
  Context context;
  std::vector<Attempt> transcript;
  int attempts = 0;
  std::vector<std::string> diagnostics;  // from the rejected attempts
};

// Re-prompts with the diagnostic after a reply that does not parse or
// validate, at most `retries` times. Throws FormalizationFailed when every
// attempt is rejected.
FormalizationResult formalize(const FormalizationRequest& request, ChatEndpoint& endpoint, int retries);

nlohmann::json to_json(const Attempt& a);
// One JSON line per attempt.
void append_transcript(const std::filesystem::path& path, const std::string& label, const std::vector<Attempt>& attempts);

}  // namespace mathcheck
