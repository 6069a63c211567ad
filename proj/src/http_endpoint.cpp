#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "mathcheck/errors.hpp"
#include "mathcheck/formalizer.hpp"

#include <cstdlib>
#include <semaphore>

namespace mathcheck {

struct HttpChatEndpoint::Impl {
  LlmEndpointConfig config;
  std::string origin;  // scheme://host[:port]
  std::string path;    // path prefix without trailing slash
  std::counting_semaphore<> slots;

  explicit Impl(LlmEndpointConfig c) : config(std::move(c)), slots(config.max_concurrent) {
    const auto scheme_end = config.base_url.find("://") + 3;
    const auto slash = config.base_url.find('/', scheme_end);
    origin = config.base_url.substr(0, slash);
    path = slash == std::string::npos ? "" : config.base_url.substr(slash);
    while (!path.empty() && path.back() == '/') path.pop_back();
  }
};

HttpChatEndpoint::HttpChatEndpoint(LlmEndpointConfig config) {
  config.validate();
  impl_ = std::make_unique<Impl>(std::move(config));
}

HttpChatEndpoint::~HttpChatEndpoint() = default;

std::string HttpChatEndpoint::complete(const std::vector<ChatMessage>& messages) {
  const LlmEndpointConfig& c = impl_->config;
  nlohmann::json body{{"model", c.model}, {"temperature", c.temperature}, {"max_tokens", c.max_tokens}};
  body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  httplib::Headers headers;
  if (const char* key = std::getenv(c.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);

  impl_->slots.acquire();
  httplib::Result res;
  try {
    httplib::Client client(impl_->origin);
    const auto timeout = std::chrono::milliseconds(c.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    res = client.Post(impl_->path + "/chat/completions", headers, body.dump(), "application/json");
  } catch (...) {
    impl_->slots.release();
    throw;
  }
  impl_->slots.release();

  if (!res) throw TransportError("request to " + impl_->origin + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError("endpoint " + impl_->origin + " answered HTTP " + std::to_string(res->status));
  try {
    auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed chat completion response: ") + e.what());
  }
}

}  // namespace mathcheck
