#include <cstdlib>
#include <iostream>
#include <mutex>

#include <httplib.h>
#include <json.hpp>

#include "devchat/backend.hpp"
#include "devchat/error.hpp"

namespace devchat {

namespace {

using nlohmann::json;

std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos)) {
    text.replace(pos, secret.size(), "[REDACTED]");
  }
  return text;
}

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

CompletionResult map_transport_error(httplib::Error err) {
  if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
    return CompletionResult::failure(BackendFailure::Timeout, httplib::to_string(err));
  }
  return CompletionResult::failure(BackendFailure::TransportError, httplib::to_string(err));
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ValidationError("http backend: endpoint is required");
  if (config_.model.empty()) throw ValidationError("http backend: model is required");
  if (const char* token = std::getenv(config_.api_key_env.c_str())) token_ = token;
}

HttpBackend::~HttpBackend() = default;

CompletionResult HttpBackend::complete(const CompletionRequest& request) {
  // Clients are cheap; one per call keeps the backend thread-safe.
  httplib::Client client(config_.endpoint);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  const json body = {
      {"model", config_.model},
      {"messages", json::array({{{"role", "system"}, {"content", request.system}},
                                {{"role", "user"}, {"content", request.user}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
  };
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  const std::string payload = body.dump();
  if (config_.debug) {
    std::lock_guard lock(log_mutex());
    std::clog << "[http] POST " << config_.endpoint << config_.path << " " << redact(payload, token_) << '\n';
  }
  auto response = client.Post(config_.path, headers, payload, "application/json");
  if (!response) return map_transport_error(response.error());
  if (config_.debug) {
    std::lock_guard lock(log_mutex());
    std::clog << "[http] " << response->status << " " << redact(response->body, token_) << '\n';
  }

  const int status = response->status;
  if (status == 429) return CompletionResult::failure(BackendFailure::RateLimited, "HTTP 429");
  if (status == 408 || status == 504) return CompletionResult::failure(BackendFailure::Timeout, "HTTP " + std::to_string(status));
  if (status >= 500) return CompletionResult::failure(BackendFailure::TransportError, "HTTP " + std::to_string(status));
  if (status >= 400) {
    return CompletionResult::failure(BackendFailure::ModelRefusal,
                                     "HTTP " + std::to_string(status) + ": " + redact(response->body, token_));
  }

  const json parsed = json::parse(response->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
      parsed["choices"].empty()) {
    return CompletionResult::failure(BackendFailure::TransportError, "malformed completion body");
  }
  const json& choice = parsed["choices"][0];
  if (choice.value("finish_reason", "") == "content_filter") {
    return CompletionResult::failure(BackendFailure::ModelRefusal, "content filtered");
  }
  const json* message = choice.contains("message") ? &choice["message"] : nullptr;
  if (message != nullptr && message->contains("refusal") && (*message)["refusal"].is_string()) {
    return CompletionResult::failure(BackendFailure::ModelRefusal, (*message)["refusal"].get<std::string>());
  }
  if (message == nullptr || !message->contains("content") || !(*message)["content"].is_string()) {
    return CompletionResult::failure(BackendFailure::TransportError, "completion has no message content");
  }
  return CompletionResult::success((*message)["content"].get<std::string>());
}

}  // namespace devchat
