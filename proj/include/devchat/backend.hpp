#pragma once

// Completion backends: anything that turns (instruction, user text,
// decoding parameters) into a completion string or a typed failure.

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "devchat/taxonomy.hpp"

namespace devchat {

enum class BackendFailure { Timeout, RateLimited, TransportError, ModelRefusal };

std::string_view to_string(BackendFailure failure);

// Timeouts, rate limiting and transport errors are worth retrying.
bool is_transient(BackendFailure failure);

struct CompletionRequest {
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_output_tokens = 512;
  std::chrono::milliseconds timeout{60'000};
};

class CompletionResult {
 public:
  static CompletionResult success(std::string text) { return CompletionResult(std::move(text)); }
  static CompletionResult failure(BackendFailure kind, std::string detail = {}) {
    return CompletionResult(kind, std::move(detail));
  }

  bool ok() const { return text_.has_value(); }
  const std::string& text() const { return *text_; }
  BackendFailure failure_kind() const { return failure_; }
  const std::string& detail() const { return detail_; }

 private:
  explicit CompletionResult(std::string text) : text_(std::move(text)) {}
  CompletionResult(BackendFailure kind, std::string detail) : failure_(kind), detail_(std::move(detail)) {}

  std::optional<std::string> text_;
  BackendFailure failure_ = BackendFailure::TransportError;
  std::string detail_;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  // Must be safe to call from several threads at once.
  virtual CompletionResult complete(const CompletionRequest& request) = 0;

  // Source recorded on LabelSets produced through this backend.
  virtual LabelSource label_source() const { return LabelSource::Model; }

  virtual std::string name() const = 0;
};

// Offline rule-based backend. A pure function of the request text: it
// recognizes which of the labeling prompts it received and answers in that
// prompt's output format using fixed keyword and pattern tables.
class MockBackend final : public CompletionBackend {
 public:
  CompletionResult complete(const CompletionRequest& request) override;
  LabelSource label_source() const override { return LabelSource::Mock; }
  std::string name() const override { return "mock"; }

  // Rule table version; bump when any table below changes.
  static constexpr std::string_view kRulesVersion = "mock-rules-1";

  // Exposed for tests and the synthetic corpus generator.
  static std::string entity_response(std::string_view question);
  static std::string intent_response(std::string_view question);
  static std::string resolution_response(std::string_view conversation_lines);
  static std::string baseline_response(std::string_view question);
};

struct HttpBackendConfig {
  std::string endpoint;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  // Name of the environment variable holding the bearer token.
  std::string api_key_env = "DEVCHAT_API_KEY";
  bool debug = false;
};

// Chat-completions-style HTTP client.
class HttpBackend final : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  CompletionResult complete(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  HttpBackendConfig config_;
  std::string token_;
};

}  // namespace devchat
