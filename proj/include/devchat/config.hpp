#pragma once

// Pipeline settings read from an INI-style key = value file.
//
//   [labeler]   endpoint, path, model, api_key_env, temperature,
//               max_output_tokens, request_timeout_ms, retry_budget,
//               context_budget_tokens
//   [features]  active_threshold
//   [prune]     correlation_threshold (|rho|, default 0.7) or
//               correlation_cutoff (1 - |rho|, default 0.3), vif_threshold
//   [model]     smote_k, bootstrap
//   [analysis]  min_pair_occurrences
//
// API credentials are never read from this file; see labeler.api_key_env.

#include <cstddef>
#include <map>
#include <string>

#include "devchat/labeler.hpp"

namespace devchat {

struct PipelineConfig {
  LabelerConfig labeler;
  std::string http_path = "/v1/chat/completions";
  std::string api_key_env = "DEVCHAT_API_KEY";
  std::size_t active_threshold = 5;
  double correlation_cutoff = 0.3;
  double vif_threshold = 10.0;
  std::size_t smote_k = 5;
  std::size_t bootstrap = 100;
  std::size_t min_pair_occurrences = 10;

  // Effective settings as sorted "section.key" -> text.
  std::map<std::string, std::string> canonical() const;
  // SHA-256 of the canonical settings, one "key=value" line each.
  std::string hash() const;
};

// Throws ValidationError for unreadable files, unknown keys, bad values or
// keys that look like credentials.
PipelineConfig load_config(const std::string& path);

void validate(const PipelineConfig& config);

}  // namespace devchat
