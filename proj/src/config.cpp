#include "devchat/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "devchat/digest.hpp"
#include "devchat/error.hpp"
#include "devchat/features.hpp"

namespace devchat {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("config: '" + key + "' expects a number, got '" + text + "'");
  }
  return value;
}

bool looks_like_secret(const std::string& key) {
  std::string lower = key;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (const char* word : {"token", "secret", "password", "api_key"}) {
    if (lower.find(word) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

std::map<std::string, std::string> PipelineConfig::canonical() const {
  return {
      {"analysis.min_pair_occurrences", std::to_string(min_pair_occurrences)},
      {"features.active_threshold", std::to_string(active_threshold)},
      {"labeler.api_key_env", api_key_env},
      {"labeler.context_budget_tokens", std::to_string(labeler.context_budget_tokens)},
      {"labeler.endpoint", labeler.endpoint},
      {"labeler.max_output_tokens", std::to_string(labeler.max_output_tokens)},
      {"labeler.model", labeler.model},
      {"labeler.path", http_path},
      {"labeler.request_timeout_ms", std::to_string(labeler.request_timeout.count())},
      {"labeler.retry_budget", std::to_string(labeler.retry_budget)},
      {"labeler.temperature", format_double(labeler.temperature)},
      {"model.bootstrap", std::to_string(bootstrap)},
      {"model.smote_k", std::to_string(smote_k)},
      {"prune.correlation_cutoff", format_double(correlation_cutoff)},
      {"prune.vif_threshold", format_double(vif_threshold)},
  };
}

std::string PipelineConfig::hash() const {
  std::string text;
  for (const auto& [key, value] : canonical()) text += key + "=" + value + "\n";
  return sha256_hex(text);
}

void validate(const PipelineConfig& c) {
  validate(c.labeler);
  if (!(c.correlation_cutoff > 0.0 && c.correlation_cutoff < 1.0)) {
    throw ValidationError("config: prune correlation cutoff must lie in (0, 1)");
  }
  if (!(c.vif_threshold >= 1.0)) throw ValidationError("config: prune.vif_threshold must be at least 1");
  if (c.smote_k < 1) throw ValidationError("config: model.smote_k must be at least 1");
}

PipelineConfig load_config(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError("config: " + std::string(e.what()));
  }
  PipelineConfig c;
  std::optional<double> threshold, cutoff;
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
      {"labeler.endpoint", [&](auto&, auto& v) { c.labeler.endpoint = v; }},
      {"labeler.path", [&](auto&, auto& v) { c.http_path = v; }},
      {"labeler.model", [&](auto&, auto& v) { c.labeler.model = v; }},
      {"labeler.api_key_env", [&](auto&, auto& v) { c.api_key_env = v; }},
      {"labeler.temperature", [&](auto& k, auto& v) { c.labeler.temperature = parse_number<double>(k, v); }},
      {"labeler.max_output_tokens", [&](auto& k, auto& v) { c.labeler.max_output_tokens = parse_number<int>(k, v); }},
      {"labeler.request_timeout_ms",
       [&](auto& k, auto& v) { c.labeler.request_timeout = std::chrono::milliseconds(parse_number<long>(k, v)); }},
      {"labeler.retry_budget", [&](auto& k, auto& v) { c.labeler.retry_budget = parse_number<int>(k, v); }},
      {"labeler.context_budget_tokens",
       [&](auto& k, auto& v) { c.labeler.context_budget_tokens = parse_number<std::size_t>(k, v); }},
      {"features.active_threshold", [&](auto& k, auto& v) { c.active_threshold = parse_number<std::size_t>(k, v); }},
      {"prune.correlation_threshold", [&](auto& k, auto& v) { threshold = parse_number<double>(k, v); }},
      {"prune.correlation_cutoff", [&](auto& k, auto& v) { cutoff = parse_number<double>(k, v); }},
      {"prune.vif_threshold", [&](auto& k, auto& v) { c.vif_threshold = parse_number<double>(k, v); }},
      {"model.smote_k", [&](auto& k, auto& v) { c.smote_k = parse_number<std::size_t>(k, v); }},
      {"model.bootstrap", [&](auto& k, auto& v) { c.bootstrap = parse_number<std::size_t>(k, v); }},
      {"analysis.min_pair_occurrences",
       [&](auto& k, auto& v) { c.min_pair_occurrences = parse_number<std::size_t>(k, v); }},
  };
  for (const auto& [section, entries] : tree) {
    if (entries.empty()) throw ValidationError("config: key '" + section + "' must sit inside a [section]");
    for (const auto& [name, node] : entries) {
      const std::string key = section + "." + name;
      const auto it = setters.find(key);
      if (it == setters.end() && looks_like_secret(key)) {
        throw ValidationError("config: '" + key + "' looks like a credential; pass secrets through the environment");
      }
      if (it == setters.end()) throw ValidationError("config: unknown key '" + key + "'");
      it->second(key, node.get_value<std::string>());
    }
  }
  if (threshold && cutoff && std::abs((1.0 - *threshold) - *cutoff) > 1e-12) {
    throw ValidationError("config: prune.correlation_threshold and prune.correlation_cutoff disagree");
  }
  if (threshold) c.correlation_cutoff = 1.0 - *threshold;
  if (cutoff) c.correlation_cutoff = *cutoff;
  validate(c);
  return c;
}

}  // namespace devchat
