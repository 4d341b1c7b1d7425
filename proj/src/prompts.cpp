#include <algorithm>
#include <map>
#include <string>

#include "devchat/labeler.hpp"
#include "devchat/prompt_templates.hpp"

namespace devchat {

namespace {

constexpr std::string_view kUserMarker = "\n<<<USER>>>\n";
constexpr std::size_t kKeepHead = 10;
constexpr std::size_t kKeepTail = 10;

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

Prompt render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  const auto split = tmpl.find(kUserMarker);
  Prompt prompt;
  prompt.system = std::string(tmpl.substr(0, split));
  prompt.user = split == std::string_view::npos ? std::string() : std::string(tmpl.substr(split + kUserMarker.size()));
  for (const auto& [key, value] : values) {
    const std::string placeholder = "{{" + key + "}}";
    prompt.system = replace_all(std::move(prompt.system), placeholder, value);
    prompt.user = replace_all(std::move(prompt.user), placeholder, value);
  }
  return prompt;
}

std::size_t prompt_tokens(const Prompt& prompt, const LabelerConfig& config) {
  return estimate_tokens(prompt.system) + estimate_tokens(prompt.user) +
         static_cast<std::size_t>(std::max(0, config.max_output_tokens));
}

void require_fits(const Prompt& prompt, const LabelerConfig& config, std::string_view what,
                  std::string_view conversation_id) {
  const std::size_t tokens = prompt_tokens(prompt, config);
  if (tokens > config.context_budget_tokens) {
    throw ContextOverflowError(std::string(what) + " prompt for conversation " + std::string(conversation_id) +
                               " needs ~" + std::to_string(tokens) + " tokens, budget is " +
                               std::to_string(config.context_budget_tokens));
  }
}

std::string entity_list() {
  std::string out = "[";
  for (auto kind : all_entity_kinds()) {
    if (out.size() > 1) out += ", ";
    out += display_name(kind);
  }
  return out + "]";
}

std::string intent_list() {
  std::string out;
  for (auto kind : all_intent_kinds()) {
    if (!out.empty()) out += ", ";
    out += display_name(kind);
  }
  return out;
}

std::string one_line(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

void require_question(const InitialQuestion& question) {
  if (question.text.empty()) {
    throw ValidationError("initial question of conversation " + question.conversation_id + " is empty");
  }
}

}  // namespace

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

void validate(const LabelerConfig& config) {
  if (!(config.temperature >= 0.0)) throw ValidationError("labeler: temperature must be >= 0");
  if (config.retry_budget < 0) throw ValidationError("labeler: retry budget must be >= 0");
  if (config.max_output_tokens <= 0) throw ValidationError("labeler: max output tokens must be positive");
  if (config.request_timeout.count() <= 0) throw ValidationError("labeler: request timeout must be positive");
  if (config.context_budget_tokens <= static_cast<std::size_t>(config.max_output_tokens)) {
    throw ValidationError("labeler: context budget must exceed the output token allowance");
  }
}

std::string Prompt::text() const { return system + "\n\n" + user; }

Prompt build_ner_prompt(const InitialQuestion& question, const LabelerConfig& config) {
  require_question(question);
  Prompt prompt = render(prompts::templates::kNer, {{"entity_list", entity_list()},
                                                    {"timestamp", format_timestamp(question.asked_at)},
                                                    {"question", question.text}});
  require_fits(prompt, config, "NER", question.conversation_id);
  return prompt;
}

Prompt build_intent_prompt(const InitialQuestion& question, const LabelerConfig& config) {
  require_question(question);
  Prompt prompt = render(prompts::templates::kIntent, {{"intent_list", intent_list()}, {"question", question.text}});
  require_fits(prompt, config, "intent", question.conversation_id);
  return prompt;
}

ResolutionPrompt build_resolution_prompt(const Conversation& conversation, const LabelerConfig& config) {
  if (conversation.messages.empty()) {
    throw ValidationError("conversation " + conversation.id + " has no messages");
  }
  std::map<std::string, int> user_numbers;
  std::vector<std::string> lines;
  lines.reserve(conversation.messages.size());
  for (const auto& message : conversation.messages) {
    auto [it, inserted] = user_numbers.try_emplace(message.user, static_cast<int>(user_numbers.size()) + 1);
    lines.push_back("User " + std::to_string(it->second) + ": " + one_line(message.text));
  }

  auto join = [](const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
      if (!out.empty()) out += '\n';
      out += p;
    }
    return out;
  };

  ResolutionPrompt result;
  result.prompt = render(prompts::templates::kResolution, {{"conversation", join(lines)}});
  if (prompt_tokens(result.prompt, config) <= config.context_budget_tokens) return result;

  if (lines.size() > kKeepHead + kKeepTail) {
    const std::size_t omitted = lines.size() - kKeepHead - kKeepTail;
    std::vector<std::string> kept(lines.begin(), lines.begin() + kKeepHead);
    kept.push_back("[... " + std::to_string(omitted) + " messages omitted ...]");
    kept.insert(kept.end(), lines.end() - kKeepTail, lines.end());
    result.prompt = render(prompts::templates::kResolution, {{"conversation", join(kept)}});
    result.elided = true;
    result.omitted_messages = omitted;
  }
  require_fits(result.prompt, config, "resolution", conversation.id);
  return result;
}

Prompt build_baseline_resolution_prompt(const InitialQuestion& question, const LabelerConfig& config) {
  require_question(question);
  Prompt prompt = render(prompts::templates::kBaseline, {{"question", question.text}});
  require_fits(prompt, config, "baseline", question.conversation_id);
  return prompt;
}

}  // namespace devchat
