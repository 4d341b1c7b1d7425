#pragma once

// Prompt construction, response parsing and batch labeling of a corpus.

#include <chrono>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "devchat/backend.hpp"
#include "devchat/corpus.hpp"
#include "devchat/error.hpp"
#include "devchat/taxonomy.hpp"

namespace devchat {

struct LabelerConfig {
  std::string endpoint;
  std::string model;
  double temperature = 0.0;
  int max_output_tokens = 512;
  std::chrono::milliseconds request_timeout{60'000};
  int retry_budget = 3;
  std::size_t context_budget_tokens = 33'000;
};

void validate(const LabelerConfig& config);

// Rough token count used for context budgeting: ceil(bytes / 4).
std::size_t estimate_tokens(std::string_view text);

struct Prompt {
  std::string system;
  std::string user;

  // system + "\n\n" + user
  std::string text() const;
};

class ContextOverflowError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

Prompt build_ner_prompt(const InitialQuestion& question, const LabelerConfig& config = {});
Prompt build_intent_prompt(const InitialQuestion& question, const LabelerConfig& config = {});

struct ResolutionPrompt {
  Prompt prompt;
  // Middle messages were dropped to fit the context budget.
  bool elided = false;
  std::size_t omitted_messages = 0;
};

// Messages are rendered as "User k: text", users numbered by first
// appearance. Conversations over budget keep their first and last ten
// messages around an elision marker.
ResolutionPrompt build_resolution_prompt(const Conversation& conversation, const LabelerConfig& config = {});

Prompt build_baseline_resolution_prompt(const InitialQuestion& question, const LabelerConfig& config = {});

// Response parsing

class ResponseParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NerParse {
  std::vector<EntitySpan> spans;
  // Items whose kind is outside the taxonomy or that are not "surface: Kind".
  std::size_t dropped_items = 0;
};

// Extracts the first well-formed JSON array of "surface: Kind" strings from
// the response. Throws ResponseParseError when there is none.
NerParse parse_ner_response(std::string_view raw, Timestamp message_ts = {});

struct IntentParse {
  IntentSet intents;
  std::size_t dropped_items = 0;
};

// Throws ResponseParseError when no array is found or no item names a known
// intent.
IntentParse parse_intent_response(std::string_view raw);

// The array must hold exactly one of "Resolved" / "Unresolved".
ResolutionStatus parse_resolution_response(std::string_view raw);

struct BaselinePrediction {
  bool likely_resolved = false;
  double confidence = 0.0;  // [0, 1]

  // Probability-like score that the question gets resolved.
  double resolved_score() const { return likely_resolved ? confidence : 1.0 - confidence; }
};

// {"resolution_status": "Yes"|"No", "confidence_score": "82%"}
BaselinePrediction parse_baseline_response(std::string_view raw);

// First balanced JSON array (or object) in `raw` that parses; empty when
// none does.
std::optional<std::string> extract_json_array(std::string_view raw);
std::optional<std::string> extract_json_object(std::string_view raw);

// Batch labeling

struct LabelingOptions {
  LabelerConfig config;
  int jobs = 1;
  std::chrono::milliseconds backoff_initial{500};
  double backoff_multiplier = 2.0;
  std::chrono::milliseconds backoff_max{30'000};
  // Abort after this many conversations in a row exhaust their retries on
  // transient failures.
  std::size_t abort_after_consecutive_failures = 5;
  bool with_baseline = false;
  // First input index to label (resumption cursor from an aborted run).
  std::size_t start_index = 0;
  // Replaced in tests to avoid real sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct TaskTally {
  std::size_t requests = 0;
  std::size_t retries = 0;
  std::size_t backend_failures = 0;
  std::size_t parse_failures = 0;
};

struct LabelingFailure {
  std::size_t index = 0;
  std::string conversation_id;
  std::string channel_key;
  std::string task;
  std::string reason;
};

struct BaselineRecord {
  std::string conversation_id;
  std::string channel_key;
  BaselinePrediction prediction;
};

struct LabelingReport {
  std::vector<LabelSet> labels;       // input order
  std::vector<BaselineRecord> baseline;  // input order, when requested
  std::vector<LabelingFailure> failures;
  TaskTally ner, intent, resolution, baseline_task;
  std::size_t dropped_entity_items = 0;
  std::size_t dropped_intent_items = 0;
  std::size_t elided_conversations = 0;
  std::size_t processed = 0;
  bool aborted = false;
  // Index of the first conversation not yet attempted; equals the corpus
  // size when the run completed.
  std::size_t resume_cursor = 0;
};

// Runs NER and intent detection on each initial question and resolution
// classification on the full conversation. One conversation's failure never
// stops the batch; a backend that keeps failing aborts it with partial
// results.
LabelingReport label_corpus(std::span<const Conversation> corpus, CompletionBackend& backend,
                            const LabelingOptions& options);

nlohmann::json to_json(const LabelingReport& report);
nlohmann::json to_json(const BaselineRecord& record);
BaselineRecord baseline_record_from_json(const nlohmann::json& j);
std::vector<BaselineRecord> read_baseline_records(std::istream& in);

}  // namespace devchat
