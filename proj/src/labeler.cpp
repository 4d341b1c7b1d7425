#include "devchat/labeler.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <istream>
#include <mutex>
#include <thread>

namespace devchat {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Position one past the bracket that closes the one at `open`, skipping
// over string literals; npos when unbalanced.
std::size_t matching_close(std::string_view raw, std::size_t open, char open_ch, char close_ch) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == open_ch) ++depth;
    else if (c == close_ch && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

std::optional<std::string> extract_json(std::string_view raw, char open_ch, char close_ch, bool want_array) {
  for (std::size_t pos = raw.find(open_ch); pos != std::string_view::npos; pos = raw.find(open_ch, pos + 1)) {
    const std::size_t end = matching_close(raw, pos, open_ch, close_ch);
    if (end == std::string_view::npos) continue;
    const std::string_view candidate = raw.substr(pos, end - pos);
    const json parsed = json::parse(candidate, nullptr, false);
    if (!parsed.is_discarded() && (want_array ? parsed.is_array() : parsed.is_object())) {
      return std::string(candidate);
    }
  }
  return std::nullopt;
}

json first_array(std::string_view raw, std::string_view what) {
  auto text = extract_json_array(raw);
  if (!text) throw ResponseParseError(std::string(what) + " response contains no JSON array");
  return json::parse(*text);
}

double parse_confidence(const json& value) {
  double percent = 0.0;
  if (value.is_number()) {
    percent = value.get<double>();
  } else if (value.is_string()) {
    std::string s = trim(value.get<std::string>());
    if (!s.empty() && s.back() == '%') s = trim(s.substr(0, s.size() - 1));
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, percent);
    if (ec != std::errc() || ptr != last) throw ResponseParseError("confidence_score is not a percentage");
  } else {
    throw ResponseParseError("confidence_score is missing or not a percentage");
  }
  if (percent < 0.0 || percent > 100.0) throw ResponseParseError("confidence_score outside 0-100%");
  return percent / 100.0;
}

}  // namespace

std::optional<std::string> extract_json_array(std::string_view raw) { return extract_json(raw, '[', ']', true); }

std::optional<std::string> extract_json_object(std::string_view raw) { return extract_json(raw, '{', '}', false); }

NerParse parse_ner_response(std::string_view raw, Timestamp message_ts) {
  const json items = first_array(raw, "NER");
  NerParse result;
  for (const auto& item : items) {
    std::string surface, kind_text;
    if (item.is_string()) {
      const std::string entry = item.get<std::string>();
      const auto colon = entry.rfind(':');
      if (colon == std::string::npos) {
        ++result.dropped_items;
        continue;
      }
      surface = trim(std::string_view(entry).substr(0, colon));
      kind_text = trim(std::string_view(entry).substr(colon + 1));
    } else if (item.is_object() && item.contains("surface") && item.contains("kind") && item["surface"].is_string() &&
               item["kind"].is_string()) {
      surface = trim(item["surface"].get<std::string>());
      kind_text = item["kind"].get<std::string>();
    } else {
      ++result.dropped_items;
      continue;
    }
    const auto kind = try_parse_entity_kind(kind_text);
    if (surface.empty() || !kind) {
      ++result.dropped_items;
      continue;
    }
    result.spans.push_back({std::move(surface), *kind, message_ts});
  }
  return result;
}

IntentParse parse_intent_response(std::string_view raw) {
  const json items = first_array(raw, "intent");
  IntentParse result;
  for (const auto& item : items) {
    const auto kind = item.is_string() ? try_parse_intent_kind(item.get<std::string>()) : std::nullopt;
    if (!kind) {
      ++result.dropped_items;
      continue;
    }
    result.intents.insert(*kind);
  }
  if (result.intents.empty()) throw ResponseParseError("intent response names no known intent");
  return result;
}

ResolutionStatus parse_resolution_response(std::string_view raw) {
  const json items = first_array(raw, "resolution");
  if (items.size() != 1 || !items[0].is_string()) {
    throw ResponseParseError("resolution response must hold exactly one status");
  }
  try {
    return parse_resolution_status(items[0].get<std::string>());
  } catch (const UnknownKindError& e) {
    throw ResponseParseError(e.what());
  }
}

BaselinePrediction parse_baseline_response(std::string_view raw) {
  const auto text = extract_json_object(raw);
  if (!text) throw ResponseParseError("baseline response contains no JSON object");
  const json object = json::parse(*text);
  if (!object.contains("resolution_status") || !object["resolution_status"].is_string()) {
    throw ResponseParseError("baseline response lacks resolution_status");
  }
  std::string status = trim(object["resolution_status"].get<std::string>());
  std::transform(status.begin(), status.end(), status.begin(), [](unsigned char c) { return std::tolower(c); });
  BaselinePrediction prediction;
  if (status == "yes") prediction.likely_resolved = true;
  else if (status == "no") prediction.likely_resolved = false;
  else throw ResponseParseError("resolution_status must be Yes or No");
  prediction.confidence = parse_confidence(object.contains("confidence_score") ? object["confidence_score"] : json());
  return prediction;
}

// ---------------------------------------------------------------------------
// Batch labeling
// ---------------------------------------------------------------------------

namespace {

struct ItemResult {
  bool attempted = false;
  bool transient_exhausted = false;
  std::optional<LabelSet> labels;
  std::optional<BaselineRecord> baseline;
  std::vector<LabelingFailure> failures;
  TaskTally ner, intent, resolution, baseline_task;
  std::size_t dropped_entities = 0;
  std::size_t dropped_intents = 0;
  bool elided = false;
};

class TaskFailed : public std::runtime_error {
 public:
  TaskFailed(std::string reason, bool transient) : std::runtime_error(std::move(reason)), transient_(transient) {}
  bool transient() const { return transient_; }

 private:
  bool transient_;
};

class ItemLabeler {
 public:
  ItemLabeler(CompletionBackend& backend, const LabelingOptions& options) : backend_(backend), options_(options) {}

  ItemResult label(const Conversation& conversation, std::size_t index) const {
    ItemResult item;
    item.attempted = true;
    const auto& config = options_.config;

    auto fail = [&](std::string task, std::string reason) {
      item.failures.push_back({index, conversation.id, conversation.channel_key(), std::move(task), std::move(reason)});
    };

    try {
      const InitialQuestion question = extract_initial_question(conversation);
      LabelSet labels;
      labels.conversation_id = conversation.id;
      labels.channel_key = conversation.channel_key();
      labels.source = backend_.label_source();
      bool ok = true;

      ok &= run_task(item, "ner", item.ner, fail, [&] {
        const Prompt prompt = build_ner_prompt(question, config);
        const std::string text = complete(prompt, item.ner);
        NerParse parsed = parse_ner_response(text, question.asked_at);
        item.dropped_entities += parsed.dropped_items;
        labels.entities = std::move(parsed.spans);
      });
      ok &= run_task(item, "intent", item.intent, fail, [&] {
        const Prompt prompt = build_intent_prompt(question, config);
        const std::string text = complete(prompt, item.intent);
        IntentParse parsed = parse_intent_response(text);
        item.dropped_intents += parsed.dropped_items;
        labels.intents = parsed.intents;
      });
      ok &= run_task(item, "resolution", item.resolution, fail, [&] {
        const ResolutionPrompt prompt = build_resolution_prompt(conversation, config);
        item.elided = prompt.elided;
        const std::string text = complete(prompt.prompt, item.resolution);
        labels.resolution = parse_resolution_response(text);
      });
      if (options_.with_baseline) {
        run_task(item, "baseline", item.baseline_task, fail, [&] {
          const Prompt prompt = build_baseline_resolution_prompt(question, config);
          const std::string text = complete(prompt, item.baseline_task);
          item.baseline = BaselineRecord{conversation.id, conversation.channel_key(), parse_baseline_response(text)};
        });
      }
      if (ok) item.labels = std::move(labels);
    } catch (const ValidationError& e) {
      fail("input", e.what());
    } catch (const std::exception& e) {
      fail("internal", e.what());
    }
    return item;
  }

 private:
  template <typename Fail, typename Body>
  bool run_task(ItemResult& item, const char* task, TaskTally& tally, Fail& fail, Body&& body) const {
    try {
      body();
      return true;
    } catch (const TaskFailed& e) {
      ++tally.backend_failures;
      if (e.transient()) item.transient_exhausted = true;
      fail(task, e.what());
    } catch (const ResponseParseError& e) {
      ++tally.parse_failures;
      fail(task, std::string("parse failure: ") + e.what());
    } catch (const ContextOverflowError& e) {
      fail(task, e.what());
    }
    return false;
  }

  std::string complete(const Prompt& prompt, TaskTally& tally) const {
    const auto& config = options_.config;
    CompletionRequest request{prompt.system, prompt.user, config.temperature, config.max_output_tokens,
                              config.request_timeout};
    auto delay = options_.backoff_initial;
    for (int attempt = 0;; ++attempt) {
      ++tally.requests;
      CompletionResult result = backend_.complete(request);
      if (result.ok()) return result.text();
      const bool transient = is_transient(result.failure_kind());
      if (!transient || attempt >= config.retry_budget) {
        throw TaskFailed(std::string(to_string(result.failure_kind())) +
                             (result.detail().empty() ? "" : ": " + result.detail()),
                         transient);
      }
      ++tally.retries;
      if (options_.sleep) options_.sleep(delay);
      else std::this_thread::sleep_for(delay);
      delay = std::min(options_.backoff_max,
                       std::chrono::milliseconds(static_cast<long long>(delay.count() * options_.backoff_multiplier)));
    }
  }

  CompletionBackend& backend_;
  const LabelingOptions& options_;
};

void add(TaskTally& into, const TaskTally& from) {
  into.requests += from.requests;
  into.retries += from.retries;
  into.backend_failures += from.backend_failures;
  into.parse_failures += from.parse_failures;
}

}  // namespace

LabelingReport label_corpus(std::span<const Conversation> corpus, CompletionBackend& backend,
                            const LabelingOptions& options) {
  validate(options.config);
  const std::size_t n = corpus.size();
  const std::size_t start = std::min(options.start_index, n);
  std::vector<ItemResult> items(n);
  ItemLabeler labeler(backend, options);

  std::atomic<std::size_t> next{start};
  std::atomic<bool> abort{false};
  std::mutex streak_mutex;
  std::size_t streak = 0;

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      items[i] = labeler.label(corpus[i], i);
      std::lock_guard lock(streak_mutex);
      if (items[i].transient_exhausted) {
        if (++streak >= options.abort_after_consecutive_failures) abort.store(true);
      } else {
        streak = 0;
      }
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  LabelingReport report;
  report.aborted = abort.load();
  report.resume_cursor = n;
  if (report.aborted) {
    for (std::size_t i = start; i < n; ++i) {
      if (!items[i].attempted || items[i].transient_exhausted) {
        report.resume_cursor = i;
        break;
      }
    }
  }

  for (std::size_t i = start; i < report.resume_cursor; ++i) {
    ItemResult& item = items[i];
    ++report.processed;
    add(report.ner, item.ner);
    add(report.intent, item.intent);
    add(report.resolution, item.resolution);
    add(report.baseline_task, item.baseline_task);
    report.dropped_entity_items += item.dropped_entities;
    report.dropped_intent_items += item.dropped_intents;
    if (item.elided) ++report.elided_conversations;
    for (auto& f : item.failures) report.failures.push_back(std::move(f));
    if (item.labels) report.labels.push_back(std::move(*item.labels));
    if (item.baseline) report.baseline.push_back(std::move(*item.baseline));
  }
  return report;
}

namespace {

json tally_json(const TaskTally& t) {
  return {{"requests", t.requests},
          {"retries", t.retries},
          {"backend_failures", t.backend_failures},
          {"parse_failures", t.parse_failures}};
}

}  // namespace

json to_json(const LabelingReport& report) {
  json failures = json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"index", f.index},
                        {"conversation_id", f.conversation_id},
                        {"channel", f.channel_key},
                        {"task", f.task},
                        {"reason", f.reason}});
  }
  return {
      {"labeled", report.labels.size()},
      {"processed", report.processed},
      {"aborted", report.aborted},
      {"resume_cursor", report.resume_cursor},
      {"tasks",
       {{"ner", tally_json(report.ner)},
        {"intent", tally_json(report.intent)},
        {"resolution", tally_json(report.resolution)},
        {"baseline", tally_json(report.baseline_task)}}},
      {"dropped_entity_items", report.dropped_entity_items},
      {"dropped_intent_items", report.dropped_intent_items},
      {"elided_conversations", report.elided_conversations},
      {"failures", std::move(failures)},
  };
}

json to_json(const BaselineRecord& record) {
  return {{"conversation_id", record.conversation_id},
          {"channel", record.channel_key},
          {"resolution_status", record.prediction.likely_resolved ? "Yes" : "No"},
          {"confidence", record.prediction.confidence}};
}

BaselineRecord baseline_record_from_json(const json& j) {
  try {
    BaselineRecord record;
    record.conversation_id = j.at("conversation_id").get<std::string>();
    record.channel_key = j.value("channel", "");
    record.prediction.likely_resolved = j.at("resolution_status").get<std::string>() == "Yes";
    record.prediction.confidence = j.at("confidence").get<double>();
    return record;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid baseline record: ") + e.what());
  }
}

std::vector<BaselineRecord> read_baseline_records(std::istream& in) {
  std::vector<BaselineRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ValidationError("baseline file contains malformed JSON");
    records.push_back(baseline_record_from_json(j));
  }
  return records;
}

}  // namespace devchat
