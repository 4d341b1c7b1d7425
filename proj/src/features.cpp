#include "devchat/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "devchat/error.hpp"

namespace devchat {

namespace {

constexpr std::array<std::string_view, kBaseFeatureCount> kBaseColumns = {
    "Weekday",        "Daytime",         "ReadabilityCLI",        "TextCodeRatio",      "UrlsCount",
    "UserMentions",   "CodeSnippets",    "QuestionLength",        "Sentiment",          "ActiveQuestioner",
    "ReceivedResponseRatio", "TotalEntitiesCount", "UniqueEntitiesCount", "EntityOccurrences", "IntentTotalCount"};

constexpr std::array<std::string_view, 3> kTrailingColumns = {"conversation_id", "channel_key", "label"};

std::string quote_csv(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Splits one CSV record; quoted fields may span lines.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

double parse_double(const std::string& text, std::size_t line, std::string_view column) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    throw ValidationError("feature csv line " + std::to_string(line) + ": column '" + std::string(column) +
                          "' is not a number: '" + text + "'");
  }
  return value;
}

}  // namespace

const std::array<std::string, kFeatureCount>& feature_columns() {
  static const std::array<std::string, kFeatureCount> columns = [] {
    std::array<std::string, kFeatureCount> c;
    std::size_t i = 0;
    for (auto name : kBaseColumns) c[i++] = std::string(name);
    for (IntentKind k : all_intent_kinds()) c[i++] = std::string(display_name(k));
    for (EntityKind k : all_entity_kinds()) c[i++] = std::string(display_name(k));
    return c;
  }();
  return columns;
}

std::array<double, 4 + kIntentKindCount + kEntityKindCount> entity_intent_features(const LabelSet& labels) {
  std::array<double, 4 + kIntentKindCount + kEntityKindCount> out{};
  std::array<std::size_t, kEntityKindCount> per_kind{};
  for (const auto& span : labels.entities) ++per_kind[static_cast<std::size_t>(span.kind)];
  const std::size_t total = labels.entities.size();
  const auto unique = static_cast<std::size_t>(std::count_if(per_kind.begin(), per_kind.end(), [](std::size_t n) { return n > 0; }));
  out[0] = static_cast<double>(total);
  out[1] = static_cast<double>(unique);
  out[2] = unique > 0 ? static_cast<double>(total) / static_cast<double>(unique) : 0.0;
  out[3] = static_cast<double>(labels.intents.size());
  std::size_t i = 4;
  for (IntentKind k : all_intent_kinds()) out[i++] = labels.intents.contains(k) ? 1.0 : 0.0;
  for (EntityKind k : all_entity_kinds()) out[i++] = per_kind[static_cast<std::size_t>(k)] > 0 ? 1.0 : 0.0;
  return out;
}

QuestionerHistory::QuestionerHistory(std::span<const Conversation> corpus) {
  for (const auto& c : corpus) {
    const std::string channel = c.channel_key();
    for (const auto& m : c.messages) messages_[{channel, m.user}].push_back(m.ts);
    if (c.messages.empty()) continue;
    const auto& asker = c.messages.front().user;
    const bool answered = std::any_of(c.messages.begin(), c.messages.end(),
                                      [&](const Message& m) { return m.user != asker; });
    questions_[{channel, asker}].push_back({c.messages.front().ts, answered});
  }
  for (auto& [key, times] : messages_) std::sort(times.begin(), times.end());
  for (auto& [key, asked] : questions_) {
    std::stable_sort(asked.begin(), asked.end(), [](const Asked& a, const Asked& b) { return a.at < b.at; });
  }
}

std::size_t QuestionerHistory::prior_messages(const std::string& channel_key, const std::string& user,
                                              Timestamp before) const {
  const auto it = messages_.find({channel_key, user});
  if (it == messages_.end()) return 0;
  return static_cast<std::size_t>(std::lower_bound(it->second.begin(), it->second.end(), before) - it->second.begin());
}

std::pair<std::size_t, std::size_t> QuestionerHistory::prior_questions(const std::string& channel_key,
                                                                       const std::string& user, Timestamp before) const {
  const auto it = questions_.find({channel_key, user});
  if (it == questions_.end()) return {0, 0};
  std::size_t asked = 0, answered = 0;
  for (const auto& q : it->second) {
    if (!(q.at < before)) break;
    ++asked;
    if (q.answered) ++answered;
  }
  return {asked, answered};
}

bool active_questioner(const QuestionerHistory& history, const InitialQuestion& q, std::size_t threshold) {
  return history.prior_messages(q.channel_key, q.asker, q.asked_at) >= threshold;
}

double received_response_ratio(const QuestionerHistory& history, const InitialQuestion& q) {
  const auto [asked, answered] = history.prior_questions(q.channel_key, q.asker, q.asked_at);
  return asked == 0 ? 0.0 : static_cast<double>(answered) / static_cast<double>(asked);
}

FeatureExtraction extract_features(std::span<const Conversation> corpus, std::span<const LabelSet> labels,
                                   const FeatureOptions& options) {
  FeatureExtraction result;
  auto& table = result.table;
  const auto& columns = feature_columns();
  table.columns.assign(columns.begin(), columns.end());
  if (options.specific_intent_presence) table.columns.emplace_back(kSpecificIntentPresence);

  std::unordered_map<std::string, const LabelSet*> by_key;
  for (const auto& l : labels) by_key.emplace(l.channel_key + '\x1f' + l.conversation_id, &l);

  const QuestionerHistory history(corpus);
  for (const auto& conversation : corpus) {
    const auto it = by_key.find(conversation.channel_key() + '\x1f' + conversation.id);
    if (it == by_key.end()) {
      ++result.tallies.unlabeled_conversations;
      continue;
    }
    if (conversation.messages.empty()) {
      ++result.tallies.empty_conversations;
      continue;
    }
    const LabelSet& label = *it->second;
    const InitialQuestion q = extract_initial_question(conversation);

    FeatureVector row;
    row.conversation_id = conversation.id;
    row.channel_key = conversation.channel_key();
    row.label = label.resolution;
    auto& v = row.values;
    v.reserve(table.columns.size());
    v.push_back(weekday(q));
    v.push_back(daytime(q));
    const double readability = readability_cli(q.text);
    if (question_length(q.text) == 0 || q.text.find_first_not_of(" \t\r\n") == std::string::npos) {
      ++result.tallies.empty_readability;
    }
    v.push_back(readability);
    v.push_back(text_code_ratio(q.text));
    v.push_back(static_cast<double>(count_urls(q.text)));
    v.push_back(static_cast<double>(count_mentions(q.text)));
    v.push_back(has_code(q.text) ? 1.0 : 0.0);
    v.push_back(static_cast<double>(question_length(q.text)));
    if (sentiment_hits(q.text) == 0) ++result.tallies.empty_sentiment;
    v.push_back(sentiment(q.text));
    v.push_back(active_questioner(history, q, options.active_threshold) ? 1.0 : 0.0);
    v.push_back(received_response_ratio(history, q));
    const auto derived = entity_intent_features(label);
    v.insert(v.end(), derived.begin(), derived.end());
    if (options.specific_intent_presence) {
      const IntentSet general{IntentKind::Conceptual, IntentKind::Learning};
      v.push_back(label.intents.without(general).empty() ? 0.0 : 1.0);
    }
    table.rows.push_back(std::move(row));
  }
  return result;
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  (void)ec;
  return std::string(buffer, ptr);
}

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << quote_csv(table.columns[i]);
  for (auto name : kTrailingColumns) out << ',' << name;
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.values.size(); ++i) out << (i ? "," : "") << format_double(row.values[i]);
    out << ',' << quote_csv(row.conversation_id) << ',' << quote_csv(row.channel_key) << ','
        << display_name(row.label) << '\n';
  }
}

FeatureTable read_feature_csv(std::istream& in) {
  FeatureTable table;
  std::vector<std::string> fields;
  if (!read_csv_record(in, fields)) throw ValidationError("feature csv: missing header");
  if (fields.size() < kTrailingColumns.size() ||
      !std::equal(kTrailingColumns.begin(), kTrailingColumns.end(), fields.end() - kTrailingColumns.size())) {
    throw ValidationError("feature csv: header must end with conversation_id,channel_key,label");
  }
  table.columns.assign(fields.begin(), fields.end() - kTrailingColumns.size());
  std::set<std::string> seen;
  for (const auto& c : table.columns) {
    if (!seen.insert(c).second) throw ValidationError("feature csv: duplicate column '" + c + "'");
  }
  const std::size_t width = fields.size();
  std::size_t line = 1;
  while (read_csv_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != width) {
      throw ValidationError("feature csv line " + std::to_string(line) + ": expected " + std::to_string(width) +
                            " fields, found " + std::to_string(fields.size()));
    }
    FeatureVector row;
    row.values.reserve(table.columns.size());
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      row.values.push_back(parse_double(fields[i], line, table.columns[i]));
    }
    row.conversation_id = fields[width - 3];
    row.channel_key = fields[width - 2];
    try {
      row.label = parse_resolution_status(fields[width - 1]);
    } catch (const std::exception&) {
      throw ValidationError("feature csv line " + std::to_string(line) + ": bad label '" + fields[width - 1] + "'");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace devchat
