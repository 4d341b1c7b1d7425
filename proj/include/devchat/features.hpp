#pragma once

// Fixed-schema numeric description of each conversation's initial question.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "devchat/corpus.hpp"
#include "devchat/taxonomy.hpp"

namespace devchat {

// ---------------------------------------------------------------------------
// Text measures
// ---------------------------------------------------------------------------

// Coleman-Liau index 0.0588 L - 0.296 S - 15.8 with L letters and S sentences
// per 100 whitespace-separated words. A sentence ends at a run of . ! ?
// followed by whitespace or the end of the text; at least one sentence is
// assumed. Text without words scores 0.
double readability_cli(std::string_view text);

// Characters inside ``` fences or `inline` spans divided by the characters
// outside them (delimiters count as outside); the denominator is at least 1.
double text_code_ratio(std::string_view text);

std::size_t count_urls(std::string_view text);
std::size_t count_mentions(std::string_view text);

// Fenced or inline backtick code, or a line indented by 4+ spaces or a tab.
bool has_code(std::string_view text);

// Length in Unicode code points.
std::size_t question_length(std::string_view text);

// Lexicon score in [-1, 1]: signed word valences summed, each flipped when a
// negator occurs within the three preceding tokens, then squashed by
// s / sqrt(s^2 + 15).
double sentiment(std::string_view text);

// Number of lexicon hits; 0 means sentiment() defaulted to 0.
std::size_t sentiment_hits(std::string_view text);

// 0 = Monday ... 6 = Sunday, in UTC.
int weekday(const InitialQuestion& question);
// Hour of day 0..23, in UTC.
int daytime(const InitialQuestion& question);

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

inline constexpr std::size_t kBaseFeatureCount = 15;
inline constexpr std::size_t kFeatureCount = kBaseFeatureCount + kIntentKindCount + kEntityKindCount;
static_assert(kFeatureCount == 50);

// Column names in order: 15 question measures, 7 intent indicators (intent
// display names), 28 entity indicators (entity display names).
const std::array<std::string, kFeatureCount>& feature_columns();

// Optional derived column: any intent other than Conceptual or Learning.
inline constexpr std::string_view kSpecificIntentPresence = "Specific Intent Presence";

// Counts and indicators for the 38 label-derived columns, in schema order
// starting at TotalEntitiesCount.
std::array<double, 4 + kIntentKindCount + kEntityKindCount> entity_intent_features(const LabelSet& labels);

// ---------------------------------------------------------------------------
// Questioner history
// ---------------------------------------------------------------------------

// Chronological per-channel activity, built once for the whole corpus and
// then only read.
class QuestionerHistory {
 public:
  explicit QuestionerHistory(std::span<const Conversation> corpus);

  // Messages by `user` in `channel_key` strictly before `before`.
  std::size_t prior_messages(const std::string& channel_key, const std::string& user, Timestamp before) const;

  // Conversations started by `user` in `channel_key` strictly before
  // `before`, and how many of those got a reply from someone else.
  std::pair<std::size_t, std::size_t> prior_questions(const std::string& channel_key, const std::string& user,
                                                      Timestamp before) const;

 private:
  struct Asked {
    Timestamp at;
    bool answered;
  };
  std::map<std::pair<std::string, std::string>, std::vector<Timestamp>> messages_;
  std::map<std::pair<std::string, std::string>, std::vector<Asked>> questions_;
};

bool active_questioner(const QuestionerHistory& history, const InitialQuestion& question, std::size_t threshold = 5);
double received_response_ratio(const QuestionerHistory& history, const InitialQuestion& question);

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

struct FeatureOptions {
  std::size_t active_threshold = 5;
  bool specific_intent_presence = false;
};

struct FeatureVector {
  std::string conversation_id;
  std::string channel_key;
  std::vector<double> values;
  ResolutionStatus label = ResolutionStatus::Unresolved;
};

struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<FeatureVector> rows;
};

struct FeatureTallies {
  std::size_t empty_readability = 0;
  std::size_t empty_sentiment = 0;
  std::size_t unlabeled_conversations = 0;
  std::size_t empty_conversations = 0;
};

struct FeatureExtraction {
  FeatureTable table;
  FeatureTallies tallies;
};

// One row per conversation that has a LabelSet (matched on channel key and
// conversation id), in corpus order. Unmatched conversations are tallied.
FeatureExtraction extract_features(std::span<const Conversation> corpus, std::span<const LabelSet> labels,
                                   const FeatureOptions& options = {});

// CSV with header = feature columns, conversation_id, channel_key, label.
void write_feature_csv(std::ostream& out, const FeatureTable& table);
FeatureTable read_feature_csv(std::istream& in);

// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace devchat
