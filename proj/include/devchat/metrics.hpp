#pragma once

// Agreement and accuracy measures for labels against a golden reference.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "devchat/taxonomy.hpp"

namespace devchat {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

struct TaskScores {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  double accuracy = 0.0;
};

// Precision is 0 when tp+fp = 0, recall 0 when tp+fn = 0, F is 0 when
// P+R = 0 and accuracy is 0 for an all-zero table.
TaskScores scores(const ConfusionCounts& counts);

struct Token {
  std::string text;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
};

// Word runs (letters, digits, '_', with '.' kept between word characters)
// and single punctuation characters. Inside backtick spans the text is split
// on whitespace only, so code such as numpy.mean() stays one token.
std::vector<Token> tokenize(std::string_view text);

struct NerConfusion {
  ConfusionCounts counts;
  // One breakdown per entity kind, indexed by the kind's enum value.
  std::array<ConfusionCounts, kEntityKindCount> per_kind{};
  // Spans whose surface could not be located among the question tokens.
  std::size_t unaligned_golden = 0;
  std::size_t unaligned_predicted = 0;
  std::size_t token_count = 0;
};

// Token-level entity agreement over `question_text`. Each span claims the
// leftmost unclaimed occurrence of its surface; a token's golden and
// predicted kinds are then compared:
//   same kind -> TP; predicted only -> FP; golden only -> FN;
//   different kinds -> FP and FN; neither -> TN.
// An unlocatable span counts once as FP (predicted) or FN (golden).
NerConfusion ner_token_confusion(const LabelSet& golden, const LabelSet& predicted, std::string_view question_text);

// Multi-label comparison over the seven intents.
ConfusionCounts intent_confusion(const LabelSet& golden, const LabelSet& predicted);

// Binary comparison with Resolved as the positive class.
ConfusionCounts resolution_confusion(const LabelSet& golden, const LabelSet& predicted);

// Chance-corrected agreement between two raters. Throws ValidationError on
// empty input or length mismatch.
double cohen_kappa(std::span<const int> rater_a, std::span<const int> rater_b);

// Mann-Whitney estimate of the area under the ROC curve: the fraction of
// (positive, negative) pairs ranked correctly, ties counting one half.
// Throws ValidationError unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

struct GoldenPair {
  const LabelSet* golden;
  const LabelSet* predicted;
  std::string question_text;
};

struct MetricsReport {
  std::size_t conversations = 0;
  NerConfusion entities;
  ConfusionCounts intents;
  std::array<ConfusionCounts, kIntentKindCount> per_intent{};
  ConfusionCounts resolution;
  double resolution_kappa = 0.0;
  std::vector<std::string> warnings;
};

// Micro-averaged scores over all pairs.
MetricsReport evaluate_labels(std::span<const GoldenPair> pairs);

nlohmann::json to_json(const ConfusionCounts& counts);
nlohmann::json to_json(const TaskScores& scores);
nlohmann::json to_json(const MetricsReport& report);

}  // namespace devchat
