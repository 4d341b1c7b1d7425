#include "devchat/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <optional>

#include "devchat/error.hpp"

namespace devchat {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

using TokenKinds = std::vector<std::optional<EntityKind>>;

// Marks the tokens covered by each span; returns the number of spans that
// could not be placed.
std::size_t align_spans(std::string_view text, const std::vector<Token>& tokens, const std::vector<EntitySpan>& spans,
                        TokenKinds& kinds) {
  std::size_t unaligned = 0;
  std::vector<bool> claimed(tokens.size(), false);
  for (const auto& span : spans) {
    if (span.surface.empty()) {
      ++unaligned;
      continue;
    }
    // Prefer occurrences that start and end on token boundaries.
    std::optional<std::pair<std::size_t, std::size_t>> best;
    std::optional<std::pair<std::size_t, std::size_t>> fallback;
    for (std::size_t pos = text.find(span.surface); pos != std::string_view::npos;
         pos = text.find(span.surface, pos + 1)) {
      const std::size_t end = pos + span.surface.size();
      std::size_t first = tokens.size(), last = 0;
      bool aligned_begin = false, aligned_end = false, free = true;
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        if (tokens[t].end <= pos || tokens[t].begin >= end) continue;
        first = std::min(first, t);
        last = std::max(last, t);
        if (tokens[t].begin == pos) aligned_begin = true;
        if (tokens[t].end == end) aligned_end = true;
        if (claimed[t]) free = false;
      }
      if (first == tokens.size() || !free) continue;
      if (aligned_begin && aligned_end) {
        best = {first, last};
        break;
      }
      if (!fallback) fallback = {first, last};
    }
    if (!best) best = fallback;
    if (!best) {
      ++unaligned;
      continue;
    }
    for (std::size_t t = best->first; t <= best->second; ++t) {
      claimed[t] = true;
      kinds[t] = span.kind;
    }
  }
  return unaligned;
}

}  // namespace

TaskScores scores(const ConfusionCounts& c) {
  TaskScores s;
  s.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
  s.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  s.f_score = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
  s.accuracy = ratio(static_cast<double>(c.tp + c.tn), static_cast<double>(c.total()));
  return s;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  bool in_code = false;
  auto emit = [&](std::size_t b, std::size_t e) { tokens.push_back({std::string(text.substr(b, e - b)), b, e}); };
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == '`') {
      std::size_t run = i;
      while (run < text.size() && text[run] == '`') ++run;
      for (std::size_t b = i; b < run; ++b) emit(b, b + 1);
      in_code = !in_code;
      i = run;
      continue;
    }
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (in_code) {
      std::size_t end = i;
      while (end < text.size() && text[end] != '`' && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
      emit(i, end);
      i = end;
      continue;
    }
    if (is_word_byte(c)) {
      std::size_t end = i;
      while (end < text.size()) {
        const auto d = static_cast<unsigned char>(text[end]);
        if (is_word_byte(d)) {
          ++end;
        } else if (d == '.' && end + 1 < text.size() && is_word_byte(static_cast<unsigned char>(text[end + 1]))) {
          ++end;
        } else {
          break;
        }
      }
      emit(i, end);
      i = end;
      continue;
    }
    emit(i, i + 1);
    ++i;
  }
  return tokens;
}

NerConfusion ner_token_confusion(const LabelSet& golden, const LabelSet& predicted, std::string_view question_text) {
  NerConfusion out;
  const auto tokens = tokenize(question_text);
  out.token_count = tokens.size();
  TokenKinds gold(tokens.size()), pred(tokens.size());
  out.unaligned_golden = align_spans(question_text, tokens, golden.entities, gold);
  out.unaligned_predicted = align_spans(question_text, tokens, predicted.entities, pred);

  auto& c = out.counts;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto& g = gold[t];
    const auto& p = pred[t];
    if (g && p && *g == *p) {
      ++c.tp;
    } else {
      if (p) ++c.fp;
      if (g) ++c.fn;
      if (!g && !p) ++c.tn;
    }
    for (EntityKind k : all_entity_kinds()) {
      auto& pk = out.per_kind[static_cast<std::size_t>(k)];
      const bool gk = g && *g == k;
      const bool pkind = p && *p == k;
      if (gk && pkind) ++pk.tp;
      else if (pkind) ++pk.fp;
      else if (gk) ++pk.fn;
      else ++pk.tn;
    }
  }
  c.fp += out.unaligned_predicted;
  c.fn += out.unaligned_golden;
  return out;
}

ConfusionCounts intent_confusion(const LabelSet& golden, const LabelSet& predicted) {
  const IntentSet g = golden.intents, p = predicted.intents;
  ConfusionCounts c;
  c.tp = (g & p).size();
  c.fp = p.without(g).size();
  c.fn = g.without(p).size();
  c.tn = kIntentKindCount - (g | p).size();
  return c;
}

ConfusionCounts resolution_confusion(const LabelSet& golden, const LabelSet& predicted) {
  const bool g = golden.resolution == ResolutionStatus::Resolved;
  const bool p = predicted.resolution == ResolutionStatus::Resolved;
  ConfusionCounts c;
  if (g && p) c.tp = 1;
  else if (p) c.fp = 1;
  else if (g) c.fn = 1;
  else c.tn = 1;
  return c;
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ValidationError("cohen_kappa: rater label lists differ in length");
  if (a.empty()) throw ValidationError("cohen_kappa: no ratings");
  std::vector<int> categories(a.begin(), a.end());
  categories.insert(categories.end(), b.begin(), b.end());
  std::sort(categories.begin(), categories.end());
  categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
  auto index_of = [&](int v) {
    return static_cast<std::size_t>(std::lower_bound(categories.begin(), categories.end(), v) - categories.begin());
  };
  std::vector<double> margin_a(categories.size(), 0.0), margin_b(categories.size(), 0.0);
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    margin_a[index_of(a[i])] += 1.0;
    margin_b[index_of(b[i])] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  const double n = static_cast<double>(a.size());
  const double p_o = agree / n;
  double p_e = 0.0;
  for (std::size_t k = 0; k < categories.size(); ++k) p_e += (margin_a[k] / n) * (margin_b[k] / n);
  if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] < scores[y]; });
  double positives = 0.0, negatives = 0.0;
  // Counted in half-units so that the sum stays an exact integer.
  double twice_concordant = 0.0;
  double negatives_below = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double pos_here = 0.0, neg_here = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? pos_here : neg_here) += 1.0;
      ++j;
    }
    twice_concordant += pos_here * (2.0 * negatives_below + neg_here);
    negatives_below += neg_here;
    positives += pos_here;
    negatives += neg_here;
    i = j;
  }
  if (positives == 0.0 || negatives == 0.0) throw ValidationError("auc: both classes must be present");
  return twice_concordant / (2.0 * positives * negatives);
}

MetricsReport evaluate_labels(std::span<const GoldenPair> pairs) {
  MetricsReport report;
  report.conversations = pairs.size();
  std::vector<int> gold_res, pred_res;
  for (const auto& pair : pairs) {
    const auto ner = ner_token_confusion(*pair.golden, *pair.predicted, pair.question_text);
    report.entities.counts += ner.counts;
    for (std::size_t k = 0; k < kEntityKindCount; ++k) report.entities.per_kind[k] += ner.per_kind[k];
    report.entities.unaligned_golden += ner.unaligned_golden;
    report.entities.unaligned_predicted += ner.unaligned_predicted;
    report.entities.token_count += ner.token_count;
    if (ner.unaligned_golden + ner.unaligned_predicted > 0) {
      report.warnings.push_back(pair.golden->conversation_id + ": " +
                                std::to_string(ner.unaligned_golden + ner.unaligned_predicted) +
                                " entity span(s) not found in the question text");
    }
    report.intents += intent_confusion(*pair.golden, *pair.predicted);
    for (IntentKind k : all_intent_kinds()) {
      auto& slot = report.per_intent[static_cast<std::size_t>(k)];
      const bool gk = pair.golden->intents.contains(k), pk = pair.predicted->intents.contains(k);
      if (gk && pk) ++slot.tp;
      else if (pk) ++slot.fp;
      else if (gk) ++slot.fn;
      else ++slot.tn;
    }
    report.resolution += resolution_confusion(*pair.golden, *pair.predicted);
    gold_res.push_back(pair.golden->resolution == ResolutionStatus::Resolved ? 1 : 0);
    pred_res.push_back(pair.predicted->resolution == ResolutionStatus::Resolved ? 1 : 0);
  }
  if (!gold_res.empty()) report.resolution_kappa = cohen_kappa(gold_res, pred_res);
  return report;
}

nlohmann::json to_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

nlohmann::json to_json(const TaskScores& s) {
  return {{"accuracy", s.accuracy}, {"precision", s.precision}, {"recall", s.recall}, {"f_score", s.f_score}};
}

nlohmann::json to_json(const MetricsReport& r) {
  auto task = [](std::string_view name, const ConfusionCounts& c) {
    nlohmann::json j = to_json(scores(c));
    j["task"] = name;
    j["counts"] = to_json(c);
    return j;
  };
  nlohmann::json per_kind = nlohmann::json::object();
  for (EntityKind k : all_entity_kinds()) {
    const auto& c = r.entities.per_kind[static_cast<std::size_t>(k)];
    if (c.tp + c.fp + c.fn == 0) continue;
    per_kind[std::string(display_name(k))] = {{"counts", to_json(c)}, {"scores", to_json(scores(c))}};
  }
  nlohmann::json per_intent = nlohmann::json::object();
  for (IntentKind k : all_intent_kinds()) {
    const auto& c = r.per_intent[static_cast<std::size_t>(k)];
    per_intent[std::string(display_name(k))] = {{"counts", to_json(c)}, {"scores", to_json(scores(c))}};
  }
  return {
      {"conversations", r.conversations},
      {"averaging", "micro"},
      {"tasks",
       nlohmann::json::array({task("Entity Recognition", r.entities.counts), task("Intent Detection", r.intents),
                              task("Resolution Status", r.resolution)})},
      {"entity_tokens", r.entities.token_count},
      {"entity_unaligned", {{"golden", r.entities.unaligned_golden}, {"predicted", r.entities.unaligned_predicted}}},
      {"entity_per_kind", std::move(per_kind)},
      {"intent_per_kind", std::move(per_intent)},
      {"resolution_kappa", r.resolution_kappa},
      {"warnings", r.warnings},
  };
}

}  // namespace devchat
