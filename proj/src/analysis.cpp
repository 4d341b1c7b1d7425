#include "devchat/analysis.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <ostream>

#include "devchat/error.hpp"
#include "devchat/stats.hpp"

namespace devchat {

namespace {

std::string percent(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.1f", value);
  return buffer;
}

std::string pair_label(const EntityPair& p) {
  return std::string(display_name(p.first)) + ", " + std::string(display_name(p.second));
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<IntentSuccessRow> intent_success_table(std::span<const LabelSet> labels) {
  std::array<IntentSuccessRow, kIntentKindCount> per{};
  IntentSuccessRow overall{"Overall"};
  for (const auto& l : labels) {
    const bool ok = l.resolution == ResolutionStatus::Resolved;
    for (IntentKind k : all_intent_kinds()) {
      if (!l.intents.contains(k)) continue;
      auto& row = per[static_cast<std::size_t>(k)];
      ++row.total;
      if (ok) ++row.successes;
    }
    ++overall.total;
    if (ok) ++overall.successes;
  }
  std::vector<IntentSuccessRow> out;
  for (IntentKind k : all_intent_kinds()) {
    auto row = per[static_cast<std::size_t>(k)];
    if (row.total == 0) continue;
    row.label = std::string(display_name(k));
    out.push_back(row);
  }
  out.push_back(overall);
  return out;
}

ContingencyTable intent_contingency(std::span<const IntentSuccessRow> rows) {
  ContingencyTable t;
  t.column_labels = {"Resolved", "Unresolved"};
  for (const auto& r : rows) {
    if (r.label == "Overall") continue;
    t.row_labels.push_back(r.label);
    t.counts.push_back({r.successes, r.total - r.successes});
  }
  return t;
}

ChiSquareResult chi_square_independence(const ContingencyTable& table) {
  ChiSquareResult result;
  std::vector<std::size_t> used;
  std::size_t cols = 0;
  for (std::size_t r = 0; r < table.counts.size(); ++r) {
    const auto& row = table.counts[r];
    if (r == 0) cols = row.size();
    if (row.size() != cols) throw ValidationError("chi_square_independence: ragged contingency table");
    std::uint64_t total = 0;
    for (auto v : row) total += v;
    if (total == 0) {
      ++result.excluded_rows;
    } else {
      used.push_back(r);
    }
  }
  if (used.size() < 2 || cols < 2) throw ValidationError("chi_square_independence: need at least a 2x2 table");

  std::vector<double> row_tot(used.size(), 0.0), col_tot(cols, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = static_cast<double>(table.counts[used[i]][j]);
      row_tot[i] += v;
      col_tot[j] += v;
      grand += v;
    }
  }
  double statistic = 0.0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double expected = row_tot[i] * col_tot[j] / grand;
      if (expected == 0.0) {
        const std::string row = used[i] < table.row_labels.size() ? table.row_labels[used[i]] : std::to_string(used[i]);
        const std::string col = j < table.column_labels.size() ? table.column_labels[j] : std::to_string(j);
        throw ValidationError("chi_square_independence: expected count is zero in cell (" + row + ", " + col + ")");
      }
      const double diff = static_cast<double>(table.counts[used[i]][j]) - expected;
      statistic += diff * diff / expected;
    }
  }
  result.statistic = statistic;
  result.dof = static_cast<int>((used.size() - 1) * (cols - 1));
  result.p_value = stats::chi_square_sf(statistic, result.dof);
  return result;
}

std::vector<EntityPair> entity_pairs(const LabelSet& labels) {
  std::vector<EntityKind> kinds;
  for (const auto& s : labels.entities) kinds.push_back(s.kind);
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  std::vector<EntityPair> pairs;
  for (std::size_t a = 0; a < kinds.size(); ++a) {
    for (std::size_t b = a + 1; b < kinds.size(); ++b) pairs.emplace_back(kinds[a], kinds[b]);
  }
  return pairs;
}

PairTable pair_success_table(std::span<const LabelSet> labels, std::size_t min_occurrences) {
  using Key = std::pair<int, EntityPair>;  // intent index (kIntentKindCount = aggregate)
  std::map<Key, PairRecord> counts;
  for (const auto& l : labels) {
    const bool ok = l.resolution == ResolutionStatus::Resolved;
    const auto pairs = entity_pairs(l);
    auto add = [&](int intent_index, std::optional<IntentKind> intent) {
      for (const auto& p : pairs) {
        auto& rec = counts[{intent_index, p}];
        rec.intent = intent;
        rec.pair = p;
        ++rec.total;
        if (ok) ++rec.successes;
      }
    };
    for (IntentKind k : all_intent_kinds()) {
      if (l.intents.contains(k)) add(static_cast<int>(k), k);
    }
    add(static_cast<int>(kIntentKindCount), std::nullopt);
  }
  PairTable table;
  table.min_occurrences = min_occurrences;
  for (const auto& [key, rec] : counts) {
    if (rec.total < min_occurrences) {
      ++table.filtered_out;
    } else {
      table.records.push_back(rec);
    }
  }
  std::stable_sort(table.records.begin(), table.records.end(), [](const PairRecord& a, const PairRecord& b) {
    const int ga = a.intent ? static_cast<int>(*a.intent) : static_cast<int>(kIntentKindCount);
    const int gb = b.intent ? static_cast<int>(*b.intent) : static_cast<int>(kIntentKindCount);
    if (ga != gb) return ga < gb;
    // Compare successes/total exactly by cross-multiplication.
    const auto lhs = a.successes * b.total, rhs = b.successes * a.total;
    if (lhs != rhs) return lhs > rhs;
    if (a.total != b.total) return a.total > b.total;
    return a.pair < b.pair;
  });
  return table;
}

std::vector<PairRecord> top_pairs(const PairTable& table, std::optional<IntentKind> intent, std::size_t n) {
  std::vector<PairRecord> out;
  for (const auto& r : table.records) {
    if (r.intent == intent && out.size() < n) out.push_back(r);
  }
  return out;
}

std::vector<PairRecord> bottom_pairs(const PairTable& table, std::optional<IntentKind> intent, std::size_t n) {
  std::vector<PairRecord> group;
  for (const auto& r : table.records) {
    if (r.intent == intent) group.push_back(r);
  }
  if (group.size() > n) group.erase(group.begin(), group.end() - static_cast<std::ptrdiff_t>(n));
  return group;
}

double coverage_stat(std::span<const LabelSet> labels) {
  if (labels.empty()) return 0.0;
  std::size_t multi = 0;
  for (const auto& l : labels) {
    if (!entity_pairs(l).empty()) ++multi;
  }
  return static_cast<double>(multi) / static_cast<double>(labels.size());
}

void write_intent_success_csv(std::ostream& out, std::span<const IntentSuccessRow> rows) {
  out << "intent,success_rate_percent,successes,total\n";
  for (const auto& r : rows) out << csv_quote(r.label) << ',' << percent(r.rate_percent()) << ',' << r.successes << ',' << r.total << '\n';
}

void write_pair_csv(std::ostream& out, const PairTable& table) {
  out << "intent,entity_pair,success_rate_percent,successes,total\n";
  for (const auto& r : table.records) {
    out << csv_quote(r.intent ? std::string(display_name(*r.intent)) : std::string("Aggregate")) << ','
        << csv_quote(pair_label(r.pair)) << ',' << percent(100.0 * r.rate()) << ',' << r.successes << ',' << r.total
        << '\n';
  }
}

nlohmann::json to_json(const ChiSquareResult& r) {
  return {{"statistic", r.statistic}, {"dof", r.dof}, {"p", r.p_value}, {"p_display", stats::format_p_value(r.p_value)},
          {"excluded_rows", r.excluded_rows}};
}

}  // namespace devchat
