#pragma once

// Resolution outcomes by intent and by co-occurring entity kinds.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "devchat/taxonomy.hpp"

namespace devchat {

struct IntentSuccessRow {
  std::string label;  // intent display name, or "Overall"
  std::uint64_t successes = 0;
  std::uint64_t total = 0;
  double rate_percent() const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(successes) / static_cast<double>(total); }
};

// One row per intent present in the corpus (taxonomy order) followed by an
// "Overall" row counted over conversations. A conversation counts toward
// every intent it carries.
std::vector<IntentSuccessRow> intent_success_table(std::span<const LabelSet> labels);

struct ContingencyTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  std::vector<std::vector<std::uint64_t>> counts;  // rows x columns
};

// Intent rows with (resolved, unresolved) columns; the Overall row is not
// part of the table.
ContingencyTable intent_contingency(std::span<const IntentSuccessRow> rows);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::size_t excluded_rows = 0;  // rows with zero total
};

// Pearson test of independence. Throws ValidationError for fewer than two
// usable rows or an expected count of zero.
ChiSquareResult chi_square_independence(const ContingencyTable& table);

using EntityPair = std::pair<EntityKind, EntityKind>;  // first < second

// Unordered pairs of distinct entity kinds in a LabelSet.
std::vector<EntityPair> entity_pairs(const LabelSet& labels);

struct PairRecord {
  std::optional<IntentKind> intent;  // empty for the aggregate
  EntityPair pair;
  std::uint64_t successes = 0;
  std::uint64_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(total); }
};

struct PairTable {
  // Records with total >= min_occurrences, grouped by intent (taxonomy
  // order, aggregate last) and sorted by descending success rate within a
  // group.
  std::vector<PairRecord> records;
  std::size_t min_occurrences = 10;
  std::size_t filtered_out = 0;
};

PairTable pair_success_table(std::span<const LabelSet> labels, std::size_t min_occurrences = 10);

// Top and bottom `n` records of one group.
std::vector<PairRecord> top_pairs(const PairTable& table, std::optional<IntentKind> intent, std::size_t n);
std::vector<PairRecord> bottom_pairs(const PairTable& table, std::optional<IntentKind> intent, std::size_t n);

// Share of conversations with at least two distinct entity kinds.
double coverage_stat(std::span<const LabelSet> labels);

void write_intent_success_csv(std::ostream& out, std::span<const IntentSuccessRow> rows);
void write_pair_csv(std::ostream& out, const PairTable& table);
nlohmann::json to_json(const ChiSquareResult& result);

}  // namespace devchat
