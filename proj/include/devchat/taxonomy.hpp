#pragma once

// Closed label vocabularies: software entity kinds, question intents and
// resolution status, plus the LabelSet record that ties them to a
// conversation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "devchat/timestamp.hpp"

namespace devchat {

enum class EntityKind : std::uint8_t {
  Application,
  ProgrammingLanguage,
  Version,
  Algorithm,
  OperationSystem,
  Device,
  ErrorName,
  UserName,
  DataStructure,
  DataType,
  Library,
  LibraryClass,
  UserClass,
  LibraryVariable,
  UserVariable,
  LibraryFunction,
  UserFunctionName,
  FileType,
  FileName,
  UiElement,
  Website,
  Organization,
  License,
  HtmlXmlTagName,
  Value,
  InLineCode,
  OutputBlock,
  KeyboardInput,
};

inline constexpr std::size_t kEntityKindCount = 28;

enum class IntentKind : std::uint8_t {
  ApiUsage,
  Discrepancy,
  Errors,
  Review,
  Conceptual,
  ApiChange,
  Learning,
};

inline constexpr std::size_t kIntentKindCount = 7;

enum class ResolutionStatus : std::uint8_t { Resolved, Unresolved };

enum class LabelSource : std::uint8_t { Golden, Model, Mock };

const std::array<EntityKind, kEntityKindCount>& all_entity_kinds();
const std::array<IntentKind, kIntentKindCount>& all_intent_kinds();

// Canonical display string, e.g. "Programming Language".
std::string_view display_name(EntityKind kind);
std::string_view display_name(IntentKind kind);
std::string_view display_name(ResolutionStatus status);
std::string_view display_name(LabelSource source);

class UnknownKindError : public std::invalid_argument {
 public:
  UnknownKindError(std::string_view what, std::string raw)
      : std::invalid_argument(std::string(what) + ": unknown value '" + raw + "'"), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Case-, whitespace-, underscore- and punctuation-insensitive match against
// canonical names and the compiled-in alias table.
std::optional<EntityKind> try_parse_entity_kind(std::string_view raw);
std::optional<IntentKind> try_parse_intent_kind(std::string_view raw);
EntityKind parse_entity_kind(std::string_view raw);
IntentKind parse_intent_kind(std::string_view raw);
ResolutionStatus parse_resolution_status(std::string_view raw);
LabelSource parse_label_source(std::string_view raw);

// A set of intents, stored as a bitmask.
class IntentSet {
 public:
  IntentSet() = default;
  IntentSet(std::initializer_list<IntentKind> kinds) {
    for (auto k : kinds) insert(k);
  }

  void insert(IntentKind k) { bits_ |= bit(k); }
  bool contains(IntentKind k) const { return (bits_ & bit(k)) != 0; }
  std::size_t size() const;
  bool empty() const { return bits_ == 0; }
  std::uint8_t bits() const { return bits_; }
  std::vector<IntentKind> to_vector() const;

  IntentSet operator&(IntentSet o) const { return from_bits(bits_ & o.bits_); }
  IntentSet operator|(IntentSet o) const { return from_bits(bits_ | o.bits_); }
  IntentSet without(IntentSet o) const { return from_bits(bits_ & static_cast<std::uint8_t>(~o.bits_)); }
  bool operator==(const IntentSet&) const = default;

  static IntentSet from_bits(std::uint8_t bits) {
    IntentSet s;
    s.bits_ = bits & 0x7F;
    return s;
  }

 private:
  static std::uint8_t bit(IntentKind k) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k)); }
  std::uint8_t bits_ = 0;
};

struct EntitySpan {
  std::string surface;
  EntityKind kind{};
  Timestamp message_ts;

  bool operator==(const EntitySpan&) const = default;
};

struct LabelSet {
  std::string conversation_id;
  std::string channel_key;
  std::vector<EntitySpan> entities;
  IntentSet intents;
  ResolutionStatus resolution = ResolutionStatus::Unresolved;
  LabelSource source = LabelSource::Golden;
};

nlohmann::json to_json(const LabelSet& labels);
LabelSet label_set_from_json(const nlohmann::json& j);
void write_label_sets(std::ostream& out, std::span<const LabelSet> labels);
std::vector<LabelSet> read_label_sets(std::istream& in);

}  // namespace devchat
