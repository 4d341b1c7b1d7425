#include "devchat/taxonomy.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <istream>
#include <ostream>
#include <utility>

#include "devchat/error.hpp"

namespace devchat {

using nlohmann::json;

namespace {

struct EntityInfo {
  EntityKind kind;
  std::string_view display;
  std::string_view identifier;
};

constexpr std::array<EntityInfo, kEntityKindCount> kEntities = {{
    {EntityKind::Application, "Application", "Application"},
    {EntityKind::ProgrammingLanguage, "Programming Language", "ProgrammingLanguage"},
    {EntityKind::Version, "Version", "Version"},
    {EntityKind::Algorithm, "Algorithm", "Algorithm"},
    {EntityKind::OperationSystem, "Operation System", "OperationSystem"},
    {EntityKind::Device, "Device", "Device"},
    {EntityKind::ErrorName, "Error Name", "ErrorName"},
    {EntityKind::UserName, "User Name", "UserName"},
    {EntityKind::DataStructure, "Data Structure", "DataStructure"},
    {EntityKind::DataType, "Data Type", "DataType"},
    {EntityKind::Library, "Library", "Library"},
    {EntityKind::LibraryClass, "Library Class", "LibraryClass"},
    {EntityKind::UserClass, "User Class", "UserClass"},
    {EntityKind::LibraryVariable, "Library Variable", "LibraryVariable"},
    {EntityKind::UserVariable, "User Variable", "UserVariable"},
    {EntityKind::LibraryFunction, "Library Function", "LibraryFunction"},
    {EntityKind::UserFunctionName, "User Function Name", "UserFunctionName"},
    {EntityKind::FileType, "File Type", "FileType"},
    {EntityKind::FileName, "File Name", "FileName"},
    {EntityKind::UiElement, "UI Element", "UiElement"},
    {EntityKind::Website, "Website", "Website"},
    {EntityKind::Organization, "Organization", "Organization"},
    {EntityKind::License, "License", "License"},
    {EntityKind::HtmlXmlTagName, "HTML/XML Tag Name", "HtmlXmlTagName"},
    {EntityKind::Value, "Value", "Value"},
    {EntityKind::InLineCode, "In Line Code", "InLineCode"},
    {EntityKind::OutputBlock, "Output Block", "OutputBlock"},
    {EntityKind::KeyboardInput, "Keyboard Input", "KeyboardInput"},
}};

struct IntentInfo {
  IntentKind kind;
  std::string_view display;
  std::string_view identifier;
};

constexpr std::array<IntentInfo, kIntentKindCount> kIntents = {{
    {IntentKind::ApiUsage, "API Usage", "ApiUsage"},
    {IntentKind::Discrepancy, "Discrepancy", "Discrepancy"},
    {IntentKind::Errors, "Errors", "Errors"},
    {IntentKind::Review, "Review", "Review"},
    {IntentKind::Conceptual, "Conceptual", "Conceptual"},
    {IntentKind::ApiChange, "API Change", "ApiChange"},
    {IntentKind::Learning, "Learning", "Learning"},
}};

// Abbreviations seen in published result tables and common variants.
// Keys are already normalized.
constexpr std::array<std::pair<std::string_view, EntityKind>, 12> kEntityAliases = {{
    {"proglang", EntityKind::ProgrammingLanguage},
    {"language", EntityKind::ProgrammingLanguage},
    {"userfuncname", EntityKind::UserFunctionName},
    {"userfunction", EntityKind::UserFunctionName},
    {"os", EntityKind::OperationSystem},
    {"operatingsystem", EntityKind::OperationSystem},
    {"htmltagname", EntityKind::HtmlXmlTagName},
    {"xmltagname", EntityKind::HtmlXmlTagName},
    {"htmltag", EntityKind::HtmlXmlTagName},
    {"libfunction", EntityKind::LibraryFunction},
    {"libraryfunc", EntityKind::LibraryFunction},
    {"username", EntityKind::UserName},
}};

constexpr std::array<std::pair<std::string_view, IntentKind>, 5> kIntentAliases = {{
    {"apichance", IntentKind::ApiChange},
    {"apichanges", IntentKind::ApiChange},
    {"error", IntentKind::Errors},
    {"concept", IntentKind::Conceptual},
    {"apiuse", IntentKind::ApiUsage},
}};

std::string normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (unsigned char c : raw) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    else if (c == '+' || c == '#') out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

const std::array<EntityKind, kEntityKindCount>& all_entity_kinds() {
  static const auto kinds = [] {
    std::array<EntityKind, kEntityKindCount> out{};
    for (std::size_t i = 0; i < kEntityKindCount; ++i) out[i] = kEntities[i].kind;
    return out;
  }();
  return kinds;
}

const std::array<IntentKind, kIntentKindCount>& all_intent_kinds() {
  static const auto kinds = [] {
    std::array<IntentKind, kIntentKindCount> out{};
    for (std::size_t i = 0; i < kIntentKindCount; ++i) out[i] = kIntents[i].kind;
    return out;
  }();
  return kinds;
}

std::string_view display_name(EntityKind kind) { return kEntities[static_cast<std::size_t>(kind)].display; }
std::string_view display_name(IntentKind kind) { return kIntents[static_cast<std::size_t>(kind)].display; }

std::string_view display_name(ResolutionStatus status) {
  return status == ResolutionStatus::Resolved ? "Resolved" : "Unresolved";
}

std::string_view display_name(LabelSource source) {
  switch (source) {
    case LabelSource::Golden: return "Golden";
    case LabelSource::Model: return "Model";
    case LabelSource::Mock: return "Mock";
  }
  return "Golden";
}

std::optional<EntityKind> try_parse_entity_kind(std::string_view raw) {
  const std::string key = normalize(raw);
  if (key.empty()) return std::nullopt;
  for (const auto& info : kEntities) {
    if (key == normalize(info.display) || key == normalize(info.identifier)) return info.kind;
  }
  for (const auto& [alias, kind] : kEntityAliases) {
    if (key == alias) return kind;
  }
  return std::nullopt;
}

std::optional<IntentKind> try_parse_intent_kind(std::string_view raw) {
  const std::string key = normalize(raw);
  if (key.empty()) return std::nullopt;
  for (const auto& info : kIntents) {
    if (key == normalize(info.display) || key == normalize(info.identifier)) return info.kind;
  }
  for (const auto& [alias, kind] : kIntentAliases) {
    if (key == alias) return kind;
  }
  return std::nullopt;
}

EntityKind parse_entity_kind(std::string_view raw) {
  if (auto kind = try_parse_entity_kind(raw)) return *kind;
  throw UnknownKindError("entity kind", std::string(raw));
}

IntentKind parse_intent_kind(std::string_view raw) {
  if (auto kind = try_parse_intent_kind(raw)) return *kind;
  throw UnknownKindError("intent kind", std::string(raw));
}

ResolutionStatus parse_resolution_status(std::string_view raw) {
  const std::string key = normalize(raw);
  if (key == "resolved") return ResolutionStatus::Resolved;
  if (key == "unresolved") return ResolutionStatus::Unresolved;
  throw UnknownKindError("resolution status", std::string(raw));
}

LabelSource parse_label_source(std::string_view raw) {
  const std::string key = lower(raw);
  if (key == "golden") return LabelSource::Golden;
  if (key == "model") return LabelSource::Model;
  if (key == "mock") return LabelSource::Mock;
  throw UnknownKindError("label source", std::string(raw));
}

std::size_t IntentSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<IntentKind> IntentSet::to_vector() const {
  std::vector<IntentKind> out;
  for (auto k : all_intent_kinds()) {
    if (contains(k)) out.push_back(k);
  }
  return out;
}

json to_json(const LabelSet& labels) {
  json entities = json::array();
  for (const auto& span : labels.entities) {
    entities.push_back({{"surface", span.surface},
                        {"kind", display_name(span.kind)},
                        {"message_ts", format_timestamp(span.message_ts)}});
  }
  json intents = json::array();
  for (auto k : labels.intents.to_vector()) intents.push_back(display_name(k));
  return {
      {"conversation_id", labels.conversation_id},
      {"channel", labels.channel_key},
      {"entities", std::move(entities)},
      {"intents", std::move(intents)},
      {"resolution", display_name(labels.resolution)},
      {"source", display_name(labels.source)},
  };
}

LabelSet label_set_from_json(const json& j) {
  try {
    LabelSet labels;
    labels.conversation_id = j.at("conversation_id").get<std::string>();
    labels.channel_key = j.value("channel", "");
    for (const auto& e : j.at("entities")) {
      EntitySpan span;
      span.surface = e.at("surface").get<std::string>();
      span.kind = parse_entity_kind(e.at("kind").get<std::string>());
      if (e.contains("message_ts")) {
        const auto ts = parse_timestamp(e["message_ts"].get<std::string>());
        if (!ts) throw ValidationError("bad message_ts in labels for " + labels.conversation_id);
        span.message_ts = ts->value;
      }
      labels.entities.push_back(std::move(span));
    }
    for (const auto& i : j.at("intents")) labels.intents.insert(parse_intent_kind(i.get<std::string>()));
    labels.resolution = parse_resolution_status(j.at("resolution").get<std::string>());
    labels.source = parse_label_source(j.value("source", "Golden"));
    return labels;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid label record: ") + e.what());
  } catch (const UnknownKindError& e) {
    throw ValidationError(std::string("invalid label record: ") + e.what());
  }
}

void write_label_sets(std::ostream& out, std::span<const LabelSet> labels) {
  for (const auto& l : labels) out << to_json(l).dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

std::vector<LabelSet> read_label_sets(std::istream& in) {
  std::vector<LabelSet> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      labels.push_back(label_set_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ValidationError("labels line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return labels;
}

}  // namespace devchat
