#pragma once

// Chat-archive ingestion: parse archive files, rebuild conversations from
// individual messages and attach temporal metadata.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "devchat/error.hpp"
#include "devchat/timestamp.hpp"

namespace devchat {

struct ChannelMeta {
  std::string team_domain;
  std::string channel_name;
  std::string month_label;

  // team_domain + "#" + channel_name
  std::string key() const { return team_domain + "#" + channel_name; }

  bool operator==(const ChannelMeta&) const = default;
};

struct Message {
  std::string conversation_id;
  int msg_num = 0;
  Timestamp ts;
  std::string user;
  std::string text;

  bool operator==(const Message&) const = default;
};

struct Conversation {
  std::string id;
  ChannelMeta channel;
  std::vector<Message> messages;  // ascending by (ts, msg_num)
  Timestamp start;
  Timestamp end;
  std::string month_range;

  std::string channel_key() const { return channel.key(); }
};

struct InitialQuestion {
  std::string conversation_id;
  std::string channel_key;
  std::string text;
  std::string asker;
  Timestamp asked_at;
};

// A record that could not be ingested. The record is skipped.
struct RecordError {
  std::string conversation_id;
  std::string field;
  std::string reason;
};

struct ChannelMessages {
  ChannelMeta channel;
  std::vector<Message> messages;
};

struct ArchiveParseResult {
  std::vector<ChannelMessages> channels;
  std::vector<RecordError> errors;
  std::size_t message_count = 0;
  // Timestamps that carried no offset and were read as UTC.
  std::size_t assumed_utc = 0;
};

// Malformed JSON. `byte_offset` points at the offending input byte.
class ArchiveSyntaxError : public ValidationError {
 public:
  ArchiveSyntaxError(const std::string& what, std::size_t byte_offset)
      : ValidationError(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Accepts one archive object or an array of them. Each object carries
// team_domain, channel_name, month and a "messages" array whose entries are
// either conversation groups ({conversation_id, messages: [...]}) or flat
// message records that carry their own conversation_id.
ArchiveParseResult parse_archive(std::string_view bytes);

struct AggregateResult {
  std::vector<Conversation> conversations;
  // Repeated (channel, conversation_id, msg_num) triples; first one wins.
  std::size_t duplicate_messages = 0;
};

// One Conversation per distinct (channel key, conversation_id), in order of
// first appearance.
AggregateResult aggregate_conversations(std::span<const ChannelMessages> channels);

// The asker's contiguous leading messages, joined with '\n'. Throws
// ValidationError for an empty conversation.
InitialQuestion extract_initial_question(const Conversation& conversation);

// Normalized corpus: one Conversation per JSON line.
nlohmann::json to_json(const Conversation& conversation);
Conversation conversation_from_json(const nlohmann::json& j);
void write_corpus(std::ostream& out, std::span<const Conversation> conversations);
std::vector<Conversation> read_corpus(std::istream& in);

}  // namespace devchat
