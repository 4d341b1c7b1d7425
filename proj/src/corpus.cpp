#include "devchat/corpus.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>
#include <utility>

namespace devchat {

using nlohmann::json;

namespace {

std::string as_string(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  return value.dump();
}

bool read_msg_num(const json& value, int& out) {
  if (value.is_number_integer()) {
    out = value.get<int>();
    return true;
  }
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return false;
    }
    out = std::stoi(s);
    return true;
  }
  return false;
}

class ArchiveReader {
 public:
  explicit ArchiveReader(ArchiveParseResult& result) : result_(result) {}

  void read_archive_object(const json& archive) {
    if (!archive.is_object()) {
      result_.errors.push_back({"", "", "archive entry is not an object"});
      return;
    }
    ChannelMessages group;
    for (const char* field : {"team_domain", "channel_name"}) {
      if (!archive.contains(field) || !archive[field].is_string() || archive[field].get<std::string>().empty()) {
        result_.errors.push_back({"", field, "missing or empty channel field"});
        return;
      }
    }
    group.channel.team_domain = archive["team_domain"].get<std::string>();
    group.channel.channel_name = archive["channel_name"].get<std::string>();
    if (archive.contains("month")) group.channel.month_label = as_string(archive["month"]);

    if (!archive.contains("messages") || !archive["messages"].is_array()) {
      result_.errors.push_back({"", "messages", "archive has no messages array"});
      return;
    }
    for (const auto& entry : archive["messages"]) {
      if (entry.is_object() && entry.contains("messages") && entry["messages"].is_array()) {
        if (!entry.contains("conversation_id")) {
          result_.errors.push_back({"", "conversation_id", "conversation group without id"});
          continue;
        }
        const std::string conversation_id = as_string(entry["conversation_id"]);
        for (const auto& record : entry["messages"]) read_message(record, conversation_id, group);
      } else {
        read_message(entry, "", group);
      }
    }
    result_.channels.push_back(std::move(group));
  }

 private:
  void read_message(const json& record, std::string conversation_id, ChannelMessages& group) {
    if (!record.is_object()) {
      result_.errors.push_back({conversation_id, "", "message record is not an object"});
      return;
    }
    if (record.contains("conversation_id")) conversation_id = as_string(record["conversation_id"]);
    if (conversation_id.empty()) {
      result_.errors.push_back({"", "conversation_id", "message without conversation id"});
      return;
    }
    for (const char* field : {"msg_num", "ts", "user", "text"}) {
      if (!record.contains(field) || record[field].is_null()) {
        result_.errors.push_back({conversation_id, field, "missing required field"});
        return;
      }
    }
    Message message;
    message.conversation_id = conversation_id;
    if (!read_msg_num(record["msg_num"], message.msg_num) || message.msg_num < 1) {
      result_.errors.push_back({conversation_id, "msg_num", "msg_num is not a positive integer"});
      return;
    }
    const auto ts = record["ts"].is_string() ? parse_timestamp(record["ts"].get<std::string>()) : std::nullopt;
    if (!ts) {
      result_.errors.push_back({conversation_id, "ts", "unparseable timestamp"});
      return;
    }
    if (!record["user"].is_string() || !record["text"].is_string()) {
      result_.errors.push_back({conversation_id, record["user"].is_string() ? "text" : "user", "expected a string"});
      return;
    }
    message.ts = ts->value;
    if (ts->assumed_utc) ++result_.assumed_utc;
    message.user = record["user"].get<std::string>();
    message.text = record["text"].get<std::string>();
    group.messages.push_back(std::move(message));
    ++result_.message_count;
  }

  ArchiveParseResult& result_;
};

}  // namespace

ArchiveParseResult parse_archive(std::string_view bytes) {
  json document;
  try {
    document = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ArchiveSyntaxError("malformed archive JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                             e.byte);
  }

  ArchiveParseResult result;
  ArchiveReader reader(result);
  if (document.is_array()) {
    for (const auto& archive : document) reader.read_archive_object(archive);
  } else {
    reader.read_archive_object(document);
  }
  return result;
}

AggregateResult aggregate_conversations(std::span<const ChannelMessages> channels) {
  AggregateResult result;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::set<std::tuple<std::string, std::string, int>> seen;

  for (const auto& group : channels) {
    const std::string key = group.channel.key();
    for (const auto& message : group.messages) {
      if (!seen.emplace(key, message.conversation_id, message.msg_num).second) {
        ++result.duplicate_messages;
        continue;
      }
      auto [it, inserted] = index.try_emplace({key, message.conversation_id}, result.conversations.size());
      if (inserted) {
        Conversation conversation;
        conversation.id = message.conversation_id;
        conversation.channel = group.channel;
        result.conversations.push_back(std::move(conversation));
      }
      result.conversations[it->second].messages.push_back(message);
    }
  }

  for (auto& conversation : result.conversations) {
    auto& messages = conversation.messages;
    std::stable_sort(messages.begin(), messages.end(), [](const Message& a, const Message& b) {
      return std::tie(a.ts, a.msg_num) < std::tie(b.ts, b.msg_num);
    });
    conversation.start = messages.front().ts;
    conversation.end = messages.back().ts;
    conversation.month_range = month_range(conversation.start, conversation.end);
  }
  return result;
}

InitialQuestion extract_initial_question(const Conversation& conversation) {
  if (conversation.messages.empty()) {
    throw ValidationError("conversation " + conversation.id + " has no messages");
  }
  const Message& first = conversation.messages.front();
  InitialQuestion question;
  question.conversation_id = conversation.id;
  question.channel_key = conversation.channel_key();
  question.asker = first.user;
  question.asked_at = first.ts;
  question.text = first.text;
  for (std::size_t i = 1; i < conversation.messages.size(); ++i) {
    const Message& next = conversation.messages[i];
    if (next.user != first.user) break;
    question.text += "\n";
    question.text += next.text;
  }
  return question;
}

json to_json(const Conversation& conversation) {
  json messages = json::array();
  for (const auto& m : conversation.messages) {
    messages.push_back({{"msg_num", m.msg_num}, {"ts", format_timestamp(m.ts)}, {"user", m.user}, {"text", m.text}});
  }
  return {
      {"id", conversation.id},
      {"channel",
       {{"team_domain", conversation.channel.team_domain},
        {"channel_name", conversation.channel.channel_name},
        {"month_label", conversation.channel.month_label}}},
      {"start", format_timestamp(conversation.start)},
      {"end", format_timestamp(conversation.end)},
      {"month_range", conversation.month_range},
      {"messages", std::move(messages)},
  };
}

Conversation conversation_from_json(const json& j) {
  try {
    Conversation c;
    c.id = j.at("id").get<std::string>();
    const auto& channel = j.at("channel");
    c.channel.team_domain = channel.at("team_domain").get<std::string>();
    c.channel.channel_name = channel.at("channel_name").get<std::string>();
    c.channel.month_label = channel.value("month_label", "");
    for (const auto& m : j.at("messages")) {
      Message message;
      message.conversation_id = c.id;
      message.msg_num = m.at("msg_num").get<int>();
      const auto ts = parse_timestamp(m.at("ts").get<std::string>());
      if (!ts) throw ValidationError("bad timestamp in conversation " + c.id);
      message.ts = ts->value;
      message.user = m.at("user").get<std::string>();
      message.text = m.at("text").get<std::string>();
      c.messages.push_back(std::move(message));
    }
    if (c.messages.empty()) throw ValidationError("conversation " + c.id + " has no messages");
    c.start = c.messages.front().ts;
    c.end = c.messages.front().ts;
    for (const auto& m : c.messages) {
      c.start = std::min(c.start, m.ts);
      c.end = std::max(c.end, m.ts);
    }
    c.month_range = j.value("month_range", month_range(c.start, c.end));
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid corpus record: ") + e.what());
  }
}

void write_corpus(std::ostream& out, std::span<const Conversation> conversations) {
  for (const auto& c : conversations) out << to_json(c).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

std::vector<Conversation> read_corpus(std::istream& in) {
  std::vector<Conversation> conversations;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    conversations.push_back(conversation_from_json(j));
  }
  return conversations;
}

}  // namespace devchat
