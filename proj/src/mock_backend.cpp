#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "devchat/backend.hpp"

namespace devchat {

namespace {

using nlohmann::json;

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Whole-word, case-insensitive phrase search in already lowercased text.
bool contains_phrase(std::string_view text, std::string_view phrase) {
  for (std::size_t pos = text.find(phrase); pos != std::string_view::npos; pos = text.find(phrase, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]) || !is_word_char(phrase.front());
    const std::size_t end = pos + phrase.size();
    const bool right_ok = end == text.size() || !is_word_char(text[end]) || !is_word_char(phrase.back());
    if (left_ok && right_ok) return true;
  }
  return false;
}

template <std::size_t N>
bool contains_any(std::string_view text, const std::array<std::string_view, N>& phrases) {
  return std::any_of(phrases.begin(), phrases.end(), [&](std::string_view p) { return contains_phrase(text, p); });
}

// ---------------------------------------------------------------------------
// Entity rules
// ---------------------------------------------------------------------------

const std::unordered_map<std::string, EntityKind>& keyword_table() {
  static const std::unordered_map<std::string, EntityKind> table = [] {
    std::unordered_map<std::string, EntityKind> t;
    auto add = [&](EntityKind kind, std::initializer_list<const char*> words) {
      for (const char* w : words) t.emplace(w, kind);
    };
    add(EntityKind::ProgrammingLanguage,
        {"python", "java", "javascript", "typescript", "golang", "racket", "clojure", "rust", "ruby", "kotlin",
         "haskell", "css", "c++", "c#", "scala", "php", "sql", "bash", "lisp", "scheme"});
    add(EntityKind::Library,
        {"numpy", "pandas", "tensorflow", "pytorch", "django", "flask", "requests", "asyncio", "aiohttp", "scipy",
         "matplotlib", "react", "sqlalchemy", "gorm", "gin", "ring", "reagent", "core.async", "pygame", "tkinter",
         "keras", "selenium", "beautifulsoup", "opencv"});
    add(EntityKind::Application,
        {"vscode", "pycharm", "docker", "git", "vim", "emacs", "jupyter", "intellij", "postgres", "redis", "nginx",
         "kubernetes", "drracket", "cursive", "calva", "chrome", "firefox", "excel", "npm", "pip", "conda"});
    add(EntityKind::OperationSystem, {"linux", "windows", "macos", "ubuntu", "debian", "ios", "android", "osx"});
    add(EntityKind::Device, {"gpu", "cpu", "phone", "mobile", "laptop", "arduino", "raspberry", "tablet"});
    add(EntityKind::DataStructure,
        {"array", "list", "dict", "dictionary", "hashmap", "heap", "queue", "stack", "tuple", "vector", "slice",
         "struct", "tree", "graph", "map", "set"});
    add(EntityKind::DataType, {"string", "int", "integer", "float", "double", "char", "boolean", "bool", "byte",
                               "rune", "keyword", "symbol"});
    add(EntityKind::Website, {"github", "stackoverflow", "google", "youtube", "reddit", "msdn", "pypi", "godoc"});
    add(EntityKind::Organization, {"microsoft", "apache", "mozilla", "oracle", "amazon", "meta"});
    add(EntityKind::FileType, {"json", "csv", "xml", "yaml", "jar", "pdf", "toml", "html", "png", "exe"});
    add(EntityKind::UiElement, {"button", "checkbox", "dropdown", "textbox", "slider", "menu", "scrollbar", "canvas"});
    add(EntityKind::Algorithm, {"dfs", "bfs", "dijkstra", "quicksort", "mergesort", "udp", "tcp", "recursion",
                                "memoization", "sha256", "regex"});
    add(EntityKind::LibraryClass, {"dataframe", "arraylist", "threadpoolexecutor", "httpclient", "goroutine",
                                   "waitgroup", "mutex", "channel", "atom"});
    add(EntityKind::Value, {"true", "false", "null", "none", "nil", "nan"});
    add(EntityKind::License, {"mit", "gpl", "lgpl", "bsd"});
    return t;
  }();
  return table;
}

const std::unordered_map<std::string, EntityKind>& phrase_table() {
  static const std::unordered_map<std::string, EntityKind> table = {
      {"hash table", EntityKind::DataStructure},    {"linked list", EntityKind::DataStructure},
      {"binary search", EntityKind::Algorithm},     {"scroll bar", EntityKind::UiElement},
      {"text box", EntityKind::UiElement},          {"visual studio code", EntityKind::Application},
      {"stack overflow", EntityKind::Website},      {"raspberry pi", EntityKind::Device},
      {"mit license", EntityKind::License},         {"apache 2.0", EntityKind::License},
      {"microsoft research", EntityKind::Organization},
  };
  return table;
}

constexpr std::array<std::string_view, 6> kLibraryVariables = {"math.pi", "math.inf", "sys.argv",
                                                               "os.environ", "sys.path", "sys.maxsize"};
constexpr std::array<std::string_view, 14> kFileExtensions = {"py", "json", "txt", "xml", "csv", "go",  "rkt",
                                                              "clj", "js", "html", "yaml", "toml", "md", "edn"};
constexpr std::array<std::string_view, 8> kModifierKeys = {"ctrl", "alt", "shift", "cmd",
                                                           "command", "option", "super", "fn"};

struct Candidate {
  std::size_t begin;
  std::size_t end;
  EntityKind kind;
};

std::size_t skip_url(std::string_view text, std::size_t pos) {
  std::size_t end = pos;
  while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
  return end;
}

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != prefix[i]) return false;
  }
  return true;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Classifies one identifier-like word (letters, digits, '_', '.', "()").
std::optional<EntityKind> classify_word(std::string_view word) {
  if (word.empty()) return std::nullopt;
  const bool has_call = ends_with(word, "()");
  const std::string_view stem = has_call ? word.substr(0, word.size() - 2) : word;
  if (stem.empty()) return std::nullopt;
  const bool has_dot = stem.find('.') != std::string_view::npos;
  const std::string lowered = lower(stem);

  const bool numeric = std::all_of(stem.begin(), stem.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; });
  if (numeric) {
    if (has_dot && std::isdigit(static_cast<unsigned char>(stem.front())) && std::isdigit(static_cast<unsigned char>(stem.back()))) {
      return EntityKind::Version;
    }
    return std::nullopt;
  }
  if (has_call) return has_dot ? EntityKind::LibraryFunction : EntityKind::UserFunctionName;
  if (has_dot) {
    if (std::find(kLibraryVariables.begin(), kLibraryVariables.end(), lowered) != kLibraryVariables.end()) {
      return EntityKind::LibraryVariable;
    }
    const auto ext = lowered.substr(lowered.rfind('.') + 1);
    if (std::find(kFileExtensions.begin(), kFileExtensions.end(), ext) != kFileExtensions.end()) {
      return EntityKind::FileName;
    }
  }
  if (stem.size() > 5 && std::isupper(static_cast<unsigned char>(stem.front())) &&
      (ends_with(stem, "Error") || ends_with(stem, "Exception"))) {
    return EntityKind::ErrorName;
  }
  if ((stem.starts_with("My") || stem.starts_with("Test")) && stem.size() > 4) {
    const std::size_t prefix = stem.starts_with("My") ? 2 : 4;
    if (std::isupper(static_cast<unsigned char>(stem[prefix]))) return EntityKind::UserClass;
  }
  const auto& table = keyword_table();
  if (auto it = table.find(lowered); it != table.end()) return it->second;
  if (!has_dot && lowered.find('_') != std::string::npos && lowered.front() != '_' &&
      std::all_of(lowered.begin(), lowered.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_'; })) {
    return EntityKind::UserVariable;
  }
  return std::nullopt;
}

std::string trim_copy(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<Candidate> find_entities(std::string_view text) {
  std::vector<Candidate> found;
  const std::string lowered = lower(text);
  std::vector<bool> claimed(text.size(), false);
  auto claim = [&](std::size_t b, std::size_t e, std::optional<EntityKind> kind) {
    for (std::size_t i = b; i < e; ++i) claimed[i] = true;
    if (kind) found.push_back({b, e, *kind});
  };

  // Code blocks first; their content is not scanned further.
  for (std::size_t pos = text.find("```"); pos != std::string_view::npos;) {
    const std::size_t close = text.find("```", pos + 3);
    if (close == std::string_view::npos) break;
    std::size_t body = pos + 3;
    while (body < close && text[body] != '\n' && !std::isspace(static_cast<unsigned char>(text[body]))) ++body;
    const std::string content = trim_copy(text.substr(body, close - body));
    if (!content.empty()) {
      const std::size_t cb = text.find(content, body);
      const bool output = content.starts_with("Traceback") || content.starts_with(">>>") || content.starts_with("$ ");
      claim(pos, close + 3, std::nullopt);
      found.push_back({cb, cb + content.size(), output ? EntityKind::OutputBlock : EntityKind::InLineCode});
    } else {
      claim(pos, close + 3, std::nullopt);
    }
    pos = text.find("```", close + 3);
  }
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    if (text[pos] != '`' || claimed[pos]) continue;
    const std::size_t close = text.find('`', pos + 1);
    if (close == std::string_view::npos) break;
    const std::string_view content = text.substr(pos + 1, close - pos - 1);
    if (!content.empty() && content.find('\n') == std::string_view::npos) {
      auto kind = classify_word(content);
      claim(pos, close + 1, std::nullopt);
      found.push_back({pos + 1, close, kind.value_or(EntityKind::InLineCode)});
    }
    pos = close;
  }

  // Multi-word phrases.
  for (const auto& [phrase, kind] : phrase_table()) {
    for (std::size_t pos = lowered.find(phrase); pos != std::string::npos; pos = lowered.find(phrase, pos + 1)) {
      const std::size_t end = pos + phrase.size();
      const bool bounded = (pos == 0 || !is_word_char(lowered[pos - 1])) && (end == lowered.size() || !is_word_char(lowered[end]));
      if (!bounded || std::any_of(claimed.begin() + pos, claimed.begin() + end, [](bool c) { return c; })) continue;
      claim(pos, end, kind);
    }
  }

  std::size_t pos = 0;
  while (pos < text.size()) {
    if (claimed[pos] || std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    if (starts_with_ci(text, pos, "http://") || starts_with_ci(text, pos, "https://") || starts_with_ci(text, pos, "www.")) {
      pos = skip_url(text, pos);
      continue;
    }
    const char c = text[pos];
    if (c == '@' && pos + 1 < text.size() && is_word_char(text[pos + 1]) && (pos == 0 || !is_word_char(text[pos - 1]))) {
      std::size_t end = pos + 1;
      while (end < text.size() && is_word_char(text[end])) ++end;
      found.push_back({pos, end, EntityKind::UserName});
      pos = end;
      continue;
    }
    if (c == '<') {
      std::size_t b = pos + 1;
      if (b < text.size() && text[b] == '/') ++b;
      std::size_t e = b;
      while (e < text.size() && std::isalnum(static_cast<unsigned char>(text[e]))) ++e;
      if (e > b && e < text.size() && text[e] == '>' && std::isalpha(static_cast<unsigned char>(text[b]))) {
        found.push_back({b, e, EntityKind::HtmlXmlTagName});
        pos = e + 1;
        continue;
      }
    }
    if (c == '"') {
      const std::size_t close = text.find('"', pos + 1);
      if (close != std::string_view::npos && close > pos + 1 && close - pos < 60 &&
          text.substr(pos + 1, close - pos - 1).find('\n') == std::string_view::npos) {
        found.push_back({pos + 1, close, EntityKind::Value});
        pos = close + 1;
        continue;
      }
    }
    if (!is_word_char(c)) {
      ++pos;
      continue;
    }
    // Identifier-like word, possibly dotted, possibly followed by "()".
    std::size_t end = pos;
    while (end < text.size() && (is_word_char(text[end]) || text[end] == '+' || text[end] == '#' ||
                                 (text[end] == '.' && end + 1 < text.size() && is_word_char(text[end + 1])))) {
      ++end;
    }
    if (end + 1 < text.size() && text[end] == '(' && text[end + 1] == ')') end += 2;
    std::string_view word = text.substr(pos, end - pos);
    // Keyboard chords such as Ctrl+C.
    const auto plus = word.find('+');
    if (plus != std::string_view::npos && plus > 0 && plus + 1 < word.size()) {
      const std::string modifier = lower(word.substr(0, plus));
      if (std::find(kModifierKeys.begin(), kModifierKeys.end(), modifier) != kModifierKeys.end()) {
        found.push_back({pos, end, EntityKind::KeyboardInput});
        pos = end;
        continue;
      }
    }
    if (auto kind = classify_word(word)) {
      found.push_back({pos, end, *kind});
    } else if (plus != std::string_view::npos || word.find('#') != std::string_view::npos) {
      // Retry without trailing operator characters ("C++" stays, "x+" goes).
      std::size_t trimmed = word.size();
      while (trimmed > 0 && (word[trimmed - 1] == '+' || word[trimmed - 1] == '#')) --trimmed;
      if (auto k2 = classify_word(word.substr(0, trimmed))) found.push_back({pos, pos + trimmed, *k2});
    }
    pos = end;
  }

  std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.end > b.end;
  });
  std::vector<Candidate> chosen;
  std::size_t covered = 0;
  for (const auto& cand : found) {
    if (cand.begin < covered) continue;
    chosen.push_back(cand);
    covered = cand.end;
  }
  return chosen;
}

// ---------------------------------------------------------------------------
// Intent rules
// ---------------------------------------------------------------------------

constexpr std::array<std::string_view, 14> kLearningCues = {
    "how to", "how do i install", "install", "installing", "tutorial", "tutorials", "resource",
    "resources", "learn", "learning", "new to", "documentation", "beginner", "course"};
constexpr std::array<std::string_view, 6> kErrorCues = {"error", "errors", "exception", "traceback", "stack trace",
                                                        "crash"};
constexpr std::array<std::string_view, 9> kDiscrepancyCues = {
    "doesn't work", "does not work", "not working", "unexpected", "weird", "strange", "why does", "why is",
    "wrong result"};
constexpr std::array<std::string_view, 7> kReviewCues = {"review", "better way", "best practice", "best practices",
                                                         "feedback", "cleaner", "idiomatic"};
constexpr std::array<std::string_view, 8> kApiChangeCues = {"deprecated", "upgrade", "upgrading", "migrate",
                                                            "migration", "breaking change", "new version",
                                                            "changed in"};

bool mentions_api(std::string_view question) {
  for (const auto& c : find_entities(question)) {
    switch (c.kind) {
      case EntityKind::Library:
      case EntityKind::LibraryClass:
      case EntityKind::LibraryFunction:
      case EntityKind::LibraryVariable: return true;
      default: break;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Resolution rules
// ---------------------------------------------------------------------------

constexpr std::array<std::string_view, 16> kGratitudeCues = {
    "thanks", "thank you", "thx", "ty", "that worked", "it worked", "works now", "fixed it", "that fixed",
    "solved", "perfect", "got it", "appreciate it", "appreciated", "cheers", "that helps"};

std::string_view after_prefix(std::string_view text, std::string_view prefix) {
  const auto pos = text.find(prefix);
  if (pos == std::string_view::npos) return {};
  return text.substr(pos + prefix.size());
}

}  // namespace

std::string MockBackend::entity_response(std::string_view question) {
  json items = json::array();
  for (const auto& c : find_entities(question)) {
    items.push_back(std::string(question.substr(c.begin, c.end - c.begin)) + ": " + std::string(display_name(c.kind)));
  }
  return items.dump();
}

std::string MockBackend::intent_response(std::string_view question) {
  const std::string text = lower(question);
  json items = json::array();
  auto add = [&](IntentKind k) { items.push_back(display_name(k)); };
  if (contains_any(text, kApiChangeCues)) add(IntentKind::ApiChange);
  if (question.find('?') != std::string_view::npos && mentions_api(question)) add(IntentKind::ApiUsage);
  if (contains_any(text, kDiscrepancyCues)) add(IntentKind::Discrepancy);
  if (contains_any(text, kErrorCues)) add(IntentKind::Errors);
  if (contains_any(text, kLearningCues)) add(IntentKind::Learning);
  if (contains_any(text, kReviewCues)) add(IntentKind::Review);
  if (items.empty()) add(IntentKind::Conceptual);
  return items.dump();
}

std::string MockBackend::resolution_response(std::string_view conversation_lines) {
  bool other_user_replied = false;
  std::string last_text;
  std::size_t start = 0;
  while (start <= conversation_lines.size()) {
    auto end = conversation_lines.find('\n', start);
    if (end == std::string_view::npos) end = conversation_lines.size();
    const std::string_view line = conversation_lines.substr(start, end - start);
    if (line.starts_with("User ")) {
      const auto colon = line.find(": ");
      if (colon != std::string_view::npos) {
        if (line.substr(5, colon - 5) != "1") other_user_replied = true;
        last_text = lower(line.substr(colon + 2));
      }
    }
    start = end + 1;
  }
  const bool resolved = other_user_replied && contains_any(last_text, kGratitudeCues);
  return resolved ? R"(["Resolved"])" : R"(["Unresolved"])";
}

std::string MockBackend::baseline_response(std::string_view question) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : question) {
    const bool space = std::isspace(static_cast<unsigned char>(c));
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  const bool yes = question.find('?') != std::string_view::npos;
  const int confidence = 50 + static_cast<int>((words * 7) % 50);
  json out = {{"resolution_status", yes ? "Yes" : "No"}, {"confidence_score", std::to_string(confidence) + "%"}};
  return out.dump();
}

CompletionResult MockBackend::complete(const CompletionRequest& request) {
  const std::string_view system = request.system;
  const std::string_view user = request.user;
  if (system.find("Extract all relevant software entities") != std::string_view::npos) {
    return CompletionResult::success(entity_response(after_prefix(user, "Question: ")));
  }
  if (system.find("Identify the intents behind the question") != std::string_view::npos) {
    return CompletionResult::success(intent_response(after_prefix(user, "Question: ")));
  }
  if (system.find("Determine if the issue discussed") != std::string_view::npos) {
    return CompletionResult::success(resolution_response(user));
  }
  if (system.find("will likely receive a resolved answer") != std::string_view::npos) {
    return CompletionResult::success(baseline_response(after_prefix(user, "Question: ")));
  }
  return CompletionResult::failure(BackendFailure::ModelRefusal, "mock backend does not recognize this prompt");
}

}  // namespace devchat
