#include <cctype>
#include <string>

#include "devchat/features.hpp"

namespace devchat {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

std::size_t code_points(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if (!is_continuation(c)) ++n;
  }
  return n;
}

bool starts_with_ci(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != prefix[i]) return false;
  }
  return true;
}

// Code points inside fences and inline spans; delimiters excluded.
std::size_t code_chars(std::string_view text, std::size_t* delimiter_spans = nullptr) {
  std::size_t code = 0, spans = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, 3, "```") == 0) {
      const auto close = text.find("```", i + 3);
      if (close == std::string_view::npos) break;
      code += code_points(text.substr(i + 3, close - i - 3));
      ++spans;
      i = close + 3;
    } else if (text[i] == '`') {
      const auto close = text.find('`', i + 1);
      if (close == std::string_view::npos) break;
      code += code_points(text.substr(i + 1, close - i - 1));
      ++spans;
      i = close + 1;
    } else {
      ++i;
    }
  }
  if (delimiter_spans != nullptr) *delimiter_spans = spans;
  return code;
}

}  // namespace

double readability_cli(std::string_view text) {
  std::size_t words = 0, letters = 0, sentences = 0;
  bool in_word = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (is_space(c)) {
      in_word = false;
      continue;
    }
    if (!in_word) ++words;
    in_word = true;
    if (std::isalpha(static_cast<unsigned char>(c))) ++letters;
    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i;
      while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
      if (j == text.size() || is_space(text[j])) ++sentences;
      i = j - 1;
    }
  }
  if (words == 0) return 0.0;
  if (sentences == 0) sentences = 1;
  const double per_100 = 100.0 / static_cast<double>(words);
  const double l = static_cast<double>(letters) * per_100;
  const double s = static_cast<double>(sentences) * per_100;
  return 0.0588 * l - 0.296 * s - 15.8;
}

double text_code_ratio(std::string_view text) {
  const std::size_t code = code_chars(text);
  if (code == 0) return 0.0;
  const std::size_t total = code_points(text);
  const std::size_t other = total - code;
  return static_cast<double>(code) / static_cast<double>(other > 0 ? other : 1);
}

std::size_t count_urls(std::string_view text) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool boundary = i == 0 || !is_word(text[i - 1]);
    if (boundary && (starts_with_ci(text, i, "http://") || starts_with_ci(text, i, "https://") ||
                     starts_with_ci(text, i, "www."))) {
      ++count;
      while (i < text.size() && !is_space(text[i])) ++i;
    } else {
      ++i;
    }
  }
  return count;
}

std::size_t count_mentions(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] == '@' && is_word(text[i + 1]) && (i == 0 || !is_word(text[i - 1]))) ++count;
  }
  return count;
}

bool has_code(std::string_view text) {
  std::size_t spans = 0;
  code_chars(text, &spans);
  if (spans > 0) return true;
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    auto line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    const auto line = text.substr(line_start, line_end - line_start);
    std::size_t indent = 0;
    while (indent < line.size() && line[indent] == ' ') ++indent;
    const bool tabbed = !line.empty() && line[0] == '\t';
    const bool body = line.find_first_not_of(" \t\r") != std::string_view::npos;
    if ((indent >= 4 || tabbed) && body) return true;
    line_start = line_end + 1;
  }
  return false;
}

std::size_t question_length(std::string_view text) { return code_points(text); }

int weekday(const InitialQuestion& question) { return question.asked_at.weekday(); }
int daytime(const InitialQuestion& question) { return question.asked_at.hour(); }

}  // namespace devchat
