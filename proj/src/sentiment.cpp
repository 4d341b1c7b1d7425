#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "devchat/features.hpp"

namespace devchat {

namespace {

// General-purpose valences on a -4..4 scale. Words that are neutral in
// programming talk (error, kill, fatal, exception, ...) are left out on
// purpose.
const std::unordered_map<std::string, double>& lexicon() {
  static const std::unordered_map<std::string, double> table = {
      {"good", 1.9},       {"great", 3.1},      {"awesome", 3.1},    {"amazing", 2.8},   {"excellent", 3.2},
      {"nice", 1.8},       {"cool", 1.3},       {"love", 3.2},       {"happy", 2.7},
      {"glad", 2.0},       {"thanks", 1.9},     {"thank", 1.5},      {"thx", 1.5},       {"appreciate", 2.0},
      {"appreciated", 2.0}, {"helpful", 1.8},   {"perfect", 2.7},    {"fantastic", 2.6}, {"wonderful", 2.7},
      {"beautiful", 2.9},  {"elegant", 2.1},    {"easy", 1.9},      {"fun", 2.3},
      {"enjoy", 2.2},      {"interesting", 1.7}, {"excited", 1.4},   {"best", 3.2},      {"better", 1.9},
      {"welcome", 2.0},    {"hope", 1.9},      {"hopefully", 1.7},
      {"lucky", 1.9},      {"smart", 1.7},      {"brilliant", 2.8},  {"pleased", 1.9},   {"useful", 1.9},
      {"success", 2.7},    {"successful", 2.8}, {"solid", 1.6},      {"neat", 2.0},      {"impressive", 2.3},
      {"grateful", 2.0},   {"cheers", 2.1},     {"yay", 2.4},        {"wow", 2.8},       {"lol", 1.8},
      {"bad", -2.5},       {"terrible", -2.1},  {"awful", -2.0},     {"horrible", -2.5}, {"hate", -2.7},
      {"annoying", -1.7},  {"annoyed", -1.6},   {"frustrated", -2.1}, {"frustrating", -1.9}, {"confused", -1.3},
      {"confusing", -1.3}, {"stuck", -1.4},     {"sad", -2.1},       {"ugly", -2.3},     {"stupid", -2.4},
      {"dumb", -2.3},      {"worse", -2.1},     {"worst", -3.1},     {"painful", -2.1},  {"pain", -2.3},
      {"difficult", -1.5}, {"impossible", -1.4}, {"sucks", -1.5},   {"wrong", -2.1},
      {"mess", -1.5},      {"messy", -1.2},     {"weird", -0.7},     {"worried", -1.2},  {"worry", -1.9},
      {"sorry", -0.3},     {"unfortunately", -1.5}, {"sadly", -1.9}, {"hopeless", -2.0}, {"useless", -1.8},
      {"disappointed", -1.9}, {"disappointing", -2.2}, {"struggle", -1.5}, {"struggling", -1.4}, {"nightmare", -2.7},
      {"desperate", -1.3}, {"afraid", -2.2},    {"scared", -1.9},    {"hell", -3.6},
      {"damn", -1.7},      {"crap", -1.6},      {"silly", -0.1},     {"tired", -1.9},    {"upset", -1.6},
  };
  return table;
}

bool is_negator(const std::string& token) {
  static const std::vector<std::string> words = {
      "not", "no", "never", "none", "nothing", "nobody", "neither", "nor", "without", "cannot", "aint"};
  if (std::find(words.begin(), words.end(), token) != words.end()) return true;
  return token.size() > 3 && token.ends_with("n't");
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u) || c == '\'') {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  for (auto& w : out) {
    while (!w.empty() && w.front() == '\'') w.erase(w.begin());
    while (!w.empty() && w.back() == '\'') w.pop_back();
  }
  std::erase_if(out, [](const std::string& w) { return w.empty(); });
  return out;
}

struct Score {
  double sum = 0.0;
  std::size_t hits = 0;
};

Score score(std::string_view text) {
  const auto tokens = words(text);
  const auto& table = lexicon();
  Score s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto it = table.find(tokens[i]);
    if (it == table.end()) continue;
    double valence = it->second;
    for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
      if (is_negator(tokens[i - back])) {
        valence = -valence;
        break;
      }
    }
    s.sum += valence;
    ++s.hits;
  }
  return s;
}

}  // namespace

double sentiment(std::string_view text) {
  const double s = score(text).sum;
  return s / std::sqrt(s * s + 15.0);
}

std::size_t sentiment_hits(std::string_view text) { return score(text).hits; }

}  // namespace devchat
