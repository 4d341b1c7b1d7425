#include "devchat/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "devchat/error.hpp"
#include "devchat/random.hpp"
#include "devchat/timestamp.hpp"
#include "logit_math.hpp"

namespace devchat::synth {

namespace {

using nlohmann::json;

struct Mass {
  double eta;
  double weight;
};

// AUC of the score eta when outcomes are Bernoulli(sigmoid(eta)) over a
// discrete distribution of eta values.
double discrete_auc(std::vector<Mass> masses) {
  std::sort(masses.begin(), masses.end(), [](const Mass& a, const Mass& b) { return a.eta < b.eta; });
  double pos_total = 0.0, neg_total = 0.0, concordant = 0.0, neg_below = 0.0;
  for (std::size_t i = 0; i < masses.size();) {
    std::size_t j = i;
    double pos_here = 0.0, neg_here = 0.0;
    while (j < masses.size() && masses[j].eta - masses[i].eta <= 1e-12) {
      const double p = sigmoid(masses[j].eta);
      pos_here += masses[j].weight * p;
      neg_here += masses[j].weight * (1.0 - p);
      ++j;
    }
    concordant += pos_here * (neg_below + 0.5 * neg_here);
    neg_below += neg_here;
    pos_total += pos_here;
    neg_total += neg_here;
    i = j;
  }
  return concordant / (pos_total * neg_total);
}

double norm(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

// ---------------------------------------------------------------------------
// Archive vocabulary. Filler text avoids every lexicon word, intent cue and
// entity keyword the mock labeler knows, so extracted features depend only
// on the planted traits and on independent noise.
// ---------------------------------------------------------------------------

constexpr std::array<const char*, 5> kOpeners = {"Hi all, ", "Hey, ", "Hello, ", "Quick question: ", ""};
constexpr std::array<const char*, 8> kTasks = {
    "I am trying to parse a config file in my project",
    "I want to read rows from a local database",
    "I have a script that processes user records",
    "I am writing a small service that sends reports",
    "my job needs to merge two data sources",
    "I need to run a batch task every night",
    "I am building a command line tool for my team",
    "I want to cache results between runs"};
constexpr std::array<const char*, 4> kChannels = {"python-help", "go-help", "clojure", "racket"};
constexpr std::array<const char*, 4> kLanguages = {"Python", "Golang", "Clojure", "Racket"};
constexpr std::array<const char*, 4> kLibraries = {"numpy", "pandas", "requests", "flask"};
constexpr std::array<const char*, 4> kFunctions = {"pandas.read_csv", "numpy.mean", "os.path.join", "json.loads"};
constexpr std::array<const char*, 6> kMentionNames = {"Shira", "Ravi", "Mina", "Tomas", "Aiko", "Lena"};
constexpr std::array<const char*, 4> kReplies = {
    "Have you checked the input format?", "Can you share the full output?",
    "Try printing the values right before that line.", "Which release are you on?"};
constexpr std::array<const char*, 4> kResolvedClosers = {
    "Thanks, that worked!", "Thank you, it works now.", "That fixed it, thx!", "Got it, appreciate it."};
constexpr std::array<const char*, 3> kOpenClosers = {
    "Still not sure what is going on.", "I will look into it later.", "Maybe the data itself is off."};
constexpr std::array<const char*, 2> kHelperEnds = {"Maybe try a different approach.", "Not sure, sorry."};

constexpr double kIntercept = -1.3;
constexpr std::array<double, 4> kChannelEffects = {-0.4, -0.1, 0.1, 0.4};

const char* pick(Rng& rng, const auto& list) { return list[rng.index(list.size())]; }

}  // namespace

PlantedDesign planted_design(const DesignSpec& spec, std::uint64_t seed) {
  if (spec.group_intercepts.empty()) throw ValidationError("planted_design: need at least one group");
  Rng rng(seed);
  const std::size_t signal = spec.slopes.size();
  const std::size_t p = signal + spec.noise_features;
  PlantedDesign out{DesignMatrix{}, spec};
  auto& dm = out.dm;
  dm.x.resize(static_cast<Eigen::Index>(spec.rows), static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    dm.feature_names.push_back(j < signal ? "signal" + std::to_string(j + 1) : "noise" + std::to_string(j - signal + 1));
  }
  for (std::size_t g = 0; g < spec.group_intercepts.size(); ++g) dm.group_names.push_back("group" + std::to_string(g + 1));
  for (std::size_t i = 0; i < spec.rows; ++i) {
    const std::size_t g = rng.index(spec.group_intercepts.size());
    double eta = spec.intercept + spec.group_intercepts[g];
    for (std::size_t j = 0; j < p; ++j) {
      const double v = rng.normal();
      dm.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      if (j < signal) eta += spec.slopes[j] * v;
    }
    dm.y.push_back(rng.bernoulli(sigmoid(eta)) ? 1 : 0);
    dm.group.push_back(g);
    dm.row_ids.push_back("row" + std::to_string(i));
    dm.synthetic.push_back(false);
  }
  return out;
}

double bayes_auc(const DesignSpec& spec) {
  const double s = norm(spec.slopes);
  const double w = 1.0 / static_cast<double>(spec.group_intercepts.size());
  std::vector<Mass> masses;
  if (s < 1e-12) {
    for (double u : spec.group_intercepts) masses.push_back({spec.intercept + u, w});
    return discrete_auc(std::move(masses));
  }
  // Fine grid over the mixture of normals; each cell carries its mass.
  const auto [lo_it, hi_it] = std::minmax_element(spec.group_intercepts.begin(), spec.group_intercepts.end());
  const double lo = spec.intercept + *lo_it - 9.0 * s;
  const double hi = spec.intercept + *hi_it + 9.0 * s;
  constexpr int kCells = 40000;
  const double h = (hi - lo) / kCells;
  masses.reserve(kCells);
  for (int c = 0; c < kCells; ++c) {
    const double eta = lo + (c + 0.5) * h;
    double density = 0.0;
    for (double u : spec.group_intercepts) {
      const double zscore = (eta - spec.intercept - u) / s;
      density += w * std::exp(-0.5 * zscore * zscore) / (s * std::sqrt(2.0 * std::numbers::pi));
    }
    masses.push_back({eta, density * h});
  }
  return discrete_auc(std::move(masses));
}

DesignSpec calibrate_slopes(DesignSpec spec, double target) {
  const std::vector<double> base = spec.slopes;
  auto at = [&](double scale) {
    DesignSpec s = spec;
    for (std::size_t j = 0; j < base.size(); ++j) s.slopes[j] = base[j] * scale;
    return s;
  };
  double lo = 0.0, hi = 1.0;
  if (bayes_auc(at(lo)) > target) throw ValidationError("calibrate_slopes: group effects alone exceed the target AUC");
  while (bayes_auc(at(hi)) < target) {
    hi *= 2.0;
    if (hi > 1e3) throw ValidationError("calibrate_slopes: target AUC unreachable");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (bayes_auc(at(mid)) < target ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

const std::vector<PlantedTrait>& planted_traits() {
  static const std::vector<PlantedTrait> traits = {
      {"url", 0.30, 0.8},        {"mention", 0.25, 0.6},          {"library", 0.45, 0.5},
      {"library_function", 0.35, 0.7}, {"positive_tone", 0.30, 0.9}, {"error_report", 0.40, -0.8},
  };
  return traits;
}

double archive_bayes_auc(double scale) {
  const auto& traits = planted_traits();
  const std::size_t combos = std::size_t{1} << traits.size();
  std::vector<Mass> masses;
  for (std::size_t bits = 0; bits < combos; ++bits) {
    double weight = 1.0 / static_cast<double>(kChannelEffects.size());
    double eta = kIntercept;
    for (std::size_t t = 0; t < traits.size(); ++t) {
      const bool on = (bits >> t) & 1U;
      weight *= on ? traits[t].prevalence : 1.0 - traits[t].prevalence;
      if (on) eta += scale * traits[t].weight;
    }
    for (double u : kChannelEffects) masses.push_back({eta + u, weight});
  }
  return discrete_auc(std::move(masses));
}

ArchiveResult generate_archive(const ArchiveSpec& spec, std::uint64_t seed) {
  if (spec.conversations == 0) throw ValidationError("generate_archive: need at least one conversation");
  // Calibrate the trait weights to the requested Bayes AUC.
  double lo = 0.0, hi = 1.0;
  if (archive_bayes_auc(0.0) > spec.planted_auc) {
    throw ValidationError("generate_archive: channel effects alone exceed the planted AUC");
  }
  while (archive_bayes_auc(hi) < spec.planted_auc) {
    hi *= 2.0;
    if (hi > 1e3) throw ValidationError("generate_archive: planted AUC unreachable");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (archive_bayes_auc(mid) < spec.planted_auc ? lo : hi) = mid;
  }
  const double scale = 0.5 * (lo + hi);
  const auto& traits = planted_traits();

  Rng rng(seed);
  struct Planned {
    std::size_t channel;
    std::int64_t start_micros;
    std::string id;
  };
  // Two calendar years from 2020-01-01, in microseconds.
  constexpr std::int64_t kEpoch2020 = 1577836800LL * 1'000'000;
  constexpr std::int64_t kSpan = 2LL * 365 * 24 * 3600 * 1'000'000;
  std::vector<Planned> plan;
  for (std::size_t c = 0; c < spec.conversations; ++c) {
    const std::size_t channel = rng.index(kChannels.size());
    const auto offset = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(kSpan));
    plan.push_back({channel, kEpoch2020 + offset - offset % 1'000'000, "c" + std::to_string(c + 1)});
  }
  std::stable_sort(plan.begin(), plan.end(), [](const Planned& a, const Planned& b) { return a.start_micros < b.start_micros; });

  std::array<json, kChannels.size()> groups;
  for (auto& g : groups) g = json::array();
  ArchiveResult result;
  std::size_t resolved = 0;

  for (const auto& conv : plan) {
    const std::size_t ch = conv.channel;
    const std::string channel_key = std::string("synthdev#") + kChannels[ch];
    std::array<bool, 6> on{};
    double eta = kIntercept + kChannelEffects[ch];
    for (std::size_t t = 0; t < traits.size(); ++t) {
      on[t] = rng.bernoulli(traits[t].prevalence);
      if (on[t]) eta += scale * traits[t].weight;
    }
    const bool is_resolved = rng.bernoulli(sigmoid(eta));
    const std::string asker = "user" + std::to_string(ch) + "_" + std::to_string(rng.index(250));
    std::string helper;
    do {
      helper = "user" + std::to_string(ch) + "_" + std::to_string(rng.index(250));
    } while (helper == asker);

    LabelSet golden;
    golden.conversation_id = conv.id;
    golden.channel_key = channel_key;
    golden.source = LabelSource::Golden;
    golden.resolution = is_resolved ? ResolutionStatus::Resolved : ResolutionStatus::Unresolved;
    const Timestamp asked = Timestamp::from_micros(conv.start_micros);

    std::string q = pick(rng, kOpeners);
    q += pick(rng, kTasks);
    if (rng.bernoulli(0.5)) {
      const char* lang = kLanguages[ch];
      q += std::string(" in ") + lang;
      golden.entities.push_back({lang, EntityKind::ProgrammingLanguage, asked});
    }
    q += ".";
    if (on[2]) {
      const char* lib = pick(rng, kLibraries);
      q += std::string(" I use ") + lib + " for this.";
      golden.entities.push_back({lib, EntityKind::Library, asked});
    }
    if (on[3]) {
      const std::string fn = std::string(pick(rng, kFunctions)) + "()";
      q += " I call " + fn + " on the data.";
      golden.entities.push_back({fn, EntityKind::LibraryFunction, asked});
    }
    if (on[5]) {
      q += " It fails with an error every time.";
      golden.intents.insert(IntentKind::Errors);
    }
    if (on[0]) q += " See https://example.org/snippet/" + std::to_string(rng.index(10000)) + " for what I tried.";
    if (on[1]) {
      const std::string name = pick(rng, kMentionNames);
      q += " @" + name + " might know.";
      golden.entities.push_back({"@" + name, EntityKind::UserName, asked});
    }
    if (on[4]) q += " Thanks in advance, this community is great!";
    q += " Any ideas?";
    if (on[2] || on[3]) golden.intents.insert(IntentKind::ApiUsage);
    if (golden.intents.empty()) golden.intents.insert(IntentKind::Conceptual);

    std::vector<std::pair<std::string, std::string>> messages{{asker, q}};
    messages.emplace_back(helper, pick(rng, kReplies));
    if (is_resolved) {
      messages.emplace_back(asker, pick(rng, kResolvedClosers));
      ++resolved;
    } else if (rng.bernoulli(0.5)) {
      messages.emplace_back(asker, pick(rng, kOpenClosers));
    } else {
      messages.emplace_back(helper, pick(rng, kHelperEnds));
    }

    json records = json::array();
    std::int64_t at = conv.start_micros;
    for (std::size_t m = 0; m < messages.size(); ++m) {
      if (m > 0) at += static_cast<std::int64_t>(60 + rng.index(1800)) * 1'000'000;
      records.push_back({{"msg_num", std::to_string(m + 1)},
                         {"ts", format_timestamp(Timestamp::from_micros(at))},
                         {"user", messages[m].first},
                         {"text", messages[m].second}});
    }
    groups[ch].push_back({{"conversation_id", conv.id}, {"messages", std::move(records)}});
    result.golden.push_back(std::move(golden));
  }

  result.archive = json::array();
  for (std::size_t ch = 0; ch < kChannels.size(); ++ch) {
    result.archive.push_back({{"team_domain", "synthdev"}, {"channel_name", kChannels[ch]},
                              {"month", "Jan2020-Dec2021"}, {"messages", std::move(groups[ch])}});
  }
  json weights = json::object();
  for (const auto& t : traits) weights[t.name] = {{"prevalence", t.prevalence}, {"coefficient", scale * t.weight}};
  json channels = json::object();
  for (std::size_t ch = 0; ch < kChannels.size(); ++ch) {
    channels[std::string("synthdev#") + kChannels[ch]] = kChannelEffects[ch];
  }
  result.truth = {{"conversations", spec.conversations},
                  {"planted_auc", spec.planted_auc},
                  {"bayes_auc", archive_bayes_auc(scale)},
                  {"intercept", kIntercept},
                  {"traits", std::move(weights)},
                  {"channel_effects", std::move(channels)},
                  {"resolved", resolved}};
  return result;
}

}  // namespace devchat::synth
