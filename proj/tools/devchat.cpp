// devchat: file-based pipeline from chat archives to resolution models.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "devchat/analysis.hpp"
#include "devchat/backend.hpp"
#include "devchat/config.hpp"
#include "devchat/corpus.hpp"
#include "devchat/error.hpp"
#include "devchat/evaluation.hpp"
#include "devchat/featureproc.hpp"
#include "devchat/features.hpp"
#include "devchat/labeler.hpp"
#include "devchat/manifest.hpp"
#include "devchat/metrics.hpp"
#include "devchat/model.hpp"
#include "devchat/random.hpp"
#include "devchat/stats.hpp"
#include "devchat/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace devchat;

namespace {

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::vector<std::string> argv;
};

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

std::ifstream open_input(const std::string& path, const std::string& what) {
  if (path.empty()) throw ValidationError("missing " + what + " path");
  if (!fs::is_regular_file(path)) throw ValidationError("expected " + what + " at " + path + " (file not found)");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + what + " at " + path);
  return in;
}

std::string read_all(const std::string& path, const std::string& what) {
  auto in = open_input(path, what);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_output(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

void write_json_file(const std::string& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

std::vector<Conversation> load_corpus(const std::string& path) {
  auto in = open_input(path, "corpus (from `ingest`)");
  return read_corpus(in);
}

std::vector<LabelSet> load_labels(const std::string& path, const std::string& what) {
  auto in = open_input(path, what);
  return read_label_sets(in);
}

FeatureTable load_features(const std::string& path, const std::string& what) {
  auto in = open_input(path, what);
  return read_feature_csv(in);
}

std::string key_of(const std::string& channel, const std::string& id) { return channel + '\x1f' + id; }

PipelineConfig load_pipeline_config(const Common& common) {
  PipelineConfig config = common.config_path.empty() ? PipelineConfig{} : load_config(common.config_path);
  validate(config);
  return config;
}

RunManifest start_manifest(const std::string& command, const Common& common, const PipelineConfig& config) {
  RunManifest manifest;
  manifest.command = command;
  manifest.arguments = common.argv;
  manifest.config_hash = config.hash();
  manifest.seeds["master"] = common.seed;
  return manifest;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t n = 5000;
  double planted_auc = 0.75;
  std::string out = "synth";
};

void run_synth(const Common& common, const SynthArgs& args) {
  const PipelineConfig config = load_pipeline_config(common);
  RunManifest manifest = start_manifest("synth", common, config);
  synth::ArchiveResult result;
  {
    PhaseTimer timer(manifest, "generate");
    result = synth::generate_archive({args.n, args.planted_auc}, common.seed);
  }
  const std::string archive_path = (fs::path(args.out) / "archive.json").string();
  const std::string golden_path = (fs::path(args.out) / "golden.jsonl").string();
  const std::string truth_path = (fs::path(args.out) / "truth.json").string();
  {
    auto out = open_output(archive_path);
    out << result.archive.dump() << '\n';
  }
  {
    auto out = open_output(golden_path);
    write_label_sets(out, result.golden);
  }
  write_json_file(truth_path, result.truth);
  for (const auto& path : {archive_path, golden_path, truth_path}) manifest.add_output(path);
  manifest.count("conversations", result.golden.size());
  manifest.notes["truth"] = result.truth;
  manifest.write_for(archive_path);
  std::cout << "synth: " << result.golden.size() << " conversations, Bayes AUC "
            << result.truth["bayes_auc"].get<double>() << " -> " << args.out << '\n';
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> archives;
  std::string out = "corpus.jsonl";
};

void run_ingest(const Common& common, const IngestArgs& args) {
  const PipelineConfig config = load_pipeline_config(common);
  RunManifest manifest = start_manifest("ingest", common, config);
  std::vector<ChannelMessages> channels;
  std::size_t messages = 0, assumed_utc = 0;
  json record_errors = json::array();
  {
    PhaseTimer timer(manifest, "parse");
    for (const auto& path : args.archives) {
      const std::string bytes = read_all(path, "archive");
      manifest.add_input(path);
      ArchiveParseResult parsed;
      try {
        parsed = parse_archive(bytes);
      } catch (const ArchiveSyntaxError& e) {
        throw ValidationError(path + ": " + e.what() + " (byte " + std::to_string(e.byte_offset()) + ")");
      }
      messages += parsed.message_count;
      assumed_utc += parsed.assumed_utc;
      for (const auto& err : parsed.errors) {
        record_errors.push_back({{"file", path}, {"conversation_id", err.conversation_id},
                                 {"field", err.field}, {"reason", err.reason}});
      }
      for (auto& ch : parsed.channels) channels.push_back(std::move(ch));
    }
  }
  AggregateResult aggregated;
  {
    PhaseTimer timer(manifest, "aggregate");
    aggregated = aggregate_conversations(channels);
  }
  {
    auto out = open_output(args.out);
    write_corpus(out, aggregated.conversations);
  }
  manifest.add_output(args.out);
  manifest.count("message_records", messages + record_errors.size());
  if (!record_errors.empty()) {
    manifest.delta("message_records", -static_cast<std::int64_t>(record_errors.size()), "malformed records skipped");
  }
  if (aggregated.duplicate_messages > 0) {
    manifest.delta("message_records", -static_cast<std::int64_t>(aggregated.duplicate_messages),
                   "duplicate (channel, conversation, msg_num) dropped");
  }
  manifest.count("messages", messages - aggregated.duplicate_messages);
  manifest.count("conversations", aggregated.conversations.size());
  manifest.notes["record_errors"] = record_errors;
  manifest.notes["timestamps_assumed_utc"] = assumed_utc;
  manifest.write_for(args.out);
  std::cout << "ingest: " << aggregated.conversations.size() << " conversations, " << record_errors.size()
            << " skipped records -> " << args.out << '\n';
}

// ---------------------------------------------------------------------------
// label
// ---------------------------------------------------------------------------

struct LabelArgs {
  std::string corpus = "corpus.jsonl";
  std::string backend = "mock";
  std::string out = "labels.jsonl";
  std::string baseline_out;
  std::size_t resume = 0;
  bool debug = false;
};

// Returns the process exit code: 2 when the backend aborted the run.
int run_label(const Common& common, const LabelArgs& args) {
  const PipelineConfig config = load_pipeline_config(common);
  RunManifest manifest = start_manifest("label", common, config);
  const auto corpus = load_corpus(args.corpus);
  manifest.add_input(args.corpus);

  std::unique_ptr<CompletionBackend> backend;
  if (args.backend == "mock") {
    backend = std::make_unique<MockBackend>();
    manifest.notes["mock_rules"] = std::string(MockBackend::kRulesVersion);
  } else {
    if (config.labeler.endpoint.empty()) throw ValidationError("http backend needs labeler.endpoint in --config");
    HttpBackendConfig http{config.labeler.endpoint, config.http_path, config.labeler.model, config.api_key_env,
                           args.debug};
    backend = std::make_unique<HttpBackend>(std::move(http));
    manifest.notes["model"] = config.labeler.model;
  }
  manifest.notes["backend"] = backend->name();

  LabelingOptions options;
  options.config = config.labeler;
  options.jobs = static_cast<int>(common.jobs);
  options.with_baseline = !args.baseline_out.empty();
  options.start_index = args.resume;
  if (args.resume > corpus.size()) throw ValidationError("--resume is past the end of the corpus");

  LabelingReport report;
  {
    PhaseTimer timer(manifest, "label");
    report = label_corpus(corpus, *backend, options);
  }
  {
    auto out = open_output(args.out);
    write_label_sets(out, report.labels);
  }
  manifest.add_output(args.out);
  if (options.with_baseline) {
    auto out = open_output(args.baseline_out);
    for (const auto& record : report.baseline) out << to_json(record).dump() << '\n';
    out.close();
    manifest.add_output(args.baseline_out);
  }
  manifest.count("conversations", corpus.size());
  if (args.resume > 0) manifest.delta("conversations", -static_cast<std::int64_t>(args.resume), "skipped before resume cursor");
  const auto unlabeled = static_cast<std::int64_t>(corpus.size() - args.resume) - static_cast<std::int64_t>(report.labels.size());
  const auto not_attempted = static_cast<std::int64_t>(corpus.size() - report.resume_cursor);
  if (unlabeled - not_attempted > 0) manifest.delta("conversations", -(unlabeled - not_attempted), "labeling failed");
  if (not_attempted > 0) manifest.delta("conversations", -not_attempted, "not attempted (run aborted)");
  manifest.count("labels", report.labels.size());
  manifest.notes["labeling"] = to_json(report);
  manifest.write_for(args.out);
  std::cout << "label: " << report.labels.size() << " of " << corpus.size() << " conversations labeled, "
            << report.failures.size() << " failures -> " << args.out << '\n';
  if (report.aborted) {
    std::cerr << "error: backend kept failing; resume with --resume " << report.resume_cursor << '\n';
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string corpus = "corpus.jsonl";
  std::string golden;
  std::string labels = "labels.jsonl";
  std::string baseline;
  std::string out = "metrics.json";
};

void run_evaluate(const Common& common, const EvaluateArgs& args) {
  const PipelineConfig config = load_pipeline_config(common);
  RunManifest manifest = start_manifest("evaluate", common, config);
  const auto corpus = load_corpus(args.corpus);
  const auto golden = load_labels(args.golden, "golden labels");
  const auto predicted = load_labels(args.labels, "predicted labels (from `label`)");
  for (const auto& p : {args.corpus, args.golden, args.labels}) manifest.add_input(p);

  std::map<std::string, const Conversation*> by_key;
  for (const auto& c : corpus) by_key.emplace(key_of(c.channel_key(), c.id), &c);
  std::map<std::string, const LabelSet*> predicted_by_key;
  for (const auto& l : predicted) predicted_by_key.emplace(key_of(l.channel_key, l.conversation_id), &l);

  std::vector<GoldenPair> pairs;
  std::size_t missing_prediction = 0, missing_conversation = 0;
  for (const auto& g : golden) {
    const auto key = key_of(g.channel_key, g.conversation_id);
    const auto p = predicted_by_key.find(key);
    const auto c = by_key.find(key);
    if (c == by_key.end()) {
      ++missing_conversation;
      continue;
    }
    if (p == predicted_by_key.end()) {
      ++missing_prediction;
      continue;
    }
    pairs.push_back({&g, p->second, extract_initial_question(*c->second).text});
  }
  MetricsReport report;
  {
    PhaseTimer timer(manifest, "score");
    report = evaluate_labels(pairs);
  }
  json out = to_json(report);
  if (!args.baseline.empty()) {
    auto in = open_input(args.baseline, "baseline predictions (from `label --baseline-out`)");
    manifest.add_input(args.baseline);
    std::vector<double> scores;
    std::vector<int> truth;
    std::map<std::string, const LabelSet*> golden_by_key;
    for (const auto& g : golden) golden_by_key.emplace(key_of(g.channel_key, g.conversation_id), &g);
    for (const auto& record : read_baseline_records(in)) {
      const auto g = golden_by_key.find(key_of(record.channel_key, record.conversation_id));
      if (g == golden_by_key.end()) continue;
      scores.push_back(record.prediction.resolved_score());
      truth.push_back(g->second->resolution == ResolutionStatus::Resolved ? 1 : 0);
    }
    out["baseline"] = {{"conversations", scores.size()}, {"auc", baseline_auc(scores, truth)}};
  }
  write_json_file(args.out, out);
  manifest.add_output(args.out);
  manifest.count("golden", golden.size());
  if (missing_conversation > 0) manifest.delta("golden", -static_cast<std::int64_t>(missing_conversation), "not in corpus");
  if (missing_prediction > 0) manifest.delta("golden", -static_cast<std::int64_t>(missing_prediction), "no predicted labels");
  manifest.count("scored", pairs.size());
  manifest.write_for(args.out);
  std::cout << "evaluate: " << pairs.size() << " conversations scored -> " << args.out << '\n';
}

// ---------------------------------------------------------------------------
// features
// ---------------------------------------------------------------------------

struct FeaturesArgs {
  std::string corpus = "corpus.jsonl";
  std::string labels = "labels.jsonl";
  std::string out = "features.csv";
  bool specific_intent_presence = false;
};

void run_features(const Common& common, const FeaturesArgs& args) {
  const PipelineConfig config = load_pipeline_config(common);
  RunManifest manifest = start_manifest("features", common, config);
  const auto corpus = load_corpus(args.corpus);
  const auto labels = load_labels(args.labels, "labels (from `label`)");
  manifest.add_input(args.corpus);
  manifest.add_input(args.labels);
  FeatureOptions options{config.active_threshold, args.specific_intent_presence};
  FeatureExtraction extraction;
  {
    PhaseTimer timer(manifest, "extract");
    extraction = extract_features(corpus, labels, options);
  }
  {
    auto out = open_output(args.out);
    write_feature_csv(out, extraction.table);
  }
  manifest.add_output(args.out);
  const auto& t = extraction.tallies;
  manifest.count("conversations", corpus.size());
  if (t.unlabeled_conversations > 0) {
    manifest.delta("conversations", -static_cast<std::int64_t>(t.unlabeled_conversations), "no labels");
  }
  if (t.empty_conversations > 0) {
    manifest.delta("conversations", -static_cast<std::int64_t>(t.empty_conversations), "empty conversation");
  }
  manifest.count("rows", extraction.table.rows.size());
  manifest.notes["empty_readability"] = t.empty_readability;
  manifest.notes["empty_sentiment"] = t.empty_sentiment;
  manifest.write_for(args.out);
  std::cout << "features: " << extraction.table.rows.size() << " rows x " << extraction.table.columns.size()
            << " columns -> " << args.out << '\n';
}

// ---------------------------------------------------------------------------
// prune
// ---------------------------------------------------------------------------

struct PruneArgs {
  std::string features = "features.csv";
  std::string out = "pruned.csv";
  std::string report;
};

void run_prune(const Common& common, const PruneArgs& args) {
  const PipelineConfig config = load_pipeline_config(common);
  RunManifest manifest = start_manifest("prune", common, config);
  const FeatureTable table = load_features(args.features, "feature table (from `features`)");
  manifest.add_input(args.features);
  if (table.rows.empty()) throw ValidationError("prune: feature table " + args.features + " has no rows");

  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.columns.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.rows[i].values[j];
    }
  }
  PruneOptions options{config.correlation_cutoff, config.vif_threshold, derive_seed(common.seed, 1)};
  manifest.seeds["correlation_cluster_pick"] = options.seed;
  PruneResult result;
  {
    PhaseTimer timer(manifest, "prune");
    result = prune_features(matrix, table.columns, options);
  }
  FeatureTable pruned;
  pruned.columns = result.report.retained_columns;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    FeatureVector row{table.rows[i].conversation_id, table.rows[i].channel_key, {}, table.rows[i].label};
    for (Eigen::Index j = 0; j < result.matrix.cols(); ++j) row.values.push_back(result.matrix(static_cast<Eigen::Index>(i), j));
    pruned.rows.push_back(std::move(row));
  }
  {
    auto out = open_output(args.out);
    write_feature_csv(out, pruned);
  }
  const std::string report_path = args.report.empty() ? args.out + ".prune.json" : args.report;
  const json report = to_json(result.report);
  write_json_file(report_path, report);
  manifest.add_output(args.out);
  manifest.add_output(report_path);
  manifest.count("rows", pruned.rows.size());
  manifest.dropped_features = report.at("dropped");
  manifest.notes["retained_columns"] = pruned.columns;
  manifest.write_for(args.out);
  std::cout << "prune: kept " << pruned.columns.size() << " of " << table.columns.size() << " columns -> "
            << args.out << '\n';
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string features = "pruned.csv";
  std::string out = "model.json";
  std::vector<std::string> strategies;
  std::vector<std::size_t> folds;
  std::optional<std::size_t> bootstrap;
  std::string sampling_order = "inside";
  std::string baseline;
  bool pooled = false;
};

void run_train(const Common& common, TrainArgs args) {
  const PipelineConfig config = load_pipeline_config(common);
  RunManifest manifest = start_manifest("train", common, config);
  const FeatureTable table = load_features(args.features, "pruned feature table (from `prune`)");
  manifest.add_input(args.features);
  const DesignMatrix dm = design_from_table(table);
  dm.validate();
  if (args.strategies.empty()) args.strategies = {"undersample", "smote"};
  if (args.folds.empty()) args.folds = {5, 10};
  const std::size_t bootstrap = args.bootstrap.value_or(config.bootstrap);

  EvaluationOptions eval;
  eval.smote_k = config.smote_k;
  eval.jobs = common.jobs;
  eval.mixed = !args.pooled;
  if (args.sampling_order == "inside") {
    eval.order = SamplingOrder::InsideFolds;
  } else if (args.sampling_order == "before") {
    eval.order = SamplingOrder::BeforeSplit;
  } else {
    throw ValidationError("--sampling-order must be inside or before");
  }

  std::vector<std::size_t> candidates(dm.cols());
  for (std::size_t j = 0; j < candidates.size(); ++j) candidates[j] = j;
  StepwiseResult stepwise;
  {
    PhaseTimer timer(manifest, "stepwise");
    stepwise = stepwise_select(dm, candidates);
  }
  std::vector<std::size_t> selected = stepwise.selected;
  std::sort(selected.begin(), selected.end());
  const DesignMatrix chosen = dm.select_columns(selected);

  json trace = json::array();
  for (const auto& step : stepwise.trace) {
    trace.push_back({{"added", step.added ? json(dm.feature_names[*step.added]) : json(nullptr)}, {"aic", step.aic}});
  }

  json evaluation = json::array();
  double sum_auc = 0.0;
  std::size_t n_auc = 0;
  {
    PhaseTimer timer(manifest, "evaluate");
    for (std::size_t s = 0; s < args.strategies.size(); ++s) {
      eval.strategy = parse_sampling_strategy(args.strategies[s]);
      for (std::size_t k : args.folds) {
        const auto seed = derive_seed(common.seed, 100 + 10 * s + k);
        manifest.seeds["cv_" + args.strategies[s] + "_" + std::to_string(k)] = seed;
        const CvResult cv = kfold_cv(chosen, k, seed, eval);
        json entry = to_json(cv);
        entry["strategy"] = args.strategies[s];
        entry["method"] = std::to_string(k) + "-fold cross-validation";
        evaluation.push_back(std::move(entry));
        sum_auc += cv.mean_auc;
        ++n_auc;
      }
      if (bootstrap > 0) {
        const auto seed = derive_seed(common.seed, 200 + s);
        manifest.seeds["bootstrap_" + args.strategies[s]] = seed;
        const BootstrapResult boot = bootstrap_eval(chosen, bootstrap, seed, eval);
        json entry = to_json(boot);
        entry["strategy"] = args.strategies[s];
        entry["method"] = "bootstrap (" + std::to_string(bootstrap) + " iterations)";
        evaluation.push_back(std::move(entry));
        sum_auc += boot.mean_auc;
        ++n_auc;
      }
    }
  }

  // The reported coefficients come from the full, un-resampled data.
  json model;
  {
    PhaseTimer timer(manifest, "fit");
    if (args.pooled) {
      const LogisticFit fit = fit_logistic(chosen);
      json coefficients = json::array();
      for (std::size_t j = 0; j < fit.names.size(); ++j) {
        const double z = fit.beta[static_cast<Eigen::Index>(j)] / fit.se[static_cast<Eigen::Index>(j)];
        const double p = stats::two_sided_normal_p(z);
        coefficients.push_back({{"feature", fit.names[j]}, {"coef", fit.beta[static_cast<Eigen::Index>(j)]},
                                {"se", fit.se[static_cast<Eigen::Index>(j)]}, {"z", z}, {"p", p},
                                {"p_display", stats::format_p_value(p)}, {"significance", stats::significance_stars(p)}});
      }
      model = {{"kind", "pooled logistic"}, {"coefficients", coefficients}, {"log_likelihood", fit.log_lik},
               {"aic", fit.aic}, {"separation", fit.separation}};
    } else {
      MixedOptions options;
      options.pooled_fallback = true;
      model = to_json(fit_mixed_logit(chosen, options));
    }
  }

  json out = {{"rows", dm.rows()},
              {"candidate_features", dm.feature_names},
              {"selected_features", chosen.feature_names},
              {"stepwise", trace},
              {"model", model},
              {"evaluation", evaluation},
              {"mean_auc", n_auc == 0 ? 0.0 : sum_auc / static_cast<double>(n_auc)},
              {"sampling_order", args.sampling_order}};
  if (!args.baseline.empty()) {
    auto in = open_input(args.baseline, "baseline predictions (from `label --baseline-out`)");
    manifest.add_input(args.baseline);
    std::map<std::string, int> truth;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      truth.emplace(key_of(table.rows[i].channel_key, table.rows[i].conversation_id), dm.y[i]);
    }
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& record : read_baseline_records(in)) {
      const auto it = truth.find(key_of(record.channel_key, record.conversation_id));
      if (it == truth.end()) continue;
      scores.push_back(record.prediction.resolved_score());
      labels.push_back(it->second);
    }
    out["baseline_auc"] = baseline_auc(scores, labels);
  }
  write_json_file(args.out, out);
  manifest.add_output(args.out);
  manifest.count("rows", dm.rows());
  json not_selected = json::array();
  for (std::size_t j = 0; j < dm.cols(); ++j) {
    if (!std::binary_search(selected.begin(), selected.end(), j)) not_selected.push_back(dm.feature_names[j]);
  }
  manifest.dropped_features = {{"stepwise", not_selected}};
  manifest.write_for(args.out);
  std::printf("train: %zu rows, %zu features selected, mean AUC %.4f -> %s\n", dm.rows(), chosen.cols(),
              out["mean_auc"].get<double>(), args.out.c_str());
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string labels = "labels.jsonl";
  std::string out = "analysis";
  std::optional<std::size_t> min_pair_occurrences;
};

void run_analyze(const Common& common, const AnalyzeArgs& args) {
  const PipelineConfig config = load_pipeline_config(common);
  RunManifest manifest = start_manifest("analyze", common, config);
  const auto labels = load_labels(args.labels, "labels (from `label`)");
  manifest.add_input(args.labels);
  const std::size_t min_occ = args.min_pair_occurrences.value_or(config.min_pair_occurrences);

  const auto rows = intent_success_table(labels);
  const ContingencyTable contingency = intent_contingency(rows);
  json chi;
  try {
    chi = to_json(chi_square_independence(contingency));
  } catch (const ValidationError& e) {
    chi = {{"skipped", e.what()}};
  }
  const PairTable pairs = pair_success_table(labels, min_occ);

  const fs::path dir(args.out);
  const std::string intent_path = (dir / "intent_success.csv").string();
  const std::string pair_path = (dir / "entity_pairs.csv").string();
  const std::string summary_path = (dir / "analysis.json").string();
  {
    auto out = open_output(intent_path);
    write_intent_success_csv(out, rows);
  }
  {
    auto out = open_output(pair_path);
    write_pair_csv(out, pairs);
  }
  auto pair_json = [](const std::vector<PairRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) {
      arr.push_back({{"pair", {display_name(r.pair.first), display_name(r.pair.second)}},
                     {"successes", r.successes}, {"total", r.total}, {"rate", r.rate()}});
    }
    return arr;
  };
  json by_intent = json::object();
  for (auto intent : all_intent_kinds()) {
    json top = pair_json(top_pairs(pairs, intent, 5));
    if (top.empty()) continue;
    by_intent[std::string(display_name(intent))] = {{"top", top}, {"bottom", pair_json(bottom_pairs(pairs, intent, 5))}};
  }
  by_intent["All"] = {{"top", pair_json(top_pairs(pairs, std::nullopt, 5))},
                      {"bottom", pair_json(bottom_pairs(pairs, std::nullopt, 5))}};
  json summary = {{"conversations", labels.size()},
                  {"chi_square", chi},
                  {"pair_coverage", coverage_stat(labels)},
                  {"min_pair_occurrences", min_occ},
                  {"pairs_retained", pairs.records.size()},
                  {"pairs_filtered_out", pairs.filtered_out},
                  {"pairs", by_intent}};
  write_json_file(summary_path, summary);
  for (const auto& p : {intent_path, pair_path, summary_path}) manifest.add_output(p);
  manifest.count("conversations", labels.size());
  manifest.write_for(summary_path);
  std::cout << "analyze: " << labels.size() << " conversations -> " << args.out << '\n';
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string model = "model.json";
  std::string analysis = "analysis";
  std::string metrics;
  std::string out = "report.md";
};

json read_json_file(const std::string& path, const std::string& what) {
  const std::string text = read_all(path, what);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void run_report(const Common& common, const ReportArgs& args) {
  const PipelineConfig config = load_pipeline_config(common);
  RunManifest manifest = start_manifest("report", common, config);
  const json model = read_json_file(args.model, "model (from `train`)");
  const std::string summary_path = (fs::path(args.analysis) / "analysis.json").string();
  const std::string intent_path = (fs::path(args.analysis) / "intent_success.csv").string();
  const json summary = read_json_file(summary_path, "analysis summary (from `analyze`)");
  const std::string intent_csv = read_all(intent_path, "intent success table (from `analyze`)");
  for (const auto& p : {args.model, summary_path, intent_path}) manifest.add_input(p);

  std::ostringstream md;
  md << "# Resolution report\n\n";
  if (!args.metrics.empty()) {
    const json metrics = read_json_file(args.metrics, "label metrics (from `evaluate`)");
    manifest.add_input(args.metrics);
    md << "## Labeling quality\n\n| Task | Precision | Recall | F-score |\n|---|---|---|---|\n";
    for (const auto& task : metrics.at("tasks")) {
      char line[160];
      std::snprintf(line, sizeof line, "| %s | %.3f | %.3f | %.3f |\n", task.at("task").get<std::string>().c_str(),
                    task.at("precision").get<double>(), task.at("recall").get<double>(),
                    task.at("f_score").get<double>());
      md << line;
    }
    md << '\n';
  }
  md << "## Success rate by intent\n\n| Intent | Rate (%) | Resolved | Total |\n|---|---|---|---|\n";
  {
    std::istringstream in(intent_csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::string cell, row = "|";
      std::istringstream cells(line);
      while (std::getline(cells, cell, ',')) row += " " + cell + " |";
      md << row << '\n';
    }
  }
  const json& chi = summary.at("chi_square");
  if (chi.contains("statistic")) {
    char line[200];
    std::snprintf(line, sizeof line, "\nChi-square %.2f, dof %d, p %s\n\n", chi.at("statistic").get<double>(),
                  chi.at("dof").get<int>(), chi.at("p_display").get<std::string>().c_str());
    md << line;
  }
  for (const char* part : {"top", "bottom"}) {
    md << "## Entity pairs, " << part << " success rates (all intents)\n\n| Pair | Resolved | Total |\n|---|---|---|\n";
    for (const auto& r : summary.at("pairs").at("All").at(part)) {
      md << "| " << r.at("pair")[0].get<std::string>() << " + " << r.at("pair")[1].get<std::string>() << " | "
         << r.at("successes").get<std::uint64_t>() << " | " << r.at("total").get<std::uint64_t>() << " |\n";
    }
    md << '\n';
  }
  md << "## Model evaluation\n\n| Sampling | Method | AUC |\n|---|---|---|\n";
  for (const auto& e : model.at("evaluation")) {
    char line[200];
    std::snprintf(line, sizeof line, "| %s | %s | %.4f |\n", e.at("strategy").get<std::string>().c_str(),
                  e.at("method").get<std::string>().c_str(), e.at("mean_auc").get<double>());
    md << line;
  }
  if (model.contains("baseline_auc")) {
    char line[80];
    std::snprintf(line, sizeof line, "| question only | baseline | %.4f |\n", model.at("baseline_auc").get<double>());
    md << line;
  }
  md << "\n## Coefficients\n\n| Feature | Estimate | Std. error | z | p |\n|---|---|---|---|---|\n";
  auto cell = [](const json& v, const char* fmt) {
    if (!v.is_number()) return std::string("n/a");
    char buf[40];
    std::snprintf(buf, sizeof buf, fmt, v.get<double>());
    return std::string(buf);
  };
  for (const auto& c : model.at("model").at("coefficients")) {
    md << "| " << c.at("feature").get<std::string>() << " | " << cell(c.at("coef"), "%.4f") << " | "
       << cell(c.at("se"), "%.4f") << " | " << cell(c.at("z"), "%.2f") << " | "
       << c.at("p_display").get<std::string>() << ' ' << c.at("significance").get<std::string>() << " |\n";
  }
  if (model.at("model").contains("random_intercept_variance")) {
    char line[80];
    std::snprintf(line, sizeof line, "\nRandom-intercept variance: %.4f\n",
                  model.at("model").at("random_intercept_variance").get<double>());
    md << line;
  }
  {
    auto out = open_output(args.out);
    out << md.str();
  }
  manifest.add_output(args.out);
  manifest.write_for(args.out);
  std::cout << "report -> " << args.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine developer chat archives for question resolution"};
  app.require_subcommand(1);
  Common common;
  for (int i = 1; i < argc; ++i) common.argv.emplace_back(argv[i]);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "INI settings file");
    sub->add_option("--seed", common.seed, "Master seed")->capture_default_str();
    sub->add_option("--jobs", common.jobs, "Worker thread cap")->check(CLI::PositiveNumber)->capture_default_str();
  };

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic archive with planted signal");
  add_common(synth);
  synth->add_option("--n", synth_args.n, "Conversations")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--planted-auc", synth_args.planted_auc, "Bayes AUC of the planted model")
      ->check(CLI::Range(0.5, 1.0))->capture_default_str();
  synth->add_option("--out", synth_args.out, "Output directory")->capture_default_str();

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "Parse archives into a conversation corpus");
  add_common(ingest);
  ingest->add_option("archives", ingest_args.archives, "Archive JSON files")->required();
  ingest->add_option("--out", ingest_args.out, "Corpus JSONL")->capture_default_str();

  LabelArgs label_args;
  auto* label = app.add_subcommand("label", "Label entities, intents and resolution");
  add_common(label);
  label->add_option("--corpus", label_args.corpus)->capture_default_str();
  label->add_option("--backend", label_args.backend)->check(CLI::IsMember({"http", "mock"}))->capture_default_str();
  label->add_option("--out", label_args.out)->capture_default_str();
  label->add_option("--baseline-out", label_args.baseline_out, "Also run the question-only baseline");
  label->add_option("--resume", label_args.resume, "Resume cursor from an aborted run");
  label->add_flag("--debug", label_args.debug, "Log backend requests (token redacted)");

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand("evaluate", "Score labels against a golden set");
  add_common(evaluate);
  evaluate->add_option("--corpus", evaluate_args.corpus)->capture_default_str();
  evaluate->add_option("--golden", evaluate_args.golden)->required();
  evaluate->add_option("--labels", evaluate_args.labels)->capture_default_str();
  evaluate->add_option("--baseline", evaluate_args.baseline, "Baseline predictions JSONL");
  evaluate->add_option("--out", evaluate_args.out)->capture_default_str();

  FeaturesArgs features_args;
  auto* features = app.add_subcommand("features", "Extract the per-question feature table");
  add_common(features);
  features->add_option("--corpus", features_args.corpus)->capture_default_str();
  features->add_option("--labels", features_args.labels)->capture_default_str();
  features->add_option("--out", features_args.out)->capture_default_str();
  features->add_flag("--specific-intent-presence", features_args.specific_intent_presence,
                     "Add the derived specific-intent column");

  PruneArgs prune_args;
  auto* prune = app.add_subcommand("prune", "Normalize and drop redundant features");
  add_common(prune);
  prune->add_option("--features", prune_args.features)->capture_default_str();
  prune->add_option("--out", prune_args.out)->capture_default_str();
  prune->add_option("--report", prune_args.report, "Prune report JSON (default <out>.prune.json)");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Select features, evaluate and fit the resolution model");
  add_common(train);
  train->add_option("--features", train_args.features)->capture_default_str();
  train->add_option("--out", train_args.out)->capture_default_str();
  train->add_option("--strategy", train_args.strategies, "Sampling strategy (repeatable)")
      ->check(CLI::IsMember({"none", "undersample", "smote"}));
  train->add_option("--folds", train_args.folds, "Cross-validation folds (repeatable)")->check(CLI::IsMember({5, 10}));
  train->add_option("--bootstrap", train_args.bootstrap, "Bootstrap iterations (0 disables)");
  train->add_option("--sampling-order", train_args.sampling_order, "inside folds, or before the split")
      ->check(CLI::IsMember({"inside", "before"}))->capture_default_str();
  train->add_option("--baseline", train_args.baseline, "Baseline predictions JSONL");
  train->add_flag("--pooled", train_args.pooled, "Fit without the random channel intercept");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Success rates by intent and entity pair");
  add_common(analyze);
  analyze->add_option("--labels", analyze_args.labels)->capture_default_str();
  analyze->add_option("--out", analyze_args.out, "Output directory")->capture_default_str();
  analyze->add_option("--min-pair-occurrences", analyze_args.min_pair_occurrences);

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Render a markdown summary");
  add_common(report);
  report->add_option("--model", report_args.model)->capture_default_str();
  report->add_option("--analysis", report_args.analysis)->capture_default_str();
  report->add_option("--metrics", report_args.metrics);
  report->add_option("--out", report_args.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) run_synth(common, synth_args);
    if (*ingest) run_ingest(common, ingest_args);
    if (*label) return run_label(common, label_args);
    if (*evaluate) run_evaluate(common, evaluate_args);
    if (*features) run_features(common, features_args);
    if (*prune) run_prune(common, prune_args);
    if (*train) run_train(common, train_args);
    if (*analyze) run_analyze(common, analyze_args);
    if (*report) run_report(common, report_args);
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const MixedFitError& e) {
    std::cerr << "model error: " << e.what() << " (gradient norm " << e.gradient_norm() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
