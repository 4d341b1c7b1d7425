#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <thread>

#include "devchat/error.hpp"
#include "devchat/evaluation.hpp"
#include "devchat/metrics.hpp"
#include "devchat/random.hpp"

namespace devchat {

namespace {

// Runs task(0..count-1) on up to `jobs` threads. The first exception is
// rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            task(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

double fit_and_score(const DesignMatrix& train, const DesignMatrix& test, const EvaluationOptions& options) {
  MixedLogitFit fit;
  if (options.mixed) {
    MixedOptions mo;
    mo.pooled_fallback = true;
    mo.compute_standard_errors = false;
    fit = fit_mixed_logit(train, mo);
  } else {
    const LogisticFit pooled = fit_logistic(train);
    fit.names = pooled.names;
    fit.beta = pooled.beta;
    fit.group_names = train.group_names;
    fit.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(train.group_names.size()));
  }
  const auto scores = predict_proba(fit, test);
  return auc(scores, test.y);
}

// Guards the evaluation side against resampled rows.
void check_no_synthetic(const DesignMatrix& test, const EvaluationOptions& options) {
  if (options.order != SamplingOrder::InsideFolds) return;
  if (std::any_of(test.synthetic.begin(), test.synthetic.end(), [](bool s) { return s; })) {
    throw std::logic_error("evaluation rows include synthetic rows");
  }
}

}  // namespace

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("stratified_folds: need at least 2 folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() < k || neg.size() < k) {
    throw ValidationError("stratified_folds: each class needs at least " + std::to_string(k) + " rows");
  }
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::size_t> fold(labels.size());
  for (std::size_t j = 0; j < pos.size(); ++j) fold[pos[j]] = j % k;
  for (std::size_t j = 0; j < neg.size(); ++j) fold[neg[j]] = (pos.size() + j) % k;
  return fold;
}

CvResult kfold_cv(const DesignMatrix& dm, std::size_t k, std::uint64_t seed, const EvaluationOptions& options) {
  dm.validate();
  SamplingTally tally;
  DesignMatrix data = dm;
  if (options.order == SamplingOrder::BeforeSplit) {
    data = apply_sampling(dm, options.strategy, options.smote_k, derive_seed(seed, 0xB5), &tally);
  }
  const auto fold = stratified_folds(data.y, k, seed);
  CvResult result;
  result.folds = k;
  result.fold_auc.assign(k, 0.0);
  std::vector<SamplingTally> tallies(k);
  parallel_for(k, options.jobs, [&](std::size_t f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < data.rows(); ++i) (fold[i] == f ? test_rows : train_rows).push_back(i);
    DesignMatrix train = data.select_rows(train_rows);
    const DesignMatrix test = data.select_rows(test_rows);
    if (options.order == SamplingOrder::InsideFolds) {
      train = apply_sampling(train, options.strategy, options.smote_k, derive_seed(seed, 1000 + f), &tallies[f]);
    }
    check_no_synthetic(test, options);
    result.fold_auc[f] = fit_and_score(train, test, options);
  });
  for (const auto& t : tallies) {
    tally.synthetic += t.synthetic;
    tally.removed += t.removed;
  }
  result.synthetic_rows = tally.synthetic;
  result.removed_rows = tally.removed;
  result.mean_auc = std::accumulate(result.fold_auc.begin(), result.fold_auc.end(), 0.0) / static_cast<double>(k);
  return result;
}

BootstrapResult bootstrap_eval(const DesignMatrix& dm, std::size_t iterations, std::uint64_t seed,
                               const EvaluationOptions& options) {
  dm.validate();
  if (iterations == 0) throw ValidationError("bootstrap_eval: need at least one iteration");
  DesignMatrix data = dm;
  if (options.order == SamplingOrder::BeforeSplit) {
    data = apply_sampling(dm, options.strategy, options.smote_k, derive_seed(seed, 0xB5));
  }
  const std::size_t n = data.rows();
  BootstrapResult result;
  result.auc.assign(iterations, 0.0);
  std::vector<std::size_t> redraws(iterations, 0);
  parallel_for(iterations, options.jobs, [&](std::size_t it) {
    Rng rng(derive_seed(seed, it));
    std::vector<std::size_t> drawn(n), oob;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw ValidationError("bootstrap_eval: cannot draw a two-class out-of-bag sample");
      std::vector<bool> in_bag(n, false);
      for (auto& d : drawn) {
        d = rng.index(n);
        in_bag[d] = true;
      }
      oob.clear();
      bool pos = false, neg = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (in_bag[i]) continue;
        oob.push_back(i);
        (data.y[i] == 1 ? pos : neg) = true;
      }
      if (pos && neg) break;
      ++redraws[it];
    }
    DesignMatrix train = data.select_rows(drawn);
    if (options.order == SamplingOrder::InsideFolds) {
      train = apply_sampling(train, options.strategy, options.smote_k, rng.next());
    }
    const DesignMatrix test = data.select_rows(oob);
    check_no_synthetic(test, options);
    result.auc[it] = fit_and_score(train, test, options);
  });
  result.redraws = std::accumulate(redraws.begin(), redraws.end(), std::size_t{0});
  result.mean_auc = std::accumulate(result.auc.begin(), result.auc.end(), 0.0) / static_cast<double>(iterations);
  return result;
}

double baseline_auc(std::span<const double> confidences, std::span<const int> labels) {
  return auc(confidences, labels);
}

nlohmann::json to_json(const CvResult& r) {
  return {{"folds", r.folds}, {"mean_auc", r.mean_auc}, {"fold_auc", r.fold_auc},
          {"synthetic_rows", r.synthetic_rows}, {"removed_rows", r.removed_rows}};
}

nlohmann::json to_json(const BootstrapResult& r) {
  return {{"iterations", r.auc.size()}, {"mean_auc", r.mean_auc}, {"auc", r.auc}, {"redraws", r.redraws}};
}

}  // namespace devchat
