#pragma once

// Class rebalancing and out-of-sample evaluation of the resolution model.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "devchat/model.hpp"

namespace devchat {

enum class SamplingStrategy { None, Undersample, Smote };

std::string_view to_string(SamplingStrategy strategy);
SamplingStrategy parse_sampling_strategy(std::string_view text);

struct SamplingTally {
  std::size_t removed = 0;     // majority rows dropped by undersampling
  std::size_t synthetic = 0;   // rows created by SMOTE
  bool k_clamped = false;      // SMOTE k reduced to minority - 1
};

// Keeps all minority rows and a random subset of majority rows of the same
// size; row order is preserved.
DesignMatrix undersample(const DesignMatrix& dm, std::uint64_t seed, SamplingTally* tally = nullptr);

// Appends synthetic minority rows x + u (x_nn - x), u ~ U(0, 1), x_nn one of
// the k Euclidean-nearest minority neighbours of x, until the classes
// balance. Synthetic rows inherit the group of x and are flagged.
// Throws ValidationError when the minority class has fewer than 2 rows.
DesignMatrix smote(const DesignMatrix& dm, std::size_t k, std::uint64_t seed, SamplingTally* tally = nullptr);

DesignMatrix apply_sampling(const DesignMatrix& dm, SamplingStrategy strategy, std::size_t smote_k,
                            std::uint64_t seed, SamplingTally* tally = nullptr);

// When the training partitions are rebalanced.
enum class SamplingOrder {
  InsideFolds,  // only training partitions are resampled
  BeforeSplit,  // the whole data set is resampled once, then split
};

struct EvaluationOptions {
  SamplingStrategy strategy = SamplingStrategy::None;
  std::size_t smote_k = 5;
  SamplingOrder order = SamplingOrder::InsideFolds;
  std::size_t jobs = 1;
  // Fit the random-intercept model; otherwise the pooled logistic model.
  bool mixed = true;
};

// Stratified fold index (0..k-1) per row.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k, std::uint64_t seed);

struct CvResult {
  std::size_t folds = 0;
  std::vector<double> fold_auc;
  double mean_auc = 0.0;
  std::size_t synthetic_rows = 0;
  std::size_t removed_rows = 0;
};

CvResult kfold_cv(const DesignMatrix& dm, std::size_t k, std::uint64_t seed, const EvaluationOptions& options);

struct BootstrapResult {
  std::vector<double> auc;
  double mean_auc = 0.0;
  std::size_t redraws = 0;  // resamples discarded for a single-class out-of-bag set
};

BootstrapResult bootstrap_eval(const DesignMatrix& dm, std::size_t iterations, std::uint64_t seed,
                               const EvaluationOptions& options);

// AUC of question-only confidence scores against the true labels.
double baseline_auc(std::span<const double> confidences, std::span<const int> labels);

nlohmann::json to_json(const CvResult& result);
nlohmann::json to_json(const BootstrapResult& result);

}  // namespace devchat
