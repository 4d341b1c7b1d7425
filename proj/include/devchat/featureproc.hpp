#pragma once

// Column scaling and redundancy pruning for the feature matrix.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace devchat {

struct NormalizationParams {
  std::vector<double> min;
  std::vector<double> max;
};

struct Normalized {
  Eigen::MatrixXd matrix;
  NormalizationParams params;
  std::vector<std::size_t> constant_columns;
};

// (x - min) / (max - min) per column; constant columns become 0.
// Throws ValidationError for an empty matrix.
Normalized minmax_normalize(const Eigen::MatrixXd& matrix);

// Applies stored parameters, e.g. to held-out rows. Values outside the
// training range map outside [0, 1].
Eigen::MatrixXd apply_normalization(const Eigen::MatrixXd& matrix, const NormalizationParams& params);

// Average ranks (1-based) of a column, ties sharing the mean rank.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& column);

// Spearman rank correlation between every pair of columns. A constant
// column correlates 0 with every other column; the diagonal is 1.
Eigen::MatrixXd spearman_matrix(const Eigen::MatrixXd& matrix);

struct DendrogramMerge {
  std::size_t left;   // node id: < n are columns, n + i is the i-th merge
  std::size_t right;
  double distance;
  std::size_t size;
};

struct CorrelationPrune {
  std::vector<std::size_t> retained;                  // ascending column indices
  std::vector<std::vector<std::size_t>> clusters;     // flat clusters at the cutoff
  std::vector<std::pair<std::size_t, std::size_t>> dropped;  // (column, cluster id)
  std::vector<DendrogramMerge> merges;                // full dendrogram
  Eigen::MatrixXd correlation;
};

// Average-linkage clustering on 1 - |rho|, cut at `cutoff`; within each
// cluster one column is kept, chosen with a generator seeded by `seed`.
CorrelationPrune correlation_prune(const Eigen::MatrixXd& matrix, double cutoff, std::uint64_t seed);

inline constexpr double kInfiniteVif = std::numeric_limits<double>::infinity();

// 1 / (1 - R^2) of each column regressed (with intercept) on the others.
// Perfectly collinear columns report +infinity.
std::vector<double> vif(const Eigen::MatrixXd& matrix);

struct VifDrop {
  std::size_t column;
  double vif;
};

struct VifPrune {
  std::vector<std::size_t> retained;
  std::vector<VifDrop> dropped;  // in drop order
};

// Repeatedly removes the column with the largest VIF above `threshold`.
VifPrune vif_prune(const Eigen::MatrixXd& matrix, double threshold);

struct PruneOptions {
  double correlation_cutoff = 0.3;
  double vif_threshold = 10.0;
  std::uint64_t seed = 0;
};

struct PruneReport {
  std::vector<std::string> input_columns;
  std::vector<std::string> retained_columns;
  std::vector<std::string> constant_dropped;
  struct CorrelationDrop {
    std::string column;
    std::size_t cluster;
    std::vector<std::string> cluster_members;
  };
  std::vector<CorrelationDrop> correlation_dropped;
  std::vector<std::pair<std::string, double>> vif_dropped;
  std::vector<DendrogramMerge> merges;
  std::vector<std::string> merge_columns;  // leaf names for `merges`
  NormalizationParams normalization;       // for the retained columns
  PruneOptions options;
};

struct PruneResult {
  Eigen::MatrixXd matrix;  // normalized, retained columns only
  PruneReport report;
};

// Drops constant columns, normalizes, then applies correlation and VIF
// pruning in that order.
PruneResult prune_features(const Eigen::MatrixXd& matrix, std::span<const std::string> names,
                           const PruneOptions& options);

nlohmann::json to_json(const PruneReport& report);

}  // namespace devchat
