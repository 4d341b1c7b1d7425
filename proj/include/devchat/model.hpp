#pragma once

// Resolution-prediction models: pooled and random-intercept logistic
// regression, forward stepwise selection.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "devchat/features.hpp"

namespace devchat {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Rows of features (no intercept column), binary outcome and group index.
struct DesignMatrix {
  RowMatrix x;
  std::vector<int> y;                     // 1 = Resolved
  std::vector<std::size_t> group;         // index into group_names
  std::vector<std::string> group_names;
  std::vector<std::string> feature_names;
  std::vector<std::string> row_ids;
  std::vector<bool> synthetic;            // rows created by oversampling

  std::size_t rows() const { return y.size(); }
  std::size_t cols() const { return static_cast<std::size_t>(x.cols()); }

  DesignMatrix select_rows(std::span<const std::size_t> rows) const;
  DesignMatrix select_columns(std::span<const std::size_t> cols) const;
  // Throws ValidationError when sizes disagree or labels are not 0/1.
  void validate() const;
};

// Groups are channel keys, the outcome is the resolution label.
DesignMatrix design_from_table(const FeatureTable& table);

// ---------------------------------------------------------------------------
// Pooled logistic regression
// ---------------------------------------------------------------------------

struct LogisticOptions {
  double ridge = 1e-8;
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
};

struct LogisticFit {
  std::vector<std::string> names;  // "(Intercept)" then features
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::MatrixXd covariance;  // inverse of the penalized information
  double log_lik = 0.0;
  double aic = 0.0;
  int iterations = 0;
  bool converged = false;
  // Some fitted probabilities are numerically 0 or 1: the data are
  // (quasi-)separable and the coefficients are held finite by the ridge.
  bool separation = false;
};

// Newton-Raphson / IRLS on the ridge-penalized Bernoulli log-likelihood.
// The reported log-likelihood and AIC exclude the penalty.
LogisticFit fit_logistic(const DesignMatrix& dm, const LogisticOptions& options = {});

// ---------------------------------------------------------------------------
// Random-intercept logistic regression
// ---------------------------------------------------------------------------

struct MixedOptions {
  // Pins the random-intercept variance; 0 removes the random effect.
  std::optional<double> fixed_sigma2;
  // With fewer than two groups, fit the pooled model instead of failing.
  bool pooled_fallback = false;
  int max_iterations = 200;
  double step_tolerance = 1e-6;
  double gradient_tolerance = 1e-5;
  // Standard errors need a numerical Hessian; skip when only predictions
  // are wanted.
  bool compute_standard_errors = true;
};

struct MixedLogitFit {
  std::vector<std::string> names;  // "(Intercept)" then features
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  Eigen::VectorXd p;
  double sigma2 = 0.0;
  std::vector<std::string> group_names;
  Eigen::VectorXd u;  // conditional modes of the group intercepts
  double log_lik = 0.0;
  double aic = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  bool boundary = false;        // variance estimate sits at 0
  bool pooled_fallback = false;
};

class MixedFitError : public std::runtime_error {
 public:
  MixedFitError(const std::string& what, Eigen::VectorXd last, double gradient_norm)
      : std::runtime_error(what), last_(std::move(last)), gradient_norm_(gradient_norm) {}
  const Eigen::VectorXd& last_iterate() const { return last_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  Eigen::VectorXd last_;
  double gradient_norm_;
};

// Laplace-approximated marginal likelihood, maximized over (beta, log
// sigma^2) by BFGS followed by Newton polishing. Requires at least two
// groups unless `pooled_fallback` is set.
MixedLogitFit fit_mixed_logit(const DesignMatrix& dm, const MixedOptions& options = {});

// Laplace log marginal likelihood and its gradient with respect to
// (beta, log sigma^2); exposed for tests.
double laplace_log_likelihood(const DesignMatrix& dm, const Eigen::VectorXd& beta, double log_sigma2,
                              Eigen::VectorXd* gradient = nullptr);

// P(y = 1) for each row. Groups unknown to the fit get a zero intercept.
std::vector<double> predict_proba(const MixedLogitFit& fit, const DesignMatrix& dm);

nlohmann::json to_json(const MixedLogitFit& fit);

// ---------------------------------------------------------------------------
// Stepwise selection
// ---------------------------------------------------------------------------

struct StepwiseStep {
  std::optional<std::size_t> added;  // empty for the intercept-only start
  double aic;
};

struct StepwiseResult {
  std::vector<std::size_t> selected;  // in order of entry
  std::vector<StepwiseStep> trace;
};

// Forward selection on pooled-logistic AIC from the intercept-only model.
// Each step adds the candidate with the lowest AIC (lowest index on ties)
// and stops when no candidate lowers it.
StepwiseResult stepwise_select(const DesignMatrix& dm, std::span<const std::size_t> candidates,
                               const LogisticOptions& options = {});

}  // namespace devchat
