#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "devchat/error.hpp"
#include "devchat/kernels.hpp"
#include "devchat/model.hpp"
#include "devchat/stats.hpp"
#include "logit_math.hpp"

namespace devchat {

namespace {

// Lower bound on log sigma^2; below it the random effect is numerically nil.
constexpr double kMinLogSigma2 = -20.0;
constexpr int kInnerIterations = 100;
constexpr int kPolishIterations = 20;

std::vector<std::string> coefficient_names(const DesignMatrix& dm) {
  std::vector<std::string> names{"(Intercept)"};
  for (std::size_t j = 0; j < dm.cols(); ++j) {
    names.push_back(dm.feature_names.empty() ? "x" + std::to_string(j) : dm.feature_names[j]);
  }
  return names;
}

// Laplace-approximated log marginal likelihood of the random-intercept
// model. Conditional modes are warm-started from the previous evaluation.
class LaplaceObjective {
 public:
  explicit LaplaceObjective(const DesignMatrix& dm) : dm_(dm), z_(with_intercept(dm.x)) {
    rows_.resize(dm.group_names.size());
    for (std::size_t i = 0; i < dm.rows(); ++i) rows_[dm.group[i]].push_back(i);
    modes_.assign(rows_.size(), 0.0);
    eta_.resize(static_cast<Eigen::Index>(dm.rows()));
  }

  std::size_t coefficients() const { return static_cast<std::size_t>(z_.cols()); }

  std::size_t populated_groups() const {
    return static_cast<std::size_t>(std::count_if(rows_.begin(), rows_.end(), [](const auto& r) { return !r.empty(); }));
  }

  const std::vector<double>& modes() const { return modes_; }

  // With `zero_effect` every group intercept is 0 and log_sigma2 is unused.
  double log_lik(const Eigen::VectorXd& beta, double log_sigma2, bool zero_effect, Eigen::VectorXd* grad_beta,
                 double* grad_tau) {
    const std::size_t p = coefficients();
    const std::span<const double> bs(beta.data(), p);
    for (std::size_t i = 0; i < dm_.rows(); ++i) eta_[static_cast<Eigen::Index>(i)] = kernels::dot(row_span(z_, i), bs);

    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    if (grad_beta != nullptr) grad_beta->setZero(static_cast<Eigen::Index>(p));
    if (grad_tau != nullptr) *grad_tau = 0.0;

    if (zero_effect) {
      std::fill(modes_.begin(), modes_.end(), 0.0);
      double total = 0.0;
      std::span<double> rs(r.data(), p);
      for (std::size_t i = 0; i < dm_.rows(); ++i) {
        const double e = eta_[static_cast<Eigen::Index>(i)];
        total += dm_.y[i] * e - softplus(e);
        kernels::axpy(dm_.y[i] - sigmoid(e), row_span(z_, i), rs);
      }
      if (grad_beta != nullptr) *grad_beta = r;
      return total;
    }

    const double inv = std::exp(-log_sigma2);
    double total = 0.0;
    for (std::size_t g = 0; g < rows_.size(); ++g) {
      const auto& rows = rows_[g];
      if (rows.empty()) continue;
      double u = solve_mode(rows, inv, modes_[g]);
      modes_[g] = u;

      double ell = 0.0, hsum = 0.0, c = 0.0;
      r.setZero();
      a.setZero();
      b.setZero();
      std::span<double> rs(r.data(), p), as(a.data(), p), bsp(b.data(), p);
      for (auto i : rows) {
        const double e = eta_[static_cast<Eigen::Index>(i)] + u;
        const double mu = sigmoid(e);
        const double w = mu * (1.0 - mu);
        ell += dm_.y[i] * e - softplus(e);
        hsum += w;
        c += w * (1.0 - 2.0 * mu);
        const auto zi = row_span(z_, i);
        kernels::axpy(dm_.y[i] - mu, zi, rs);
        kernels::axpy(w * (1.0 - 2.0 * mu), zi, as);
        kernels::axpy(w, zi, bsp);
      }
      const double h = hsum + inv;
      total += ell - 0.5 * u * u * inv - 0.5 * log_sigma2 - 0.5 * std::log(h);

      // Implicit derivatives of the mode and of the curvature h.
      if (grad_beta != nullptr) {
        const Eigen::VectorXd du_dbeta = -b / h;
        const Eigen::VectorXd dh_dbeta = a + c * du_dbeta;
        *grad_beta += r - 0.5 * dh_dbeta / h;
      }
      if (grad_tau != nullptr) {
        const double du_dtau = u * inv / h;
        const double dh_dtau = c * du_dtau - inv;
        *grad_tau += 0.5 * u * u * inv - 0.5 - 0.5 * dh_dtau / h;
      }
    }
    return total;
  }

 private:
  // Newton iteration for the mode of the group's conditional posterior.
  double solve_mode(const std::vector<std::size_t>& rows, double inv, double u) const {
    for (int it = 0; it < kInnerIterations; ++it) {
      double score = 0.0, info = inv;
      for (auto i : rows) {
        const double mu = sigmoid(eta_[static_cast<Eigen::Index>(i)] + u);
        score += dm_.y[i] - mu;
        info += mu * (1.0 - mu);
      }
      score -= u * inv;
      const double delta = std::clamp(score / info, -10.0, 10.0);
      u += delta;
      if (std::fabs(delta) < 1e-13 * (1.0 + std::fabs(u))) break;
    }
    return u;
  }

  const DesignMatrix& dm_;
  RowMatrix z_;
  std::vector<std::vector<std::size_t>> rows_;
  std::vector<double> modes_;
  Eigen::VectorXd eta_;
};

// Negative log-likelihood over theta = beta [, log sigma^2].
struct Problem {
  LaplaceObjective& objective;
  std::size_t p;
  bool free_variance;
  double fixed_log_sigma2;
  bool zero_effect;

  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    const Eigen::VectorXd beta = theta.head(static_cast<Eigen::Index>(p));
    const double tau = free_variance ? theta[static_cast<Eigen::Index>(p)] : fixed_log_sigma2;
    Eigen::VectorXd gb;
    double gt = 0.0;
    const double ll = objective.log_lik(beta, tau, zero_effect, &gb, free_variance ? &gt : nullptr);
    grad.resize(theta.size());
    grad.head(static_cast<Eigen::Index>(p)) = -gb;
    if (free_variance) grad[static_cast<Eigen::Index>(p)] = -gt;
    return -ll;
  }

  void project(Eigen::VectorXd& theta) const {
    if (free_variance) {
      auto& tau = theta[static_cast<Eigen::Index>(p)];
      tau = std::max(tau, kMinLogSigma2);
    }
  }
};

Eigen::MatrixXd numerical_hessian(const Problem& problem, const Eigen::VectorXd& theta) {
  const Eigen::Index d = theta.size();
  Eigen::MatrixXd h(d, d);
  Eigen::VectorXd gp, gm;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double step = 1e-5 * std::max(1.0, std::fabs(theta[k]));
    Eigen::VectorXd plus = theta, minus = theta;
    plus[k] += step;
    minus[k] -= step;
    problem(plus, gp);
    problem(minus, gm);
    h.col(k) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

struct OptimizeResult {
  Eigen::VectorXd theta;
  double value;
  Eigen::VectorXd grad;
  int iterations;
};

OptimizeResult minimize(const Problem& problem, Eigen::VectorXd theta, const Eigen::MatrixXd& initial_inverse,
                        const MixedOptions& options) {
  problem.project(theta);
  Eigen::VectorXd grad, trial_grad;
  double value = problem(theta, grad);
  Eigen::MatrixXd hinv = initial_inverse;
  int iteration = 0;

  for (; iteration < options.max_iterations; ++iteration) {
    if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) break;
    Eigen::VectorXd direction = -hinv * grad;
    if (grad.dot(direction) >= 0.0) {
      hinv = initial_inverse;
      direction = -hinv * grad;
    }
    const double slope = grad.dot(direction);
    double t = 1.0;
    Eigen::VectorXd trial;
    double trial_value = value;
    bool accepted = false;
    for (int backtrack = 0; backtrack < 60; ++backtrack, t *= 0.5) {
      trial = theta + t * direction;
      problem.project(trial);
      trial_value = problem(trial, trial_grad);
      if (std::isfinite(trial_value) && trial_value <= value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const Eigen::VectorXd s = trial - theta;
    const Eigen::VectorXd yv = trial_grad - grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(s.size(), s.size());
      hinv = (eye - rho * s * yv.transpose()) * hinv * (eye - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
    theta = trial;
    value = trial_value;
    grad = trial_grad;
    if (s.lpNorm<Eigen::Infinity>() < options.step_tolerance) break;
  }

  // Newton polishing with a finite-difference Hessian of the exact gradient.
  for (int k = 0; k < kPolishIterations; ++k) {
    if (grad.lpNorm<Eigen::Infinity>() < 1e-9) break;
    const Eigen::MatrixXd h = numerical_hessian(problem, theta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Eigen::VectorXd step = -ldlt.solve(grad);
    if (!step.allFinite()) break;
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_value = value;
    for (int backtrack = 0; backtrack < 30; ++backtrack, t *= 0.5) {
      trial = theta + t * step;
      problem.project(trial);
      trial_value = problem(trial, trial_grad);
      if (trial_value <= value + 1e-12 * std::fabs(value) &&
          trial_grad.lpNorm<Eigen::Infinity>() <= grad.lpNorm<Eigen::Infinity>() * (1.0 + 1e-9)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double moved = (trial - theta).lpNorm<Eigen::Infinity>();
    theta = trial;
    value = trial_value;
    grad = trial_grad;
    ++iteration;
    if (moved < 1e-12) break;
  }
  // Leave the objective's cached modes at the reported optimum.
  value = problem(theta, grad);
  return {theta, value, grad, iteration};
}

void fill_wald(MixedLogitFit& fit, const Eigen::MatrixXd& covariance) {
  const Eigen::Index p = fit.beta.size();
  fit.se.resize(p);
  fit.z.resize(p);
  fit.p.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double var = covariance.rows() > j ? covariance(j, j) : std::numeric_limits<double>::quiet_NaN();
    fit.se[j] = var > 0.0 ? std::sqrt(var) : std::numeric_limits<double>::quiet_NaN();
    fit.z[j] = fit.beta[j] / fit.se[j];
    fit.p[j] = stats::two_sided_normal_p(fit.z[j]);
  }
}

MixedLogitFit from_pooled(const DesignMatrix& dm, const LogisticFit& pooled) {
  MixedLogitFit fit;
  fit.names = pooled.names;
  fit.beta = pooled.beta;
  fit.sigma2 = 0.0;
  fit.group_names = dm.group_names;
  fit.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dm.group_names.size()));
  fit.log_lik = pooled.log_lik;
  fit.aic = 2.0 * static_cast<double>(pooled.beta.size() + 1) - 2.0 * pooled.log_lik;
  fit.iterations = pooled.iterations;
  fit.converged = pooled.converged;
  fit.boundary = true;
  fill_wald(fit, pooled.covariance);
  return fit;
}

}  // namespace

double laplace_log_likelihood(const DesignMatrix& dm, const Eigen::VectorXd& beta, double log_sigma2,
                              Eigen::VectorXd* gradient) {
  dm.validate();
  LaplaceObjective objective(dm);
  if (static_cast<std::size_t>(beta.size()) != objective.coefficients()) {
    throw ValidationError("laplace_log_likelihood: beta must have one entry per feature plus the intercept");
  }
  Eigen::VectorXd gb;
  double gt = 0.0;
  const double ll = objective.log_lik(beta, log_sigma2, false, gradient ? &gb : nullptr, gradient ? &gt : nullptr);
  if (gradient != nullptr) {
    gradient->resize(beta.size() + 1);
    gradient->head(beta.size()) = gb;
    (*gradient)[beta.size()] = gt;
  }
  return ll;
}

MixedLogitFit fit_mixed_logit(const DesignMatrix& dm, const MixedOptions& options) {
  dm.validate();
  if (dm.rows() == 0) throw ValidationError("fit_mixed_logit: no rows");
  LaplaceObjective objective(dm);
  const std::size_t p = objective.coefficients();
  const LogisticFit pooled = fit_logistic(dm);

  if (objective.populated_groups() < 2) {
    if (!options.pooled_fallback) throw ValidationError("fit_mixed_logit: at least two groups are required");
    MixedLogitFit fit = from_pooled(dm, pooled);
    fit.pooled_fallback = true;
    return fit;
  }

  const bool free_variance = !options.fixed_sigma2.has_value();
  const bool zero_effect = options.fixed_sigma2.has_value() && *options.fixed_sigma2 <= 0.0;
  if (options.fixed_sigma2 && *options.fixed_sigma2 < 0.0) {
    throw ValidationError("fit_mixed_logit: fixed variance must be non-negative");
  }
  const double fixed_tau = options.fixed_sigma2 && !zero_effect ? std::log(*options.fixed_sigma2) : 0.0;
  const Problem problem{objective, p, free_variance, fixed_tau, zero_effect};

  const Eigen::Index d = static_cast<Eigen::Index>(p + (free_variance ? 1 : 0));
  Eigen::VectorXd theta(d);
  theta.head(static_cast<Eigen::Index>(p)) = pooled.beta;
  if (free_variance) theta[d - 1] = std::log(0.5);
  Eigen::MatrixXd initial_inverse = Eigen::MatrixXd::Identity(d, d);
  initial_inverse.topLeftCorner(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) = pooled.covariance;

  const OptimizeResult opt = minimize(problem, theta, initial_inverse, options);
  const double gnorm = opt.grad.lpNorm<Eigen::Infinity>();
  const double tau = free_variance ? opt.theta[d - 1] : fixed_tau;
  const bool at_floor = free_variance && tau <= kMinLogSigma2 + 1e-9;
  const double log_lik = -opt.value;

  // The variance is at (or numerically indistinguishable from) zero.
  if (free_variance && (at_floor || pooled.log_lik >= log_lik)) {
    MixedLogitFit fit = from_pooled(dm, pooled);
    fit.iterations = opt.iterations;
    fit.gradient_norm = 0.0;
    return fit;
  }
  if (gnorm >= options.gradient_tolerance) {
    throw MixedFitError("fit_mixed_logit: no convergence after " + std::to_string(opt.iterations) +
                            " iterations (gradient max-norm " + std::to_string(gnorm) + ")",
                        opt.theta, gnorm);
  }

  MixedLogitFit fit;
  fit.names = coefficient_names(dm);
  fit.beta = opt.theta.head(static_cast<Eigen::Index>(p));
  fit.sigma2 = zero_effect ? 0.0 : std::exp(tau);
  fit.group_names = dm.group_names;
  fit.u.resize(static_cast<Eigen::Index>(dm.group_names.size()));
  for (std::size_t g = 0; g < dm.group_names.size(); ++g) fit.u[static_cast<Eigen::Index>(g)] = objective.modes()[g];
  fit.log_lik = log_lik;
  fit.aic = 2.0 * static_cast<double>(p + 1) - 2.0 * log_lik;
  fit.iterations = opt.iterations;
  fit.gradient_norm = gnorm;
  fit.converged = true;
  if (options.compute_standard_errors) {
    const Eigen::MatrixXd h = numerical_hessian(problem, opt.theta);
    const Eigen::MatrixXd cov = h.completeOrthogonalDecomposition().pseudoInverse();
    fill_wald(fit, cov);
  } else {
    fill_wald(fit, Eigen::MatrixXd());
  }
  return fit;
}

std::vector<double> predict_proba(const MixedLogitFit& fit, const DesignMatrix& dm) {
  if (static_cast<std::size_t>(fit.beta.size()) != dm.cols() + 1) {
    throw ValidationError("predict_proba: feature count does not match the fitted model");
  }
  std::unordered_map<std::string, double> intercepts;
  for (std::size_t g = 0; g < fit.group_names.size(); ++g) intercepts[fit.group_names[g]] = fit.u[static_cast<Eigen::Index>(g)];
  std::vector<double> out(dm.rows());
  const std::span<const double> slope(fit.beta.data() + 1, dm.cols());
  for (std::size_t i = 0; i < dm.rows(); ++i) {
    const auto it = intercepts.find(dm.group_names[dm.group[i]]);
    const double u = it == intercepts.end() ? 0.0 : it->second;
    out[i] = sigmoid(fit.beta[0] + kernels::dot(row_span(dm.x, i), slope) + u);
  }
  return out;
}

nlohmann::json to_json(const MixedLogitFit& fit) {
  using nlohmann::json;
  auto number = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
  json coefficients = json::array();
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    coefficients.push_back({
        {"feature", fit.names[static_cast<std::size_t>(j)]},
        {"coef", fit.beta[j]},
        {"se", number(fit.se[j])},
        {"z", number(fit.z[j])},
        {"p", number(fit.p[j])},
        {"p_display", stats::format_p_value(fit.p[j])},
        {"significance", stats::significance_stars(fit.p[j])},
        {"direction", fit.beta[j] > 0 ? "positive" : (fit.beta[j] < 0 ? "negative" : "none")},
    });
  }
  json groups = json::array();
  for (std::size_t g = 0; g < fit.group_names.size(); ++g) {
    groups.push_back({{"group", fit.group_names[g]}, {"intercept", fit.u[static_cast<Eigen::Index>(g)]}});
  }
  return {
      {"coefficients", std::move(coefficients)},
      {"random_intercept_variance", fit.sigma2},
      {"groups", std::move(groups)},
      {"log_likelihood", fit.log_lik},
      {"aic", fit.aic},
      {"iterations", fit.iterations},
      {"gradient_norm", fit.gradient_norm},
      {"converged", fit.converged},
      {"variance_at_boundary", fit.boundary},
      {"pooled_fallback", fit.pooled_fallback},
  };
}

}  // namespace devchat
