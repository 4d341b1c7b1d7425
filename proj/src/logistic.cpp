#include <algorithm>
#include <cmath>
#include <map>

#include "devchat/error.hpp"
#include "devchat/kernels.hpp"
#include "logit_math.hpp"
#include "devchat/model.hpp"

namespace devchat {

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> rows) const {
  DesignMatrix out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.group_names = group_names;
  out.feature_names = feature_names;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = rows[k];
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(r));
    out.y.push_back(y[r]);
    out.group.push_back(group[r]);
    out.row_ids.push_back(row_ids.empty() ? std::to_string(r) : row_ids[r]);
    out.synthetic.push_back(synthetic.empty() ? false : synthetic[r]);
  }
  return out;
}

DesignMatrix DesignMatrix::select_columns(std::span<const std::size_t> cols) const {
  DesignMatrix out = *this;
  out.x.resize(x.rows(), static_cast<Eigen::Index>(cols.size()));
  out.feature_names.clear();
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.x.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(cols[k]));
    out.feature_names.push_back(feature_names.empty() ? "x" + std::to_string(cols[k]) : feature_names[cols[k]]);
  }
  return out;
}

void DesignMatrix::validate() const {
  const auto n = y.size();
  if (static_cast<std::size_t>(x.rows()) != n || group.size() != n) {
    throw ValidationError("design matrix: rows, labels and groups differ in length");
  }
  if (!row_ids.empty() && row_ids.size() != n) throw ValidationError("design matrix: row id count mismatch");
  if (!synthetic.empty() && synthetic.size() != n) throw ValidationError("design matrix: synthetic flag count mismatch");
  if (!feature_names.empty() && feature_names.size() != cols()) {
    throw ValidationError("design matrix: feature name count mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] != 0 && y[i] != 1) throw ValidationError("design matrix: labels must be 0 or 1");
    if (group[i] >= group_names.size()) throw ValidationError("design matrix: group index out of range");
  }
  if (!x.allFinite()) throw ValidationError("design matrix: non-finite feature value");
}

DesignMatrix design_from_table(const FeatureTable& table) {
  DesignMatrix dm;
  dm.feature_names = table.columns;
  dm.x.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.columns.size()));
  std::map<std::string, std::size_t> groups;
  for (const auto& row : table.rows) groups.emplace(row.channel_key, 0);
  for (auto& [name, index] : groups) {
    index = dm.group_names.size();
    dm.group_names.push_back(name);
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.values.size() != table.columns.size()) throw ValidationError("feature table: ragged row " + row.conversation_id);
    for (std::size_t j = 0; j < row.values.size(); ++j) {
      dm.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row.values[j];
    }
    dm.y.push_back(row.label == ResolutionStatus::Resolved ? 1 : 0);
    dm.group.push_back(groups.at(row.channel_key));
    dm.row_ids.push_back(row.channel_key + "/" + row.conversation_id);
    dm.synthetic.push_back(false);
  }
  dm.validate();
  return dm;
}

LogisticFit fit_logistic(const DesignMatrix& dm, const LogisticOptions& options) {
  dm.validate();
  const auto n = dm.rows();
  const auto p = dm.cols() + 1;
  if (n == 0) throw ValidationError("fit_logistic: no rows");
  const RowMatrix z = with_intercept(dm.x);

  LogisticFit fit;
  fit.names.push_back("(Intercept)");
  for (std::size_t j = 0; j < dm.cols(); ++j) {
    fit.names.push_back(dm.feature_names.empty() ? "x" + std::to_string(j) : dm.feature_names[j]);
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  Eigen::VectorXd eta(static_cast<Eigen::Index>(n));

  auto linear_predictor = [&](const Eigen::VectorXd& b, Eigen::VectorXd& out) {
    const std::span<const double> bs(b.data(), p);
    for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = kernels::dot(row_span(z, i), bs);
  };
  auto penalized = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& e) {
    return bernoulli_log_lik(dm.y, e) - 0.5 * options.ridge * b.squaredNorm();
  };

  linear_predictor(beta, eta);
  double objective = penalized(beta, eta);
  std::vector<double> gram(p * p);
  Eigen::MatrixXd hessian(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  Eigen::VectorXd gradient(static_cast<Eigen::Index>(p));

  auto assemble = [&]() {
    std::fill(gram.begin(), gram.end(), 0.0);
    gradient.setZero();
    std::span<double> grad_span(gradient.data(), p);
    for (std::size_t i = 0; i < n; ++i) {
      const double mu = sigmoid(eta[static_cast<Eigen::Index>(i)]);
      const double w = mu * (1.0 - mu);
      kernels::axpy(dm.y[i] - mu, row_span(z, i), grad_span);
      if (w > 0.0) kernels::syr_upper(w, row_span(z, i), gram);
    }
    gradient -= options.ridge * beta;
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) {
        const double v = gram[a * p + b] + (a == b ? options.ridge : 0.0);
        hessian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
        hessian(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
      }
    }
  };

  Eigen::VectorXd trial(static_cast<Eigen::Index>(p));
  Eigen::VectorXd trial_eta(static_cast<Eigen::Index>(n));
  for (fit.iterations = 0; fit.iterations < options.max_iterations; ++fit.iterations) {
    assemble();
    if (gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    Eigen::VectorXd step = hessian.ldlt().solve(gradient);
    if (!step.allFinite()) step = hessian.colPivHouseholderQr().solve(gradient);
    double t = 1.0;
    bool improved = false;
    while (t > 1e-12) {
      trial = beta + t * step;
      linear_predictor(trial, trial_eta);
      const double value = penalized(trial, trial_eta);
      if (value >= objective - 1e-12 * std::fabs(objective)) {
        beta = trial;
        eta = trial_eta;
        objective = value;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  if (!fit.converged) {
    assemble();
    fit.converged = gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance;
  }

  fit.beta = beta;
  fit.covariance = hessian.ldlt().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  fit.se = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.log_lik = bernoulli_log_lik(dm.y, eta);
  fit.aic = 2.0 * static_cast<double>(p) - 2.0 * fit.log_lik;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double mu = sigmoid(eta[i]);
    if (mu < 1e-10 || mu > 1.0 - 1e-10) {
      fit.separation = true;
      break;
    }
  }
  return fit;
}

}  // namespace devchat
