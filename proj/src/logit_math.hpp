#pragma once

// Numerically stable logistic helpers shared by the model fitting code.

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace devchat {

inline double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// log(1 + exp(eta))
inline double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

// sum_i y_i eta_i - log(1 + exp(eta_i))
inline double bernoulli_log_lik(const std::vector<int>& y, const Eigen::VectorXd& eta) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) sum += y[static_cast<std::size_t>(i)] * eta[i] - softplus(eta[i]);
  return sum;
}

template <typename Matrix>
std::span<const double> row_span(const Matrix& m, std::size_t row) {
  return {m.data() + row * static_cast<std::size_t>(m.cols()), static_cast<std::size_t>(m.cols())};
}

// [1, x] row by row.
template <typename Matrix>
Matrix with_intercept(const Matrix& x) {
  Matrix z(x.rows(), x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  return z;
}

}  // namespace devchat
