#include "devchat/kernels.hpp"

namespace devchat::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void syr_upper(double alpha, const double* x, double* gram, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    const double ax = alpha * x[r];
    double* row = gram + r * n;
    for (std::size_t c = r; c < n; ++c) row[c] += ax * x[c];
  }
}

}  // namespace devchat::kernels::scalar
