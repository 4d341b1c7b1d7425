#include "devchat/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace devchat::kernels {

#ifndef DEVCHAT_HAVE_AVX2_TU
namespace avx2 {
bool available() { return false; }
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double squared_distance(const double* a, const double* b, std::size_t n) {
  return scalar::squared_distance(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
void syr_upper(double alpha, const double* x, double* gram, std::size_t n) {
  scalar::syr_upper(alpha, x, gram, n);
}
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(DEVCHAT_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool scalar_forced() {
  const char* env = std::getenv("DEVCHAT_FORCE_SCALAR");
  return env != nullptr && std::string(env) != "0" && std::string(env) != "";
}

Isa initial_isa() {
  if (!scalar_forced() && cpu_has_avx2()) return Isa::Avx2;
  return Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

Isa detected_isa() { return initial_isa(); }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && !cpu_has_avx2()) {
    throw std::invalid_argument("AVX2 kernels are not available on this host");
  }
  active().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "dot");
  if (active_isa() == Isa::Avx2) return avx2::dot(a.data(), b.data(), a.size());
  return scalar::dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "squared_distance");
  if (active_isa() == Isa::Avx2) return avx2::squared_distance(a.data(), b.data(), a.size());
  return scalar::squared_distance(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), "axpy");
  if (active_isa() == Isa::Avx2) {
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  } else {
    scalar::axpy(alpha, x.data(), y.data(), x.size());
  }
}

void syr_upper(double alpha, std::span<const double> x, std::span<double> gram) {
  check_sizes(gram.size(), x.size() * x.size(), "syr_upper");
  if (active_isa() == Isa::Avx2) {
    avx2::syr_upper(alpha, x.data(), gram.data(), x.size());
  } else {
    scalar::syr_upper(alpha, x.data(), gram.data(), x.size());
  }
}

}  // namespace devchat::kernels
