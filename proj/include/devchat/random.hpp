#pragma once

// Seeded randomness with distributions defined here rather than by the
// standard library, so that sampled values are identical across standard
// library implementations.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace devchat {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t value);

// Seed for sub-stream `stream` of a run seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();

  // Uniform integer on [0, n). n must be > 0.
  std::size_t index(std::size_t n);

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace devchat
