#ifndef KPIVAE_RNG_HPP
#define KPIVAE_RNG_HPP

#include "kpivae/types.hpp"

#include <algorithm>
#include <cstdint>
#include <random>

namespace kpivae {

/// Derive an independent child seed from (seed, stream) by splitmix64 mixing.
/// Used to give every detection window its own stream so per-window results
/// do not depend on evaluation order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded random stream. All randomness in the library flows through one of
/// these, owned by the caller.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }

  /// Uniform integer in [0, n).
  std::uint64_t integer(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
  }

  /// Standard-normal draws, filled column-major.
  Mat normal_mat(Index rows, Index cols) {
    Mat m(rows, cols);
    for (Index c = 0; c < cols; ++c)
      for (Index r = 0; r < rows; ++r) m(r, c) = normal();
    return m;
  }

  Vec normal_vec(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  template <class It>
  void shuffle(It first, It last) {
    std::shuffle(first, last, gen_);
  }

private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace kpivae

#endif  // KPIVAE_RNG_HPP
