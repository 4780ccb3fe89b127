#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pragex {

// Counter-based generator: every draw is a pure function of (seed, counter),
// so the stream position can be persisted as two integers and resumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();
  // Uniform in [0, n); n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform in [0, 1).
  double uniform01();
  double normal();

  // k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Independent child stream, used to give sub-steps their own sequence.
  Rng fork(std::uint64_t salt);

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace pragex
