#pragma once

#include <cstdint>

namespace fklab {

// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t chain) {
  return mix64(seed ^ mix64(chain + 0x632be59bd9b4e019ULL));
}

// Stateless draw for (key, counter). Every random decision in a sweep has its
// own counter, so results do not depend on how work is split across threads.
constexpr std::uint64_t counter_bits(std::uint64_t key, std::uint64_t counter) {
  return mix64(key ^ mix64(counter));
}

constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

constexpr double counter_uniform(std::uint64_t key, std::uint64_t counter) {
  return to_unit(counter_bits(key, counter));
}

// Counter layout inside a sweep: bond slots [0, 2^31), node slots from 2^31.
inline constexpr std::uint64_t kNodeSlot = std::uint64_t{1} << 31;

constexpr std::uint64_t sweep_counter(std::uint64_t sweep, std::uint64_t slot) { return (sweep << 32) | slot; }

// Sequential stream over the same hash, for the inherently serial samplers.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream() = default;
  CounterStream(std::uint64_t seed, std::uint64_t chain) : key_(stream_key(seed, chain)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() { return counter_bits(key_, counter_++); }
  double uniform() { return to_unit((*this)()); }
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }
  void restore(std::uint64_t key, std::uint64_t counter) {
    key_ = key;
    counter_ = counter;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace fklab
