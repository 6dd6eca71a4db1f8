#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace fklab {

// One open/closed flag per canonical bond index, packed 64 to a word.
// Bit i lives in word i / 64 at position i % 64.
class BondConfig {
 public:
  BondConfig() = default;
  explicit BondConfig(std::size_t n, bool open = false)
      : n_(n), words_((n + 63) / 64, open ? ~std::uint64_t{0} : 0) {
    trim();
  }

  std::size_t size() const { return n_; }

  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool open) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (open)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
  void fill(bool open) {
    for (auto& w : words_) w = open ? ~std::uint64_t{0} : 0;
    trim();
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  // Coordinatewise order: every bond open here is open in `other` too.
  bool is_below(const BondConfig& other) const {
    for (std::size_t k = 0; k < words_.size(); ++k)
      if (words_[k] & ~other.words_[k]) return false;
    return true;
  }

  std::span<std::uint64_t> words() { return words_; }
  std::span<const std::uint64_t> words() const { return words_; }

  // Low bits of an enumeration index become bonds 0..n-1.
  static BondConfig from_index(std::size_t n, std::uint64_t state) {
    BondConfig c(n);
    if (!c.words_.empty()) c.words_[0] = state;
    c.trim();
    return c;
  }

  // LSB-first byte stream, padded with zero bits to a byte boundary.
  std::vector<std::uint8_t> to_bytes() const;
  static BondConfig from_bytes(std::span<const std::uint8_t> bytes, std::size_t n);

  friend bool operator==(const BondConfig&, const BondConfig&) = default;

 private:
  void trim() {
    if (n_ & 63) words_.back() &= (std::uint64_t{1} << (n_ & 63)) - 1;
  }

  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace fklab
