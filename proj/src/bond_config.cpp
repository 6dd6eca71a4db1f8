#include "fklab/bond_config.hpp"

#include <stdexcept>

namespace fklab {

std::vector<std::uint8_t> BondConfig::to_bytes() const {
  std::vector<std::uint8_t> out((n_ + 7) / 8, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
  return out;
}

BondConfig BondConfig::from_bytes(std::span<const std::uint8_t> bytes, std::size_t n) {
  if (bytes.size() != (n + 7) / 8) throw std::invalid_argument("BondConfig::from_bytes: byte count does not match bond count");
  BondConfig c(n);
  for (std::size_t i = 0; i < bytes.size(); ++i) c.words_[i / 8] |= std::uint64_t{bytes[i]} << (8 * (i % 8));
  if ((n & 7) && (bytes.back() >> (n & 7)) != 0) throw std::invalid_argument("BondConfig::from_bytes: nonzero padding bits");
  return c;
}

}  // namespace fklab
