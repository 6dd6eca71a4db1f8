#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <ostream>

namespace fklab {

inline constexpr int kMaxDim = 4;

// A point of Z^d (also used for displacement vectors). Unused trailing
// coordinates are kept at zero so that the defaulted ordering is the
// lexicographic order on the first `dim` coordinates.
struct Site {
  std::array<std::int32_t, kMaxDim> c{};
  int dim = 0;

  Site() = default;
  explicit Site(int d) : dim(d) {}
  Site(std::initializer_list<std::int32_t> coords);

  std::int32_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  std::int32_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  friend auto operator<=>(const Site&, const Site&) = default;
  friend bool operator==(const Site&, const Site&) = default;

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site operator-() const;

  // L-infinity norm.
  std::int32_t sup_norm() const;
  bool is_zero() const;
};

std::ostream& operator<<(std::ostream& os, const Site& s);

// Unit vector along `axis` with sign `side` (+1 / -1).
Site unit(int dim, int axis, int side = 1);

}  // namespace fklab
