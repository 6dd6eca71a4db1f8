#include "fklab/site.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace fklab {

Site::Site(std::initializer_list<std::int32_t> coords) : dim(static_cast<int>(coords.size())) {
  if (coords.size() > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("Site: dimension exceeds kMaxDim");
  }
  std::copy(coords.begin(), coords.end(), c.begin());
}

Site Site::operator+(const Site& o) const {
  Site r(dim);
  for (int i = 0; i < dim; ++i) r[i] = (*this)[i] + o[i];
  return r;
}

Site Site::operator-(const Site& o) const {
  Site r(dim);
  for (int i = 0; i < dim; ++i) r[i] = (*this)[i] - o[i];
  return r;
}

Site Site::operator-() const {
  Site r(dim);
  for (int i = 0; i < dim; ++i) r[i] = -(*this)[i];
  return r;
}

std::int32_t Site::sup_norm() const {
  std::int32_t m = 0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs((*this)[i]));
  return m;
}

bool Site::is_zero() const {
  for (int i = 0; i < dim; ++i)
    if ((*this)[i] != 0) return false;
  return true;
}

std::ostream& operator<<(std::ostream& os, const Site& s) {
  os << '(';
  for (int i = 0; i < s.dim; ++i) os << (i ? "," : "") << s[i];
  return os << ')';
}

Site unit(int dim, int axis, int side) {
  Site s(dim);
  s[axis] = side;
  return s;
}

}  // namespace fklab
