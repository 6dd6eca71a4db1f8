#include "fklab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fklab/lattice.hpp"

namespace fklab {

namespace {

constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2;

double clamp_probability(double p) { return std::min(p, kBelowOne); }

}  // namespace

CouplingKernel::CouplingKernel(int dim, std::vector<Entry> entries) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("CouplingKernel: dimension out of range");
  std::map<Site, double> table;
  auto put = [&](const Site& v, double J) {
    auto [it, inserted] = table.emplace(v, J);
    if (!inserted && it->second != J) {
      throw std::invalid_argument("CouplingKernel: asymmetric coupling J(v) != J(-v)");
    }
  };
  for (const auto& e : entries) {
    if (e.displacement.dim != dim) throw std::invalid_argument("CouplingKernel: displacement dimension mismatch");
    if (!(e.J >= 0.0) || !std::isfinite(e.J)) {
      throw std::invalid_argument("CouplingKernel: couplings must be ferromagnetic (J >= 0)");
    }
    if (e.displacement.is_zero()) {
      if (e.J != 0.0) throw std::invalid_argument("CouplingKernel: J(0) must be zero");
      continue;
    }
    put(e.displacement, e.J);
  }
  // Symmetrise after the explicit entries so that conflicting pairs are caught.
  std::vector<std::pair<Site, double>> mirrored;
  for (const auto& [v, J] : table) mirrored.emplace_back(-v, J);
  for (const auto& [v, J] : mirrored) put(v, J);

  for (const auto& [v, J] : table) {
    if (J <= 0.0) continue;
    support_.push_back({v, J});
    range_ = std::max(range_, static_cast<int>(v.sup_norm()));
    if (v > Site(dim)) positive_.push_back({v, J});
  }
  if (support_.empty()) throw std::invalid_argument("CouplingKernel: empty support");
}

CouplingKernel CouplingKernel::nearest_neighbor(int dim, double J) {
  if (!(J > 0.0)) throw std::invalid_argument("nearest-neighbor kernel needs J > 0");
  std::vector<Entry> entries;
  for (int a = 0; a < dim; ++a) entries.push_back({unit(dim, a, 1), J});
  return CouplingKernel(dim, std::move(entries));
}

double CouplingKernel::operator()(const Site& displacement) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), displacement,
                             [](const Entry& e, const Site& v) { return e.displacement < v; });
  if (it != support_.end() && it->displacement == displacement) return it->J;
  return 0.0;
}

bool CouplingKernel::is_nearest_neighbor() const {
  if (support_.size() != static_cast<std::size_t>(2 * dim_)) return false;
  for (const auto& e : support_) {
    int nonzero = 0;
    for (int i = 0; i < dim_; ++i) nonzero += e.displacement[i] != 0;
    if (nonzero != 1 || e.displacement.sup_norm() != 1) return false;
  }
  return true;
}

std::string CouplingKernel::describe() const {
  std::ostringstream os;
  os << "d=" << dim_ << " R=" << range_ << " {";
  bool first = true;
  for (const auto& e : positive_) {
    os << (first ? "" : " ") << e.displacement << ':' << e.J;
    first = false;
  }
  os << '}';
  return os.str();
}

double bond_intensity(double beta, double J) {
  if (!(beta >= 0.0) || !(J >= 0.0)) throw std::invalid_argument("bond_intensity: beta and J must be >= 0");
  return clamp_probability(-std::expm1(-2.0 * beta * J));
}

double boundary_intensity(double h, double J) {
  if (!(h >= 0.0) || !(J >= 0.0)) throw std::invalid_argument("boundary_intensity: h and J must be >= 0");
  return clamp_probability(-std::expm1(-2.0 * h * J));
}

double field_from_intensity(double s) {
  if (!(s >= 0.0) || !(s < 1.0)) throw std::invalid_argument("field_from_intensity: s must lie in [0, 1)");
  return -0.5 * std::log1p(-s);
}

double IntensityTable::max_exterior() const {
  double m = 0.0;
  for (double s : exterior) m = std::max(m, s);
  return m;
}

IntensityTable make_intensities(const Lattice& lattice, double beta) {
  IntensityTable t;
  t.beta = beta;
  t.interior.reserve(lattice.num_interior());
  for (const auto& b : lattice.bonds().interior) t.interior.push_back(bond_intensity(beta, b.J));
  return t;
}

IntensityTable make_intensities_with_field(const Lattice& lattice, double beta, double h) {
  IntensityTable t = make_intensities(lattice, beta);
  t.has_boundary_override = true;
  t.field = h;
  t.exterior.reserve(lattice.num_exterior());
  for (const auto& b : lattice.bonds().exterior) t.exterior.push_back(boundary_intensity(h, b.J));
  return t;
}

}  // namespace fklab
