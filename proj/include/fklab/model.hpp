#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fklab/site.hpp"

namespace fklab {

// Ferromagnetic finite-range coupling J(i - j). Construction symmetrises the
// supplied entries (J(v) = J(-v)) and rejects negative or self couplings.
class CouplingKernel {
 public:
  struct Entry {
    Site displacement;
    double J;
  };

  CouplingKernel(int dim, std::vector<Entry> entries);

  static CouplingKernel nearest_neighbor(int dim, double J = 1.0);

  int dim() const { return dim_; }
  // Largest sup-norm of a displacement carrying J > 0.
  int range() const { return range_; }
  double operator()(const Site& displacement) const;

  // Every displacement with J > 0, both signs, in lexicographic order.
  std::span<const Entry> support() const { return support_; }
  // The half of the support that is lexicographically positive.
  std::span<const Entry> positive_support() const { return positive_; }

  bool is_nearest_neighbor() const;
  std::string describe() const;

 private:
  int dim_;
  int range_ = 0;
  std::vector<Entry> support_;
  std::vector<Entry> positive_;
};

// p = 1 - exp(-2 beta J), clamped strictly below one.
double bond_intensity(double beta, double J);
// s = 1 - exp(-2 h J), clamped strictly below one.
double boundary_intensity(double h, double J);
// Inverse of boundary_intensity at J = 1: h = -log(1 - s) / 2.
double field_from_intensity(double s);

class Lattice;

// Bond probabilities for the interior bonds, plus an optional override for the
// exterior bonds (which makes them random with intensity s instead of frozen).
struct IntensityTable {
  double beta = 0.0;
  std::vector<double> interior;
  bool has_boundary_override = false;
  double field = 0.0;
  std::vector<double> exterior;

  double max_exterior() const;
};

IntensityTable make_intensities(const Lattice& lattice, double beta);
IntensityTable make_intensities_with_field(const Lattice& lattice, double beta, double h);

}  // namespace fklab
