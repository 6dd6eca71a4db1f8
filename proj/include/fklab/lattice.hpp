#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fklab/model.hpp"
#include "fklab/site.hpp"

namespace fklab {

// The box {-N+1, ..., N}^d. Sites are indexed so that index order equals the
// lexicographic order of the coordinates (first axis most significant).
class Box {
 public:
  Box(int half_side, int dim);

  int half_side() const { return n_; }
  int dim() const { return d_; }
  int side() const { return 2 * n_; }
  std::size_t volume() const { return volume_; }

  bool contains(const Site& s) const;
  std::size_t index_of(const Site& s) const;
  Site site_at(std::size_t index) const;
  Site origin() const { return Site(d_); }

  int lo() const { return -n_ + 1; }
  int hi() const { return n_; }

 private:
  int n_;
  int d_;
  std::size_t volume_;
};

Box build_box(int half_side, int dim);

struct Bond {
  Site a;  // lexicographically smaller endpoint
  Site b;
  double J = 0.0;
  std::uint32_t index = 0;  // canonical index within its bond set

  friend bool operator<(const Bond& x, const Bond& y) {
    return x.a < y.a || (x.a == y.a && x.b < y.b);
  }
};

// Interior bonds (both endpoints in the box) and exterior bonds (exactly one
// endpoint in the box). Each list is sorted lexicographically on
// (min endpoint, max endpoint) and indexed in that order.
struct BondSets {
  std::vector<Bond> interior;
  std::vector<Bond> exterior;

  // Interior and exterior merged, re-sorted and re-indexed.
  std::vector<Bond> closure() const;
};

BondSets enumerate_bonds(const Box& box, const CouplingKernel& kernel);
std::vector<Site> boundary_sites(const Box& box, const CouplingKernel& kernel);

// Box, kernel and the derived index tables used by the samplers.
class Lattice {
 public:
  Lattice(Box box, CouplingKernel kernel);

  const Box& box() const { return box_; }
  const CouplingKernel& kernel() const { return kernel_; }
  const BondSets& bonds() const { return bonds_; }
  const std::vector<Site>& boundary() const { return boundary_; }

  std::size_t num_sites() const { return box_.volume(); }
  std::size_t num_interior() const { return bonds_.interior.size(); }
  std::size_t num_exterior() const { return bonds_.exterior.size(); }

  // Endpoints of interior bond e as site indices (u < v).
  std::uint32_t interior_u(std::size_t e) const { return int_u_[e]; }
  std::uint32_t interior_v(std::size_t e) const { return int_v_[e]; }
  // Exterior bond e: its site inside the box and its boundary-site index.
  std::uint32_t exterior_inner(std::size_t e) const { return ext_inner_[e]; }
  std::uint32_t exterior_outer(std::size_t e) const { return ext_outer_[e]; }

  // Interior bond joining site i to i + positive_support()[k], or -1.
  std::int32_t bond_from(std::size_t site, std::size_t k) const {
    return forward_[site * kernel_.positive_support().size() + k];
  }
  // True when the site has at least one exterior bond.
  bool on_inner_boundary(std::size_t site) const { return inner_boundary_[site] != 0; }

  std::optional<std::uint32_t> interior_index(const Site& a, const Site& b) const;
  std::optional<std::uint32_t> boundary_index(const Site& s) const;

 private:
  Box box_;
  CouplingKernel kernel_;
  BondSets bonds_;
  std::vector<Site> boundary_;
  std::vector<std::uint32_t> int_u_, int_v_;
  std::vector<std::uint32_t> ext_inner_, ext_outer_;
  std::vector<std::int32_t> forward_;
  std::vector<std::uint8_t> inner_boundary_;
};

// Tiling of the boundary by slabs T_L(x). Centers sit on the first layer
// outside a face and are ordered lexicographically; slab k is the k-th center.
struct SlabPartition {
  int L = 0;
  std::vector<Site> centers;
  std::vector<std::vector<Site>> slabs;
  std::vector<int> face_axis;  // outward normal of slab k is side * e_axis
  std::vector<int> face_side;
  std::vector<std::uint32_t> slab_of_boundary;  // indexed like Lattice::boundary()

  std::size_t size() const { return centers.size(); }
};

SlabPartition slab_partition(const Lattice& lattice, int L);

}  // namespace fklab
