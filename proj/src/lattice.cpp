#include "fklab/lattice.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace fklab {

Box::Box(int half_side, int dim) : n_(half_side), d_(dim), volume_(1) {
  if (half_side <= 0) throw std::invalid_argument("Box: N must be positive");
  if (dim <= 0 || dim > kMaxDim) throw std::invalid_argument("Box: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  for (int i = 0; i < d_; ++i) volume_ *= static_cast<std::size_t>(2 * n_);
}

bool Box::contains(const Site& s) const {
  for (int i = 0; i < d_; ++i)
    if (s[i] < lo() || s[i] > hi()) return false;
  return true;
}

std::size_t Box::index_of(const Site& s) const {
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i) idx = idx * static_cast<std::size_t>(side()) + static_cast<std::size_t>(s[i] - lo());
  return idx;
}

Site Box::site_at(std::size_t index) const {
  Site s(d_);
  for (int i = d_ - 1; i >= 0; --i) {
    s[i] = static_cast<std::int32_t>(index % static_cast<std::size_t>(side())) + lo();
    index /= static_cast<std::size_t>(side());
  }
  return s;
}

Box build_box(int half_side, int dim) { return Box(half_side, dim); }

std::vector<Bond> BondSets::closure() const {
  std::vector<Bond> all;
  all.reserve(interior.size() + exterior.size());
  all.insert(all.end(), interior.begin(), interior.end());
  all.insert(all.end(), exterior.begin(), exterior.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) all[i].index = static_cast<std::uint32_t>(i);
  return all;
}

BondSets enumerate_bonds(const Box& box, const CouplingKernel& kernel) {
  if (kernel.dim() != box.dim()) throw std::invalid_argument("enumerate_bonds: kernel and box dimensions differ");
  BondSets sets;
  for (std::size_t idx = 0; idx < box.volume(); ++idx) {
    const Site i = box.site_at(idx);
    for (const auto& e : kernel.support()) {
      const Site j = i + e.displacement;
      if (box.contains(j)) {
        if (i < j) sets.interior.push_back({i, j, e.J, 0});
      } else {
        sets.exterior.push_back({std::min(i, j), std::max(i, j), e.J, 0});
      }
    }
  }
  std::sort(sets.interior.begin(), sets.interior.end());
  std::sort(sets.exterior.begin(), sets.exterior.end());
  for (std::size_t k = 0; k < sets.interior.size(); ++k) sets.interior[k].index = static_cast<std::uint32_t>(k);
  for (std::size_t k = 0; k < sets.exterior.size(); ++k) sets.exterior[k].index = static_cast<std::uint32_t>(k);
  return sets;
}

std::vector<Site> boundary_sites(const Box& box, const CouplingKernel& kernel) {
  if (kernel.dim() != box.dim()) throw std::invalid_argument("boundary_sites: kernel and box dimensions differ");
  std::vector<Site> out;
  for (std::size_t idx = 0; idx < box.volume(); ++idx) {
    const Site i = box.site_at(idx);
    for (const auto& e : kernel.support()) {
      const Site j = i + e.displacement;
      if (!box.contains(j)) out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Lattice::Lattice(Box box, CouplingKernel kernel)
    : box_(box), kernel_(std::move(kernel)), bonds_(enumerate_bonds(box_, kernel_)),
      boundary_(boundary_sites(box_, kernel_)) {
  const std::size_t V = box_.volume();
  const std::size_t K = kernel_.positive_support().size();
  int_u_.resize(bonds_.interior.size());
  int_v_.resize(bonds_.interior.size());
  forward_.assign(V * K, -1);
  for (std::size_t e = 0; e < bonds_.interior.size(); ++e) {
    const auto& b = bonds_.interior[e];
    const std::size_t u = box_.index_of(b.a);
    int_u_[e] = static_cast<std::uint32_t>(u);
    int_v_[e] = static_cast<std::uint32_t>(box_.index_of(b.b));
    const Site disp = b.b - b.a;
    const auto pos = kernel_.positive_support();
    auto it = std::lower_bound(pos.begin(), pos.end(), disp,
                               [](const CouplingKernel::Entry& x, const Site& v) { return x.displacement < v; });
    forward_[u * K + static_cast<std::size_t>(it - pos.begin())] = static_cast<std::int32_t>(e);
  }
  inner_boundary_.assign(V, 0);
  ext_inner_.resize(bonds_.exterior.size());
  ext_outer_.resize(bonds_.exterior.size());
  for (std::size_t e = 0; e < bonds_.exterior.size(); ++e) {
    const auto& b = bonds_.exterior[e];
    const bool a_inside = box_.contains(b.a);
    const Site& inner = a_inside ? b.a : b.b;
    const Site& outer = a_inside ? b.b : b.a;
    ext_inner_[e] = static_cast<std::uint32_t>(box_.index_of(inner));
    ext_outer_[e] = *boundary_index(outer);
    inner_boundary_[ext_inner_[e]] = 1;
  }
}

std::optional<std::uint32_t> Lattice::interior_index(const Site& a, const Site& b) const {
  const Bond key{std::min(a, b), std::max(a, b), 0.0, 0};
  auto it = std::lower_bound(bonds_.interior.begin(), bonds_.interior.end(), key);
  if (it == bonds_.interior.end() || it->a != key.a || it->b != key.b) return std::nullopt;
  return it->index;
}

std::optional<std::uint32_t> Lattice::boundary_index(const Site& s) const {
  auto it = std::lower_bound(boundary_.begin(), boundary_.end(), s);
  if (it == boundary_.end() || *it != s) return std::nullopt;
  return static_cast<std::uint32_t>(it - boundary_.begin());
}

namespace {

struct FaceKey {
  int axis;
  int side;
  std::vector<int> tile;
  friend auto operator<=>(const FaceKey&, const FaceKey&) = default;
};

}  // namespace

SlabPartition slab_partition(const Lattice& lattice, int L) {
  const Box& box = lattice.box();
  const int d = box.dim();
  const int N = box.half_side();
  if (L < 1) throw std::invalid_argument("slab_partition: L must be >= 1");
  if ((2 * N) % L != 0) throw std::invalid_argument("slab_partition: L must divide 2N");

  const auto& boundary = lattice.boundary();
  std::map<FaceKey, std::vector<std::uint32_t>> face_slabs;
  std::vector<std::uint32_t> corners;
  for (std::uint32_t bi = 0; bi < boundary.size(); ++bi) {
    const Site& s = boundary[bi];
    int outside = 0, axis = -1;
    for (int a = 0; a < d; ++a) {
      if (s[a] < box.lo() || s[a] > box.hi()) {
        ++outside;
        axis = a;
      }
    }
    if (outside != 1) {
      corners.push_back(bi);
      continue;
    }
    FaceKey key{axis, s[axis] > box.hi() ? 1 : -1, {}};
    for (int a = 0; a < d; ++a)
      if (a != axis) key.tile.push_back((s[a] - box.lo()) / L);
    face_slabs[key].push_back(bi);
  }

  struct Pending {
    Site center;
    int axis, side;
    std::vector<std::uint32_t> members;
  };
  std::vector<Pending> pending;
  for (auto& [key, members] : face_slabs) {
    Site c(d);
    c[key.axis] = key.side > 0 ? N + 1 : -N;
    int t = 0;
    for (int a = 0; a < d; ++a) {
      if (a == key.axis) continue;
      c[a] = box.lo() + key.tile[static_cast<std::size_t>(t++)] * L + (L - 1) / 2;
    }
    pending.push_back({c, key.axis, key.side, members});
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& x, const Pending& y) { return x.center < y.center; });

  SlabPartition part;
  part.L = L;
  part.slab_of_boundary.assign(boundary.size(), UINT32_MAX);
  for (std::size_t k = 0; k < pending.size(); ++k)
    for (auto bi : pending[k].members) part.slab_of_boundary[bi] = static_cast<std::uint32_t>(k);

  // Sites off every face interior (only possible for R > 1) join the
  // lexicographically smallest slab holding one of their sup-norm neighbours.
  while (!corners.empty()) {
    std::vector<std::uint32_t> still;
    bool progress = false;
    for (auto bi : corners) {
      const Site& s = boundary[bi];
      std::uint32_t best = UINT32_MAX;
      for (auto nb = 0u; nb < boundary.size(); ++nb) {
        if (part.slab_of_boundary[nb] == UINT32_MAX) continue;
        if ((boundary[nb] - s).sup_norm() != 1) continue;
        best = std::min(best, part.slab_of_boundary[nb]);
      }
      if (best == UINT32_MAX) {
        still.push_back(bi);
      } else {
        part.slab_of_boundary[bi] = best;
        pending[best].members.push_back(bi);
        progress = true;
      }
    }
    if (!progress) throw std::invalid_argument("slab_partition: corner rule cannot produce a disjoint cover");
    corners = std::move(still);
  }

  for (auto& p : pending) {
    std::sort(p.members.begin(), p.members.end());
    std::vector<Site> sites;
    for (auto bi : p.members) sites.push_back(boundary[bi]);
    part.centers.push_back(p.center);
    part.slabs.push_back(std::move(sites));
    part.face_axis.push_back(p.axis);
    part.face_side.push_back(p.side);
  }
  return part;
}

}  // namespace fklab
