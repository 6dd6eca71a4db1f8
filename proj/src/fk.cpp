#include "fklab/fk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fklab {

std::string BoundaryCondition::name() const {
  switch (kind_) {
    case Kind::kFree: return "free";
    case Kind::kWired: return "wired";
    case Kind::kMixed: return "mixed";
    case Kind::kExplicit: return "explicit";
  }
  return "?";
}

bool BoundaryCondition::exterior_open(const Lattice& lattice, std::size_t e) const {
  switch (kind_) {
    case Kind::kFree: return false;
    case Kind::kWired: return true;
    case Kind::kMixed: return wired_boundary_[lattice.exterior_outer(e)] != 0;
    case Kind::kExplicit: return exterior_.test(e);
  }
  return false;
}

BoundaryCondition free_boundary() { return BoundaryCondition{}; }

BoundaryCondition wired_boundary() {
  BoundaryCondition bc;
  bc.kind_ = BoundaryCondition::Kind::kWired;
  return bc;
}

BoundaryCondition mixed_boundary(const Lattice& lattice, const SlabPartition& part, std::vector<std::uint8_t> wired_slabs) {
  if (wired_slabs.size() != part.size()) throw std::invalid_argument("mixed_boundary: pattern length differs from slab count");
  if (part.slab_of_boundary.size() != lattice.boundary().size()) {
    throw std::invalid_argument("mixed_boundary: slab partition belongs to another lattice");
  }
  BoundaryCondition bc;
  bc.kind_ = BoundaryCondition::Kind::kMixed;
  bc.wired_boundary_.resize(lattice.boundary().size());
  for (std::size_t bi = 0; bi < bc.wired_boundary_.size(); ++bi) {
    bc.wired_boundary_[bi] = wired_slabs[part.slab_of_boundary[bi]] ? 1 : 0;
  }
  bc.wired_slabs_ = std::move(wired_slabs);
  return bc;
}

BoundaryCondition explicit_boundary(BondConfig exterior, bool wired_beyond) {
  BoundaryCondition bc;
  bc.kind_ = BoundaryCondition::Kind::kExplicit;
  bc.exterior_ = std::move(exterior);
  bc.wired_beyond_ = wired_beyond;
  return bc;
}

FkGraph::FkGraph(std::shared_ptr<const Lattice> lattice, const BoundaryCondition& bc, const IntensityTable& intensities)
    : lattice_(std::move(lattice)) {
  const Lattice& lat = *lattice_;
  if (intensities.interior.size() != lat.num_interior()) {
    throw std::invalid_argument("FkGraph: intensity table does not match the lattice");
  }
  if (intensities.has_boundary_override && intensities.exterior.size() != lat.num_exterior()) {
    throw std::invalid_argument("FkGraph: boundary intensities do not match the lattice");
  }
  if (bc.kind() == BoundaryCondition::Kind::kExplicit && bc.exterior().size() != lat.num_exterior()) {
    throw std::invalid_argument("FkGraph: explicit boundary configuration has the wrong length");
  }
  num_sites_ = lat.num_sites();
  const auto ghost_node = static_cast<std::uint32_t>(num_sites_);
  const bool outer_nodes = bc.kind() == BoundaryCondition::Kind::kExplicit && !bc.wired_beyond();
  num_nodes_ = num_sites_ + 1 + (outer_nodes ? lat.boundary().size() : 0);

  random_.reserve(lat.num_interior() + (intensities.has_boundary_override ? lat.num_exterior() : 0));
  for (std::size_t e = 0; e < lat.num_interior(); ++e) {
    random_.push_back({lat.interior_u(e), lat.interior_v(e)});
    prob_.push_back(intensities.interior[e]);
  }
  auto outer_node = [&](std::size_t e) {
    return outer_nodes ? ghost_node + 1 + lat.exterior_outer(e) : ghost_node;
  };
  if (intensities.has_boundary_override) {
    // The boundary-field measure lives on the whole closure, wired beyond it.
    for (std::size_t e = 0; e < lat.num_exterior(); ++e) {
      random_.push_back({lat.exterior_inner(e), ghost_node});
      prob_.push_back(intensities.exterior[e]);
    }
  } else {
    for (std::size_t e = 0; e < lat.num_exterior(); ++e) {
      if (bc.exterior_open(lat, e)) frozen_.push_back({lat.exterior_inner(e), outer_node(e)});
    }
  }
  for (double p : prob_) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("FkGraph: bond probabilities must lie in [0, 1)");
  }
}

void ClusterPartition::build(const FkGraph& graph, const BondConfig& omega, bool with_geometry) {
  if (omega.size() != graph.num_random()) throw std::invalid_argument("build_clusters: configuration length mismatch");
  const std::size_t n = graph.num_nodes();
  num_sites_ = graph.num_sites();
  ghost_ = graph.ghost();
  uf_.reset(n);
  for (const auto& e : graph.frozen_edges()) uf_.unite(e.u, e.v);
  const auto edges = graph.random_edges();
  const auto words = omega.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t bits = words[w];
    while (bits) {
      const std::size_t e = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
      bits &= bits - 1;
      uf_.unite(edges[e].u, edges[e].v);
    }
  }
  label_.resize(n);
  sizes_.assign(n, 0);
  touches_.assign(n, 0);
  for (std::uint32_t x = 0; x < n; ++x) {
    const auto r = uf_.find(x);
    label_[x] = r;
    if (x < num_sites_) {
      ++sizes_[r];
      if (graph.on_inner_boundary(x)) touches_[r] = 1;
    } else if (x > ghost_) {
      touches_[r] = 1;
    }
  }
  bbox_.clear();
  if (with_geometry) {
    const Box& box = graph.lattice().box();
    const int d = box.dim();
    Site big(d), small(d);
    for (int a = 0; a < d; ++a) {
      big[a] = std::numeric_limits<std::int32_t>::max();
      small[a] = std::numeric_limits<std::int32_t>::min();
    }
    bbox_.assign(n, BBox{big, small});
    for (std::uint32_t x = 0; x < num_sites_; ++x) {
      const Site s = box.site_at(x);
      auto& b = bbox_[label_[x]];
      for (int a = 0; a < d; ++a) {
        b.lo[a] = std::min(b.lo[a], s[a]);
        b.hi[a] = std::max(b.hi[a], s[a]);
      }
    }
  }
}

std::size_t ClusterPartition::finite_cluster_count() const {
  // roots may be boundary nodes, so count distinct labels of box sites
  seen_.assign(label_.size(), 0);
  std::size_t c = 0;
  const auto g = label_[ghost_];
  for (std::uint32_t x = 0; x < num_sites_; ++x) {
    const auto r = label_[x];
    if (r == g || seen_[r]) continue;
    seen_[r] = 1;
    ++c;
  }
  return c;
}

std::size_t ClusterPartition::finite_cluster_count(std::span<const std::uint32_t> sites) const {
  seen_.assign(label_.size(), 0);
  std::size_t c = 0;
  const auto g = label_[ghost_];
  for (auto s : sites) {
    const auto r = label_[s];
    if (r == g || seen_[r]) continue;
    seen_[r] = 1;
    ++c;
  }
  return c;
}

ClusterPartition build_clusters(const FkGraph& graph, const BondConfig& omega, bool with_geometry) {
  ClusterPartition p;
  p.build(graph, omega, with_geometry);
  return p;
}

std::size_t finite_cluster_count(const ClusterPartition& clusters, std::span<const std::uint32_t> sites) {
  return clusters.finite_cluster_count(sites);
}

namespace {

double log_bond_factor(const FkGraph& graph, const BondConfig& omega) {
  const auto prob = graph.probabilities();
  double lw = 0.0;
  for (std::size_t e = 0; e < prob.size(); ++e) {
    lw += omega.test(e) ? std::log(prob[e]) : std::log1p(-prob[e]);
  }
  return lw;
}

}  // namespace

FkWeight fk_weight(const FkGraph& graph, const BondConfig& omega) {
  const ClusterPartition clusters = build_clusters(graph, omega);
  const double lw = log_bond_factor(graph, omega) +
                    static_cast<double>(clusters.finite_cluster_count()) * std::log(2.0);
  return {lw, std::exp(lw)};
}

namespace events {

Event origin_to_ghost(const Lattice& lattice) {
  const auto o = static_cast<std::uint32_t>(lattice.box().index_of(lattice.box().origin()));
  return [o](const ClusterPartition& c, const BondConfig&) { return c.connected_to_ghost(o); };
}

Event origin_to_boundary(const Lattice& lattice) {
  const auto o = static_cast<std::uint32_t>(lattice.box().index_of(lattice.box().origin()));
  return [o](const ClusterPartition& c, const BondConfig&) { return c.touches_boundary(o); };
}

Event bond_open(std::size_t e) {
  return [e](const ClusterPartition&, const BondConfig& w) { return w.test(e); };
}

Event connected(std::uint32_t a, std::uint32_t b) {
  return [a, b](const ClusterPartition& c, const BondConfig&) { return c.connected(a, b); };
}

}  // namespace events

ExactDistribution::ExactDistribution(const FkGraph& graph) : graph_(&graph), n_(graph.num_random()) {
  if (n_ > kMaxBonds) {
    throw std::invalid_argument("exact_distribution: " + std::to_string(n_) + " random bonds exceed the enumeration guard of " +
                                std::to_string(kMaxBonds));
  }
  const std::uint64_t states = std::uint64_t{1} << n_;
  prob_.resize(states);
  ClusterPartition clusters;
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::uint64_t s = 0; s < states; ++s) {
    const BondConfig omega = BondConfig::from_index(n_, s);
    clusters.build(graph, omega);
    prob_[s] = log_bond_factor(graph, omega) + static_cast<double>(clusters.finite_cluster_count()) * std::log(2.0);
    max_lw = std::max(max_lw, prob_[s]);
  }
  double z = 0.0;
  for (double lw : prob_) z += std::exp(lw - max_lw);
  log_z_ = max_lw + std::log(z);
  for (double& lw : prob_) lw = std::exp(lw - log_z_);
}

double ExactDistribution::marginal(std::size_t e) const {
  double m = 0.0;
  for (std::uint64_t s = 0; s < prob_.size(); ++s)
    if ((s >> e) & 1u) m += prob_[s];
  return m;
}

double ExactDistribution::event_probability(const Event& event) const {
  ClusterPartition clusters;
  double total = 0.0;
  for (std::uint64_t s = 0; s < prob_.size(); ++s) {
    if (prob_[s] == 0.0) continue;
    const BondConfig omega = BondConfig::from_index(n_, s);
    clusters.build(*graph_, omega);
    if (event(clusters, omega)) total += prob_[s];
  }
  return total;
}

double ExactDistribution::total() const {
  double t = 0.0;
  for (double p : prob_) t += p;
  return t;
}

ExactDistribution exact_distribution(const FkGraph& graph) { return ExactDistribution(graph); }

}  // namespace fklab
