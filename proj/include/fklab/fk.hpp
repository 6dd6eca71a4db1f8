#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fklab/bond_config.hpp"
#include "fklab/lattice.hpp"
#include "fklab/model.hpp"
#include "fklab/union_find.hpp"

namespace fklab {

// Frozen exterior configuration pi. Free closes every exterior bond, wired
// opens them all, mixed opens exactly the bonds whose outer endpoint lies in a
// wired slab, explicit carries pi_b for every exterior bond. Outside the
// closure bonds are open (wired) unless an explicit condition says otherwise.
class BoundaryCondition {
 public:
  enum class Kind { kFree, kWired, kMixed, kExplicit };

  Kind kind() const { return kind_; }
  std::string name() const;

  // Mixed only: Z bits per slab and the derived per-boundary-site flags.
  const std::vector<std::uint8_t>& wired_slabs() const { return wired_slabs_; }
  const std::vector<std::uint8_t>& wired_boundary() const { return wired_boundary_; }
  // Explicit only.
  const BondConfig& exterior() const { return exterior_; }
  bool wired_beyond() const { return wired_beyond_; }

  // Whether exterior bond e of `lattice` is frozen open.
  bool exterior_open(const Lattice& lattice, std::size_t e) const;

  friend BoundaryCondition free_boundary();
  friend BoundaryCondition wired_boundary();
  friend BoundaryCondition mixed_boundary(const Lattice&, const SlabPartition&, std::vector<std::uint8_t>);
  friend BoundaryCondition explicit_boundary(BondConfig, bool);

 private:
  Kind kind_ = Kind::kFree;
  std::vector<std::uint8_t> wired_slabs_;
  std::vector<std::uint8_t> wired_boundary_;
  BondConfig exterior_;
  bool wired_beyond_ = true;
};

BoundaryCondition free_boundary();
BoundaryCondition wired_boundary();
BoundaryCondition mixed_boundary(const Lattice& lattice, const SlabPartition& part, std::vector<std::uint8_t> wired_slabs);
BoundaryCondition explicit_boundary(BondConfig exterior, bool wired_beyond = true);

struct Edge {
  std::uint32_t u;
  std::uint32_t v;
};

// The graph the FK measure actually lives on. Nodes are the box sites, one
// ghost node standing for the wired component, and (for an explicit boundary
// that is not wired beyond the closure) one node per boundary site. Random
// edges carry their probability; frozen edges are permanently open.
class FkGraph {
 public:
  FkGraph(std::shared_ptr<const Lattice> lattice, const BoundaryCondition& bc, const IntensityTable& intensities);

  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }

  std::size_t num_sites() const { return num_sites_; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::uint32_t ghost() const { return static_cast<std::uint32_t>(num_sites_); }

  std::span<const Edge> random_edges() const { return random_; }
  std::span<const double> probabilities() const { return prob_; }
  std::span<const Edge> frozen_edges() const { return frozen_; }
  std::size_t num_random() const { return random_.size(); }
  // Random edges [0, num_interior) are interior bonds in canonical order;
  // any further random edges are exterior bonds (boundary-field measure).
  std::size_t num_interior() const { return lattice_->num_interior(); }
  bool exterior_random() const { return random_.size() > lattice_->num_interior(); }

  // Site flag: touches the outside of the box through some exterior bond.
  bool on_inner_boundary(std::uint32_t node) const {
    return node < num_sites_ && lattice_->on_inner_boundary(node);
  }

 private:
  std::shared_ptr<const Lattice> lattice_;
  std::size_t num_sites_ = 0;
  std::size_t num_nodes_ = 0;
  std::vector<Edge> random_;
  std::vector<double> prob_;
  std::vector<Edge> frozen_;
};

// Cluster decomposition of omega joined with the frozen boundary edges.
class ClusterPartition {
 public:
  struct BBox {
    Site lo, hi;
  };

  // Reuses internal buffers; geometry adds per-cluster bounding boxes.
  void build(const FkGraph& graph, const BondConfig& omega, bool with_geometry = false);

  std::size_t num_nodes() const { return label_.size(); }
  std::uint32_t root(std::uint32_t node) const { return label_[node]; }
  std::uint32_t ghost_root() const { return label_[ghost_]; }
  bool connected(std::uint32_t a, std::uint32_t b) const { return label_[a] == label_[b]; }
  bool connected_to_ghost(std::uint32_t node) const { return label_[node] == label_[ghost_]; }
  // The cluster of `node` reaches the ghost or an inner-boundary site.
  bool touches_boundary(std::uint32_t node) const {
    const auto r = label_[node];
    return r == label_[ghost_] || touches_[r] != 0;
  }
  // Number of box sites in the cluster of `node`.
  std::uint32_t cluster_size(std::uint32_t node) const { return sizes_[label_[node]]; }
  const BBox& bbox(std::uint32_t node) const { return bbox_[label_[node]]; }
  bool has_geometry() const { return !bbox_.empty(); }

  std::size_t finite_cluster_count() const;
  std::size_t finite_cluster_count(std::span<const std::uint32_t> sites) const;

 private:
  UnionFind uf_;
  std::uint32_t ghost_ = 0;
  std::size_t num_sites_ = 0;
  std::vector<std::uint32_t> label_;
  std::vector<std::uint32_t> sizes_;
  std::vector<std::uint8_t> touches_;
  std::vector<BBox> bbox_;
  mutable std::vector<std::uint8_t> seen_;
};

ClusterPartition build_clusters(const FkGraph& graph, const BondConfig& omega, bool with_geometry = false);

// c^pi(omega) restricted to the sites B: distinct clusters meeting B, the
// ghost cluster excluded.
std::size_t finite_cluster_count(const ClusterPartition& clusters, std::span<const std::uint32_t> sites);

struct FkWeight {
  double log_weight;
  double weight;
};

// Unnormalised prod_b (1-p_b)^(1-w_b) p_b^(w_b) * 2^(c^pi(omega)).
FkWeight fk_weight(const FkGraph& graph, const BondConfig& omega);

// Increasing (or arbitrary) event evaluated on a sampled configuration.
using Event = std::function<bool(const ClusterPartition&, const BondConfig&)>;

namespace events {
// 0 <-> ghost: the wired part of the boundary (all of it for wired).
Event origin_to_ghost(const Lattice& lattice);
// 0 <-> boundary of the box: ghost, or an inner-boundary site under free.
Event origin_to_boundary(const Lattice& lattice);
Event bond_open(std::size_t e);
Event connected(std::uint32_t a, std::uint32_t b);
}  // namespace events

// Full table of the normalised FK measure over {0,1}^(random edges).
class ExactDistribution {
 public:
  static constexpr std::size_t kMaxBonds = 24;

  explicit ExactDistribution(const FkGraph& graph);

  std::size_t num_bonds() const { return n_; }
  std::size_t num_states() const { return prob_.size(); }
  double probability(std::uint64_t state) const { return prob_[state]; }
  double log_partition() const { return log_z_; }

  double marginal(std::size_t e) const;
  double event_probability(const Event& event) const;
  // Sum of probabilities; equals one up to rounding.
  double total() const;

 private:
  const FkGraph* graph_;
  std::size_t n_;
  double log_z_ = 0.0;
  std::vector<double> prob_;
};

ExactDistribution exact_distribution(const FkGraph& graph);

}  // namespace fklab
