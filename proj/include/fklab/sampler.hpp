#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fklab/estimate.hpp"
#include "fklab/fk.hpp"
#include "fklab/rng.hpp"

namespace fklab {

enum class Exec { kSerial, kParallel };

// Edwards-Sokal / Swendsen-Wang chain on an FkGraph. One sweep builds the
// clusters of omega, gives every cluster a fair spin (the ghost cluster is
// +1), then redraws every random edge: open with its probability when the
// endpoint spins agree, closed otherwise.
class SwSampler {
 public:
  SwSampler(std::shared_ptr<const FkGraph> graph, std::uint64_t seed, std::uint64_t chain, Exec exec = Exec::kParallel);

  const FkGraph& graph() const { return *graph_; }
  const BondConfig& omega() const { return omega_; }
  void set_omega(BondConfig omega);
  std::uint64_t sweep() const { return sweep_; }
  std::uint64_t key() const { return key_; }
  void restore(std::uint64_t key, std::uint64_t sweep) {
    key_ = key;
    sweep_ = sweep;
    built_ = false;
  }

  // Clusters of the current omega (rebuilt lazily).
  const ClusterPartition& clusters();
  // Spins drawn in the last resample(); +1 / -1 per node.
  std::span<const std::int8_t> spins() const { return spins_; }

  // Spin assignment and bond redraw from the current clusters.
  void resample();
  void step() {
    clusters();
    resample();
  }

 private:
  void assign_spins_serial();
  void assign_spins_parallel();
  void redraw_serial();
  void redraw_parallel();

  std::shared_ptr<const FkGraph> graph_;
  std::uint64_t key_;
  std::uint64_t sweep_ = 0;
  Exec exec_;
  BondConfig omega_;
  ClusterPartition clusters_;
  bool built_ = false;
  std::vector<std::int8_t> spins_;
};

// Snapshot handed to observables: the configuration of one sweep.
struct SweepView {
  const ClusterPartition& clusters;
  const BondConfig& omega;
};

using Observable = std::function<double(const SweepView&)>;

Observable indicator(Event event);

struct RunSpec {
  std::uint64_t sweeps = 10000;
  double burn_in = 0.2;
  std::size_t batches = 32;
  std::size_t chains = 1;
  std::uint64_t seed = 1;
  std::uint64_t chain_offset = 0;
  Exec exec = Exec::kParallel;
};

// Runs spec.chains independent chains (in parallel) and returns one Estimate
// per observable. Chains are merged in chain-id order.
std::vector<Estimate> estimate_observables(std::shared_ptr<const FkGraph> graph, const std::vector<Observable>& obs,
                                           const RunSpec& spec);

Estimate estimate_event(std::shared_ptr<const FkGraph> graph, const Event& event, const RunSpec& spec);

// Psi(Z): probability under pi^Z that the origin meets the wired slabs.
Estimate estimate_psi(std::shared_ptr<const Lattice> lattice, const SlabPartition& part,
                      const std::vector<std::uint8_t>& Z, double beta, const RunSpec& spec);

// Phi^{s,w}(0 <-> ghost) with boundary intensity s = 1 - exp(-2 h J).
Estimate sample_with_boundary_field(std::shared_ptr<const Lattice> lattice, double beta, double h, const RunSpec& spec);

// Single-bond Metropolis chain; connectivity by breadth-first search, so
// only meant for tiny graphs.
class MetropolisSampler {
 public:
  MetropolisSampler(std::shared_ptr<const FkGraph> graph, std::uint64_t seed, std::uint64_t chain);
  void step();  // one sweep of num_random() proposals
  const BondConfig& omega() const { return omega_; }

 private:
  bool joined_without(std::uint32_t e);

  std::shared_ptr<const FkGraph> graph_;
  CounterStream rng_;
  BondConfig omega_;
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> adj_;  // (node, edge or -1 frozen)
  std::vector<std::uint32_t> stack_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
};

Estimate metropolis_event(std::shared_ptr<const FkGraph> graph, const Event& event, const RunSpec& spec);

// Boundary spins for the heat-bath oracle.
struct SpinBoundary {
  enum class Kind { kFree, kPlus, kField } kind = Kind::kFree;
  double h = 0.0;  // kField: weight exp(h J sigma_i) per exterior bond
};

// Single-spin heat bath for <sigma_0>, sequential site order.
Estimate glauber_magnetization(std::shared_ptr<const Lattice> lattice, double beta, SpinBoundary boundary,
                               const RunSpec& spec);

// <sigma_0> by summing all 2^|Lambda| spin states (|Lambda| <= 24).
double exact_spin_magnetization(const Lattice& lattice, double beta, SpinBoundary boundary);

// Checkpoint: "FKLB", u16 version, u32 d, u32 N, u64 bond count, packed
// omega, u64 blob length, blob = (u64 key, u64 sweep). Little-endian.
std::vector<std::uint8_t> encode_checkpoint(const SwSampler& sampler);
void decode_checkpoint(std::span<const std::uint8_t> bytes, SwSampler& sampler);
void write_checkpoint(const std::string& path, const SwSampler& sampler);
void read_checkpoint(const std::string& path, SwSampler& sampler);

}  // namespace fklab
