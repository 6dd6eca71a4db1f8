#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fklab/coarsegrain.hpp"
#include "fklab/estimate.hpp"
#include "fklab/lattice.hpp"
#include "fklab/rng.hpp"
#include "fklab/sampler.hpp"

namespace fklab {

// Geometry shared by the Z detectors: the inner box Lambda_N with its slab
// partition, and the sampled window carrying the block grid.
class DetectorSetup {
 public:
  DetectorSetup(const CouplingKernel& kernel, int N, int L, int K, int grid_half_side);

  int N() const { return N_; }
  int L() const { return part_.L; }
  int K() const { return layout_.K(); }
  int exclusion_half_side() const { return N_ + 3 * layout_.K() / 2; }
  std::size_t num_slabs() const { return part_.size(); }

  const std::shared_ptr<const Lattice>& inner() const { return inner_; }
  const std::shared_ptr<const Lattice>& window() const { return window_; }
  const SlabPartition& partition() const { return part_; }
  const BlockLayout& layout() const { return layout_; }

  // Window bonds meeting slab k, normal-path bonds, the block of y_k, and the
  // inner-box exterior bonds whose outer end lies in slab k.
  const std::vector<std::uint32_t>& slab_bonds(std::size_t k) const { return slab_bonds_[k]; }
  const std::vector<std::uint32_t>& path_bonds(std::size_t k) const { return path_bonds_[k]; }
  std::size_t y_block(std::size_t k) const { return y_block_[k]; }
  const std::vector<std::uint32_t>& exterior_bonds(std::size_t k) const { return exterior_of_slab_[k]; }
  // Largest sup-distance from a slab at which the window still holds bonds.
  int truncation_radius() const { return truncation_; }

 private:
  int N_;
  std::shared_ptr<const Lattice> inner_;
  SlabPartition part_;
  BlockLayout layout_;
  std::shared_ptr<const Lattice> window_;
  std::vector<std::vector<std::uint32_t>> slab_bonds_, path_bonds_, exterior_of_slab_;
  std::vector<std::size_t> y_block_;
  int truncation_ = 0;
};

struct ZDetail {
  bool slab_open = false;
  bool path_open = false;
  bool y_good = false;
  bool reaches_frame = false;  // Y_k
  bool X() const { return slab_open && path_open && y_good; }
  bool Z() const { return X() && reaches_frame; }
};

ZDetail detect_Z(const DetectorSetup& setup, const BondConfig& window_omega, const BlockGrid& grid, std::size_t k);
std::vector<std::uint8_t> detect_Z_all(const DetectorSetup& setup, const BondConfig& window_omega, const BlockGrid& grid);

// exterior: one flag per exterior bond of the inner box.
bool detect_Zhat(const DetectorSetup& setup, const BondConfig& exterior, std::size_t k);
std::vector<std::uint8_t> detect_Zhat_all(const DetectorSetup& setup, const BondConfig& exterior);

// Exterior part of a boundary-field sample (random edges past the interior).
BondConfig exterior_part(const FkGraph& graph, const BondConfig& omega);

BoundaryCondition build_pi_Z(const DetectorSetup& setup, const std::vector<std::uint8_t>& Z);

// Counts of Z_k given the observed prefix Z_1 .. Z_{k-1}.
class HistoryTally {
 public:
  explicit HistoryTally(std::size_t M) : by_k_(M), marginal_(M) {}
  void add(const std::vector<std::uint8_t>& z);

  struct Cell {
    std::uint64_t n = 0;
    std::uint64_t ones = 0;
  };
  std::size_t size() const { return by_k_.size(); }
  std::uint64_t samples() const { return samples_; }
  const std::map<std::string, Cell>& histories(std::size_t k) const { return by_k_[k]; }
  Cell marginal(std::size_t k) const { return marginal_[k]; }
  std::optional<Cell> find(std::size_t k, std::span<const std::uint8_t> prefix) const;

 private:
  std::vector<std::map<std::string, Cell>> by_k_;
  std::vector<Cell> marginal_;
  std::uint64_t samples_ = 0;
};

std::string history_key(std::span<const std::uint8_t> prefix);

struct AlphaReport {
  double alpha = 0.0;        // min over histories with n >= n_min
  double alpha_lower = 0.0;  // one-sided 95% lower bound at the minimiser
  std::size_t argmin_k = 0;
  std::string argmin_history;
  std::size_t histories_seen = 0;
  std::size_t histories_used = 0;  // n >= n_min
  double coverage = 0.0;  // fraction of (k, sample) pairs whose history was used
  std::vector<double> marginal;  // P(Z_k = 1), history ignored
  bool any_used() const { return histories_used > 0; }
};

AlphaReport alpha_report(const HistoryTally& tally, std::uint64_t n_min);

// Z patterns of thinned free-measure samples on the window.
struct ZSampling {
  HistoryTally tally;
  std::vector<std::vector<std::uint8_t>> patterns;  // one per sample, in order
  double good_fraction = 0.0;  // averaged over samples
  std::vector<std::uint64_t> x_counts;  // per slab: X_k = 1
};
ZSampling sample_Z(const DetectorSetup& setup, double beta, std::uint64_t samples, std::uint64_t thinning,
                   std::uint64_t burn, std::uint64_t seed, Exec exec = Exec::kParallel);

// Z-hat patterns under the boundary-field measure on the inner box, together
// with the connection probability of the origin to the ghost.
struct ZhatSampling {
  HistoryTally tally;
  Estimate origin_to_ghost;
};
ZhatSampling sample_Zhat(const DetectorSetup& setup, double beta, double s, const RunSpec& spec);

struct BoundCheck {
  double bound = 0.0;
  std::size_t checked = 0;
  std::size_t violations = 0;  // frequency above bound + 3 sigma (sigma at the bound)
  double worst_z = -INFINITY;
};

BoundCheck check_upper_bound(const HistoryTally& tally, double bound, std::uint64_t n_min);

// Probability that bit k is one given the previous bits of its own chain.
class ConditionalOracle {
 public:
  enum class Bound { kNone, kLower, kUpper };
  using Fn = std::function<double(std::size_t, std::span<const std::uint8_t>)>;

  ConditionalOracle(Fn fn, Bound kind = Bound::kNone, double bound = 0.0)
      : fn_(std::move(fn)), kind_(kind), bound_(bound) {}

  double operator()(std::size_t k, std::span<const std::uint8_t> history) const;
  std::uint64_t queries() const { return queries_; }
  std::uint64_t bound_violations() const { return violations_; }

  static ConditionalOracle constant(double q, Bound kind = Bound::kNone, double bound = 0.0);
  // Tally frequency when the history has n >= n_min, else the marginal.
  static ConditionalOracle empirical(std::shared_ptr<const HistoryTally> tally, std::uint64_t n_min,
                                     Bound kind = Bound::kNone, double bound = 0.0);

 private:
  Fn fn_;
  Bound kind_;
  double bound_;
  mutable std::uint64_t queries_ = 0;
  mutable std::uint64_t violations_ = 0;
};

struct JointSample {
  std::vector<std::uint8_t> Z;
  std::vector<std::uint8_t> Zhat;
};

struct DominationViolation : std::runtime_error {
  DominationViolation(std::size_t k, double q, double qhat);
  std::size_t k;
  double q, qhat;
};

// Recursive monotone coupling: one uniform U per step; U < qhat gives (1,1),
// qhat <= U < q gives (1,0), otherwise (0,0).
JointSample couple(const ConditionalOracle& Q, const ConditionalOracle& Qhat, std::size_t M, CounterStream& rng);

struct PreconditionFailure : std::runtime_error {
  PreconditionFailure(double alpha, double bound, const std::string& why);
  double alpha, bound;
};

struct SandwichConfig {
  double beta = 0.8;
  int N = 8, L = 2, K = 16, grid_half_side = 72;
  std::uint64_t window_samples = 4000;
  std::uint64_t thinning = 5;
  std::uint64_t window_burn = 200;
  std::uint64_t n_min = 1000;
  double s = -1.0;  // boundary intensity; negative picks alpha / (2 R L^(d-1))
  std::uint64_t field_sweeps = 20000;
  std::uint64_t coupled_draws = 20000;
  std::uint64_t psi_sweeps = 4000;
  std::uint64_t seed = 1;
  Exec exec = Exec::kParallel;
};

struct SandwichLink {
  double diff = 0.0;
  double sigma = 0.0;
  bool holds = false;  // diff >= -3 sigma
};

struct SandwichReport {
  AlphaReport alpha;
  double s = 0.0, h = 0.0, bound = 0.0;
  Estimate a, b, c;
  SandwichLink ab, bc;
  std::uint64_t coupling_steps = 0;
  std::uint64_t domination_violations = 0;
  std::uint64_t oracle_bound_violations = 0;  // q below alpha plus qhat above the bound
  std::uint64_t q_below_alpha = 0, qhat_above_bound = 0;
  std::size_t psi_patterns = 0;
  double z_frequency = 0.0, zhat_frequency = 0.0;  // over coupled draws
  std::vector<double> zhat_marginal;  // per slab, boundary-field samples
  BoundCheck zhat_check;  // at n_min, against the bound
  bool holds() const { return ab.holds && bc.holds; }
};

// Throws PreconditionFailure when alpha-hat <= R L^(d-1) s.
SandwichReport domination_chain_report(const CouplingKernel& kernel, const SandwichConfig& cfg);

}  // namespace fklab
