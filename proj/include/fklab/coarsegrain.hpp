#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fklab/fk.hpp"
#include "fklab/lattice.hpp"
#include "fklab/sampler.hpp"

namespace fklab {

// Throws unless K is an even perfect square with sqrt(K) >= 4 and
// floor(K^(1/2d)) >= 2.
void validate_block_size(int K, int dim);
int isqrt(int K);
// Largest m with m^(2d) <= K.
int small_block_side(int K, int dim);

// Blocks B_K(x) = x + {-K/2+1, ..., K/2}^d, x in K Z^d, tiling the grid box
// Lambda_W. W must be congruent to K/2 mod K. The sampled lattice is larger
// by sqrt(K)/2 so that the face sub-blocks of frame blocks fit.
class BlockLayout {
 public:
  BlockLayout(int dim, int K, int grid_half_side);

  int dim() const { return d_; }
  int K() const { return K_; }
  int sqrt_K() const { return sqrt_k_; }
  int small_side() const { return m_; }
  int grid_half_side() const { return W_; }
  int lattice_half_side() const { return W_ + sqrt_k_ / 2; }
  int per_axis() const { return n_; }
  std::size_t num_blocks() const { return total_; }

  std::array<int, kMaxDim> coords(std::size_t b) const;
  std::size_t index(const std::array<int, kMaxDim>& c) const;
  Site center(std::size_t b) const;
  std::optional<std::size_t> block_of(const Site& s) const;
  bool on_frame(std::size_t b) const;
  // Block meets Lambda_E = {-E+1, ..., E}^d.
  bool meets_box(std::size_t b, int E) const;
  std::vector<std::size_t> face_neighbors(std::size_t b) const;
  std::vector<std::size_t> star_neighbors(std::size_t b) const;

 private:
  int d_, K_, W_, sqrt_k_, m_, n_;
  std::size_t total_;
};

struct BlockVerdict {
  bool crossing = false;     // 1: a cluster touching every face
  bool small_others = false;  // 2: all other clusters have diameter <= sqrt(K)/10
  bool face_crossings = false;  // 3: the 2d face sub-blocks are crossed
  bool closed_bond = false;   // 4: a closed bond in the small central block
  std::int64_t representative = -1;  // window site of C*, or -1
  bool good() const { return crossing && small_others && face_crossings && closed_bond; }
  bool good_without_closed_bond() const { return crossing && small_others && face_crossings; }
};

BlockVerdict classify_block(const Lattice& window, const BondConfig& omega, const BlockLayout& layout, std::size_t b);

class BlockGrid {
 public:
  BlockGrid(BlockLayout layout, std::vector<BlockVerdict> verdicts);
  const BlockLayout& layout() const { return layout_; }
  const std::vector<BlockVerdict>& verdicts() const { return verdicts_; }
  bool good(std::size_t b) const { return u_[b] != 0; }
  const std::vector<std::uint8_t>& states() const { return u_; }
  void set_state(std::size_t b, bool good) { u_[b] = good ? 1 : 0; }
  double good_fraction() const;
  // One char per block (G / B); rows run along the first axis, columns along
  // the second. Higher dimensions print consecutive 2d slices.
  std::string dump() const;

 private:
  BlockLayout layout_;
  std::vector<BlockVerdict> verdicts_;
  std::vector<std::uint8_t> u_;
};

BlockGrid classify_grid(const Lattice& window, const BondConfig& omega, const BlockLayout& layout,
                        Exec exec = Exec::kParallel);

// Grid from explicit states (fixtures); verdicts are left empty.
BlockGrid grid_from_states(const BlockLayout& layout, const std::vector<std::uint8_t>& u);

enum class GluingScope { kGood, kConditions123 };

// Face-adjacent pairs of good blocks whose crossing clusters are not joined
// in the window.
std::size_t adjacency_gluing_check(const BlockGrid& grid, const ClusterPartition& window_clusters,
                                   GluingScope scope = GluingScope::kGood);

// Conditional frequency of a bad block given the states of its 2d face
// neighbours. Blocks with a neighbour outside the grid are skipped.
class PeierlsAccumulator {
 public:
  PeierlsAccumulator(int dim, std::size_t min_samples = 100);
  void add(const BlockGrid& grid);

  struct Pattern {
    std::uint32_t eta = 0;  // bit 2a+s: neighbour along axis a, side s, is good
    std::uint64_t n = 0;
    std::uint64_t bad = 0;
    double p = 0.0;
    double std_error = 0.0;
    double upper = 0.0;  // one-sided 95% bound
    bool sufficient = false;
  };
  struct Report {
    std::vector<Pattern> patterns;  // every observed eta, ascending
    std::uint64_t grids = 0;
    bool any_sufficient = false;
    std::size_t insufficient = 0;
    Pattern max;  // largest p among sufficient patterns
  };
  Report report() const;

 private:
  int d_;
  std::size_t min_samples_;
  std::uint64_t grids_ = 0;
  // per pattern: totals plus sums over grids for a cluster-robust variance
  struct Tally {
    std::uint64_t n = 0, bad = 0;
    double sum_b2 = 0, sum_n2 = 0, sum_bn = 0;
  };
  std::vector<Tally> tally_;
};

struct Contour {
  std::vector<std::size_t> gamma;     // bad blocks, star-connected
  std::vector<std::size_t> boundary;  // good blocks star-adjacent to gamma
};

struct ContourResult {
  bool connected_to_frame = false;
  std::vector<std::size_t> component;  // the good component of the anchor
  std::optional<Contour> contour;
};

// Blocks meeting Lambda_E are excluded (E = 0 excludes nothing); the anchor
// block itself is exempt.
ContourResult extract_contours(const BlockGrid& grid, int exclusion_half_side, std::size_t anchor);

// Face-connected path of good blocks outside Lambda_E from the anchor to the
// frame (the anchor is exempt from the exclusion but must be good).
bool good_path_to_frame(const BlockGrid& grid, int exclusion_half_side, std::size_t anchor);

bool is_star_connected(const BlockLayout& layout, const std::vector<std::size_t>& blocks);
// Face-adjacent path from `from` to the frame avoiding `blocked`.
bool reaches_frame_avoiding(const BlockLayout& layout, std::size_t from, const std::vector<std::size_t>& blocked);

}  // namespace fklab
