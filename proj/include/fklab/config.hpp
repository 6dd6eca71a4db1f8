#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fklab/model.hpp"

namespace fklab {

// Everything an experiment run needs. Parsed from key = value text with
// [sections]; command-line flags write the same keys.
struct ExperimentConfig {
  // [model]
  int q = 2;
  int d = 2;
  std::string kernel = "nearest-neighbor";  // or "list"
  double J = 1.0;
  std::vector<CouplingKernel::Entry> couplings;  // kernel = list
  std::vector<double> betas{0.8};
  double h = -1.0;  // negative: unset
  double s = -1.0;
  std::string bc = "free";  // free | wired | mixed
  std::string pattern;      // mixed: one 0/1 char per slab

  // [geometry]
  int N = 8;
  std::vector<int> N_grid;  // theta-compare; defaults to {N}
  int L = 2;
  int K = 16;
  std::vector<int> K_grid;  // peierls; defaults to {K}
  int window = 0;           // block-grid half side W; 0 picks the smallest valid one

  // [run]
  std::uint64_t sweeps = 10000;
  double burn_in = 0.2;
  std::size_t batches = 32;
  std::size_t chains = 1;
  std::uint64_t seed = 1;
  std::uint64_t samples = 500;  // block grids / window samples
  std::uint64_t thinning = 5;
  std::uint64_t burn = 200;

  // [domination]
  std::uint64_t n_min = 1000;
  std::uint64_t field_sweeps = 20000;
  std::uint64_t coupled_draws = 20000;
  std::uint64_t psi_sweeps = 4000;
  double q_oracle = 0.5;  // coupling-demo
  double qhat_oracle = 0.3;
  std::size_t chain_length = 8;

  // [output]
  std::string out_dir = ".";

  CouplingKernel make_kernel() const;
  std::vector<int> n_values() const { return N_grid.empty() ? std::vector<int>{N} : N_grid; }
  std::vector<int> k_values() const { return K_grid.empty() ? std::vector<int>{K} : K_grid; }
  // Smallest W = K/2 mod K with two block rings beyond Lambda_(N + 3K/2).
  int default_window(int K) const;
  int window_for(int K) const { return window > 0 ? window : default_window(K); }

  // Sorted key = value lines; out_dir is excluded.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// key is "section.key" or a bare key.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
// Keys present in the text overwrite cfg; the rest is left alone.
void read_config_into(ExperimentConfig& cfg, std::istream& in);
void load_config_into(ExperimentConfig& cfg, const std::string& path);

// Which scale relations a command depends on.
struct Needs {
  bool slabs = false;
  bool blocks = false;
  bool detector = false;
};
void validate(const ExperimentConfig& cfg, Needs needs);

std::uint64_t fnv1a(const std::string& bytes);

// "0.5,0.6" or "lo:hi:step" (inclusive, step rounded onto the grid).
std::vector<double> parse_real_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

}  // namespace fklab
