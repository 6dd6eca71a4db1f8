#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fklab/coarsegrain.hpp"
#include "fklab/config.hpp"
#include "fklab/domination.hpp"
#include "fklab/estimate.hpp"
#include "fklab/report.hpp"

namespace fklab {

// Boundary condition named by cfg.bc on `lattice` (mixed reads cfg.pattern).
BoundaryCondition boundary_from_config(const ExperimentConfig& cfg, const Lattice& lattice);
RunSpec run_spec(const ExperimentConfig& cfg);

// ---- exact-check
struct ExactCase {
  std::string graph, bc, observable;
  double beta = 0.0;
  double exact = 0.0;
  Estimate estimate;
  double z = 0.0;
};
struct ExactCheck {
  std::vector<ExactCase> cases;
  double max_abs_z() const;
};
// Single bond (d = 1, N = 1) and the 2x2 box (d = 2, N = 1) against full
// enumeration, for every beta and bc in {free, wired, mixed}.
ExactCheck run_exact_check(const ExperimentConfig& cfg, RunOutput* out);

// ---- theta-compare
struct ThetaPoint {
  double beta = 0.0;
  int N = 0;
  Estimate free, wired;
  double gap = 0.0, gap_se = 0.0;
};
struct ThetaCompare {
  std::vector<ThetaPoint> points;  // beta-major, N ascending
  // Gap never rises by more than 3 paired sigma along the N grid at beta.
  bool gap_nonincreasing(double beta) const;
};
ThetaCompare run_theta_compare(const ExperimentConfig& cfg, RunOutput* out);

// ---- magnetization-curve
struct MagnetizationPoint {
  double beta = 0.0;
  Estimate m;
  double diff = 0.0;         // m(beta) - m(previous beta)
  double paired_se = 0.0;    // common random numbers
  double combined_se = 0.0;  // independent-arm sigma
};
struct MagnetizationCurve {
  std::vector<MagnetizationPoint> points;
  bool monotone = true;       // no diff below -3 paired sigma
  double max_ratio = 0.0;     // max |diff| / combined sigma
};
MagnetizationCurve run_magnetization_curve(const ExperimentConfig& cfg, RunOutput* out);

// ---- fkg-suite
struct FkgComparison {
  double beta = 0.0;
  std::string upper, lower, observable;
  double diff = 0.0, se = 0.0;
  bool inversion = false;  // diff < -3 se
};
struct FkgSuite {
  std::vector<FkgComparison> comparisons;
  std::size_t inversions = 0;
};
// wired >= mixed(Z') >= mixed(Z) >= free along a nested chain of slab
// patterns, on one common seed.
FkgSuite run_fkg_suite(const ExperimentConfig& cfg, RunOutput* out);

// ---- coarse-report / peierls
struct CoarseSummary {
  double beta = 0.0;
  int K = 0, W = 0;
  std::uint64_t grids = 0;
  double good = 0.0;
  std::array<double, 4> conditions{};  // frequency of each condition over blocks
  std::uint64_t gluing_good = 0, gluing_123 = 0;
  std::uint64_t grids_with_violation = 0;
  PeierlsAccumulator::Report peierls;
  std::string last_dump;
  std::optional<ContourResult> last_contour;
};
CoarseSummary run_coarse(const ExperimentConfig& cfg, double beta, int K, Exec exec = Exec::kParallel);
std::vector<CoarseSummary> run_coarse_report(const ExperimentConfig& cfg, RunOutput* out);

struct PeierlsTrend {
  std::vector<CoarseSummary> per_K;
  double z = 0.0;             // (max_first - max_last) / combined sigma
  bool decreasing = false;    // z > 1.645
  bool comparable = false;    // both ends have a sufficient pattern
};
PeierlsTrend run_peierls(const ExperimentConfig& cfg, RunOutput* out);

// ---- domination
struct ZhatBound {
  double s = 0.0, bound = 0.0;
  BoundCheck check;
  Estimate origin_to_ghost;
};
ZhatBound run_zhat_bound(const ExperimentConfig& cfg, double s, RunOutput* out);

struct DominationResult {
  bool precondition_ok = false;
  std::string message;
  double alpha = 0.0, bound = 0.0;
  SandwichReport report;
};
SandwichConfig sandwich_config(const ExperimentConfig& cfg);
DominationResult run_domination(const ExperimentConfig& cfg, RunOutput* out);

// ---- coupling-demo
struct CouplingDemo {
  std::uint64_t draws = 0, cells_total = 0;
  std::array<std::array<std::uint64_t, 2>, 2> cells{};  // [Z][Zhat]
  double expected[2][2]{};
  double z[2][2]{};         // (freq - expected) / binomial sigma
  double gof_p_Z = 0.0;     // chi-square over chain positions
  double gof_p_Zhat = 0.0;
  std::uint64_t domination_violations = 0;
};
CouplingDemo run_coupling_demo(const ExperimentConfig& cfg, RunOutput* out);

// ---- sample
struct SampleOptions {
  bool resume = false;       // continue from the per-chain checkpoints
  bool write_checkpoints = true;
};
std::vector<Estimate> run_sample(const ExperimentConfig& cfg, const SampleOptions& opt, RunOutput* out);
std::string checkpoint_path(const ExperimentConfig& cfg, double beta, std::size_t chain);

}  // namespace fklab
