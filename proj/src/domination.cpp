#include "fklab/domination.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fklab {

DetectorSetup::DetectorSetup(const CouplingKernel& kernel, int N, int L, int K, int grid_half_side)
    : N_(N),
      inner_(std::make_shared<const Lattice>(Box(N, kernel.dim()), kernel)),
      part_(slab_partition(*inner_, L)),
      layout_(kernel.dim(), K, grid_half_side) {
  const int d = kernel.dim();
  if (N % (K / 2) != 0) throw std::invalid_argument("detector: N must be a multiple of K/2");
  const int E = exclusion_half_side();
  if (grid_half_side < E + 2 * K) {
    throw std::invalid_argument("detector: window too small; the grid needs two block rings beyond Lambda_(N+3K/2) (W >= " +
                                std::to_string(E + 2 * K) + ")");
  }
  window_ = std::make_shared<const Lattice>(Box(layout_.lattice_half_side(), d), kernel);
  const Box& wbox = window_->box();
  const std::size_t M = part_.size();
  slab_bonds_.resize(M);
  path_bonds_.resize(M);
  exterior_of_slab_.resize(M);
  y_block_.resize(M);
  truncation_ = layout_.lattice_half_side() - (N + kernel.range());

  for (std::size_t k = 0; k < M; ++k) {
    auto& sb = slab_bonds_[k];
    for (const Site& s : part_.slabs[k]) {
      for (const auto& e : kernel.support()) {
        const Site j = s + e.displacement;
        if (!wbox.contains(j)) continue;
        if (auto idx = window_->interior_index(s, j)) sb.push_back(*idx);
      }
    }
    std::sort(sb.begin(), sb.end());
    sb.erase(std::unique(sb.begin(), sb.end()), sb.end());

    const Site n = unit(d, part_.face_axis[k], part_.face_side[k]);
    if (kernel(n) <= 0.0) throw std::invalid_argument("detector: the unit normal is not a bond of the kernel");
    const Site x = part_.centers[k];
    for (int i = 0; i <= 3 * K / 4; ++i) {
      Site a = x, b = x;
      for (int t = 0; t < i; ++t) a = a + n;
      b = a + n;
      auto idx = window_->interior_index(a, b);
      if (!idx) throw std::invalid_argument("detector: window too small for the normal path");
      path_bonds_[k].push_back(*idx);
    }
    Site y = x;
    for (int t = 0; t < K; ++t) y = y + n;
    auto yb = layout_.block_of(y);
    if (!yb) throw std::invalid_argument("detector: window too small; y lies outside the block grid");
    y_block_[k] = *yb;
  }
  for (std::size_t e = 0; e < inner_->num_exterior(); ++e)
    exterior_of_slab_[part_.slab_of_boundary[inner_->exterior_outer(e)]].push_back(static_cast<std::uint32_t>(e));
}

ZDetail detect_Z(const DetectorSetup& setup, const BondConfig& omega, const BlockGrid& grid, std::size_t k) {
  if (omega.size() != setup.window()->num_interior()) throw std::invalid_argument("detect_Z: configuration is not over the window");
  ZDetail z;
  z.slab_open = std::all_of(setup.slab_bonds(k).begin(), setup.slab_bonds(k).end(), [&](auto e) { return omega.test(e); });
  z.path_open = std::all_of(setup.path_bonds(k).begin(), setup.path_bonds(k).end(), [&](auto e) { return omega.test(e); });
  z.y_good = grid.good(setup.y_block(k));
  z.reaches_frame = good_path_to_frame(grid, setup.exclusion_half_side(), setup.y_block(k));
  return z;
}

std::vector<std::uint8_t> detect_Z_all(const DetectorSetup& setup, const BondConfig& omega, const BlockGrid& grid) {
  std::vector<std::uint8_t> z(setup.num_slabs());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = detect_Z(setup, omega, grid, k).Z() ? 1 : 0;
  return z;
}

bool detect_Zhat(const DetectorSetup& setup, const BondConfig& exterior, std::size_t k) {
  if (exterior.size() != setup.inner()->num_exterior()) throw std::invalid_argument("detect_Zhat: wrong exterior length");
  for (auto e : setup.exterior_bonds(k))
    if (exterior.test(e)) return true;
  return false;
}

std::vector<std::uint8_t> detect_Zhat_all(const DetectorSetup& setup, const BondConfig& exterior) {
  std::vector<std::uint8_t> z(setup.num_slabs());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = detect_Zhat(setup, exterior, k) ? 1 : 0;
  return z;
}

BondConfig exterior_part(const FkGraph& graph, const BondConfig& omega) {
  if (!graph.exterior_random()) throw std::invalid_argument("exterior_part: graph has no random exterior bonds");
  const std::size_t n0 = graph.num_interior();
  BondConfig ext(graph.num_random() - n0);
  for (std::size_t e = 0; e < ext.size(); ++e)
    if (omega.test(n0 + e)) ext.set(e, true);
  return ext;
}

BoundaryCondition build_pi_Z(const DetectorSetup& setup, const std::vector<std::uint8_t>& Z) {
  return mixed_boundary(*setup.inner(), setup.partition(), Z);
}

std::string history_key(std::span<const std::uint8_t> prefix) {
  std::string s(prefix.size(), '0');
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (prefix[i]) s[i] = '1';
  return s;
}

void HistoryTally::add(const std::vector<std::uint8_t>& z) {
  if (z.size() != by_k_.size()) throw std::invalid_argument("HistoryTally: pattern length mismatch");
  std::string key;
  for (std::size_t k = 0; k < z.size(); ++k) {
    auto& c = by_k_[k][key];
    ++c.n;
    c.ones += z[k] ? 1 : 0;
    ++marginal_[k].n;
    marginal_[k].ones += z[k] ? 1 : 0;
    key += z[k] ? '1' : '0';
  }
  ++samples_;
}

std::optional<HistoryTally::Cell> HistoryTally::find(std::size_t k, std::span<const std::uint8_t> prefix) const {
  auto it = by_k_[k].find(history_key(prefix));
  if (it == by_k_[k].end()) return std::nullopt;
  return it->second;
}

AlphaReport alpha_report(const HistoryTally& tally, std::uint64_t n_min) {
  AlphaReport r;
  r.alpha = 1.0;
  std::uint64_t used = 0;
  const HistoryTally::Cell* best = nullptr;
  for (std::size_t k = 0; k < tally.size(); ++k) {
    const auto m = tally.marginal(k);
    r.marginal.push_back(m.n ? static_cast<double>(m.ones) / static_cast<double>(m.n) : 0.0);
    for (const auto& [key, c] : tally.histories(k)) {
      ++r.histories_seen;
      if (c.n < n_min) continue;
      ++r.histories_used;
      used += c.n;
      const double f = static_cast<double>(c.ones) / static_cast<double>(c.n);
      if (best == nullptr || f < r.alpha) {
        r.alpha = f;
        r.argmin_k = k;
        r.argmin_history = key;
        best = &c;
      }
    }
  }
  if (best == nullptr) {
    r.alpha = 0.0;
    return r;
  }
  r.alpha_lower = best->ones == 0 ? 0.0
                                  : boost::math::binomial_distribution<>::find_lower_bound_on_p(
                                        static_cast<double>(best->n), static_cast<double>(best->ones), 0.05);
  const double total = static_cast<double>(tally.samples()) * static_cast<double>(tally.size());
  r.coverage = total > 0 ? static_cast<double>(used) / total : 0.0;
  return r;
}

BoundCheck check_upper_bound(const HistoryTally& tally, double bound, std::uint64_t n_min) {
  BoundCheck b;
  b.bound = bound;
  const double sd1 = std::sqrt(std::max(bound * (1.0 - bound), 0.0));
  for (std::size_t k = 0; k < tally.size(); ++k) {
    for (const auto& [key, c] : tally.histories(k)) {
      if (c.n < n_min) continue;
      ++b.checked;
      const double n = static_cast<double>(c.n);
      const double f = static_cast<double>(c.ones) / n;
      const double sigma = sd1 / std::sqrt(n);
      const double z = sigma > 0 ? (f - bound) / sigma : (f > bound ? INFINITY : 0.0);
      b.worst_z = std::max(b.worst_z, z);
      if (f > bound + 3.0 * sigma) ++b.violations;
    }
  }
  return b;
}

ZSampling sample_Z(const DetectorSetup& setup, double beta, std::uint64_t samples, std::uint64_t thinning,
                   std::uint64_t burn, std::uint64_t seed, Exec exec) {
  if (thinning == 0) throw std::invalid_argument("sample_Z: thinning must be positive");
  auto graph = std::make_shared<const FkGraph>(setup.window(), free_boundary(), make_intensities(*setup.window(), beta));
  SwSampler s(graph, seed, 0, exec);
  for (std::uint64_t t = 0; t < burn; ++t) s.step();
  ZSampling out{HistoryTally(setup.num_slabs()), {}, 0.0, std::vector<std::uint64_t>(setup.num_slabs(), 0)};
  out.patterns.reserve(samples);
  for (std::uint64_t i = 0; i < samples; ++i) {
    for (std::uint64_t t = 0; t < thinning; ++t) s.step();
    const BlockGrid grid = classify_grid(*setup.window(), s.omega(), setup.layout(), exec);
    out.good_fraction += grid.good_fraction();
    std::vector<std::uint8_t> z(setup.num_slabs());
    for (std::size_t k = 0; k < z.size(); ++k) {
      const ZDetail det = detect_Z(setup, s.omega(), grid, k);
      z[k] = det.Z() ? 1 : 0;
      out.x_counts[k] += det.X() ? 1 : 0;
    }
    out.tally.add(z);
    out.patterns.push_back(std::move(z));
  }
  if (samples) out.good_fraction /= static_cast<double>(samples);
  return out;
}

ZhatSampling sample_Zhat(const DetectorSetup& setup, double beta, double s, const RunSpec& spec) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("sample_Zhat: boundary intensity must lie in (0, 1)");
  double jmax = 0.0;
  for (const auto& b : setup.inner()->bonds().exterior) jmax = std::max(jmax, b.J);
  const double h = field_from_intensity(s) / jmax;
  auto graph = std::make_shared<const FkGraph>(setup.inner(), wired_boundary(), make_intensities_with_field(*setup.inner(), beta, h));
  const auto origin = static_cast<std::uint32_t>(setup.inner()->box().index_of(setup.inner()->box().origin()));
  ZhatSampling out{HistoryTally(setup.num_slabs()), {}};
  auto tally = std::make_shared<HistoryTally>(setup.num_slabs());
  std::vector<Observable> obs{[&](const SweepView& v) {
    tally->add(detect_Zhat_all(setup, exterior_part(*graph, v.omega)));
    return v.clusters.connected_to_ghost(origin) ? 1.0 : 0.0;
  }};
  RunSpec one = spec;
  one.chains = 1;  // the tally is shared by the observable
  out.origin_to_ghost = estimate_observables(graph, obs, one).front();
  out.tally = std::move(*tally);
  return out;
}

double ConditionalOracle::operator()(std::size_t k, std::span<const std::uint8_t> history) const {
  const double q = fn_(k, history);
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("ConditionalOracle: probability outside [0, 1]");
  ++queries_;
  if ((kind_ == Bound::kLower && q < bound_) || (kind_ == Bound::kUpper && q > bound_)) ++violations_;
  return q;
}

ConditionalOracle ConditionalOracle::constant(double q, Bound kind, double bound) {
  return ConditionalOracle([q](std::size_t, std::span<const std::uint8_t>) { return q; }, kind, bound);
}

ConditionalOracle ConditionalOracle::empirical(std::shared_ptr<const HistoryTally> tally, std::uint64_t n_min, Bound kind,
                                               double bound) {
  return ConditionalOracle(
      [tally = std::move(tally), n_min](std::size_t k, std::span<const std::uint8_t> h) {
        if (auto c = tally->find(k, h); c && c->n >= n_min) return static_cast<double>(c->ones) / static_cast<double>(c->n);
        const auto m = tally->marginal(k);
        return m.n ? static_cast<double>(m.ones) / static_cast<double>(m.n) : 0.0;
      },
      kind, bound);
}

namespace {

std::string violation_text(std::size_t k, double q, double qhat) {
  std::ostringstream os;
  os << "coupling: domination fails at step " << k << " (q = " << q << " < qhat = " << qhat << ")";
  return os.str();
}

}  // namespace

DominationViolation::DominationViolation(std::size_t k_, double q_, double qhat_)
    : std::runtime_error(violation_text(k_, q_, qhat_)), k(k_), q(q_), qhat(qhat_) {}

PreconditionFailure::PreconditionFailure(double a, double b, const std::string& why)
    : std::runtime_error(why), alpha(a), bound(b) {}

JointSample couple(const ConditionalOracle& Q, const ConditionalOracle& Qhat, std::size_t M, CounterStream& rng) {
  JointSample js;
  js.Z.reserve(M);
  js.Zhat.reserve(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double q = Q(k, js.Z);
    const double qh = Qhat(k, js.Zhat);
    if (q < qh) throw DominationViolation(k, q, qh);
    const double u = rng.uniform();
    js.Z.push_back(u < q ? 1 : 0);
    js.Zhat.push_back(u < qh ? 1 : 0);
  }
  return js;
}

namespace {

// Psi estimates cached per pattern; all patterns share one seed.
class PsiCache {
 public:
  PsiCache(const DetectorSetup& setup, double beta, RunSpec spec) : setup_(setup), beta_(beta), spec_(spec) {}

  const Estimate& operator()(const std::vector<std::uint8_t>& Z) {
    const std::string key = history_key(Z);
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, estimate_psi(setup_.inner(), setup_.partition(), Z, beta_, spec_)).first;
    return it->second;
  }
  std::size_t size() const { return cache_.size(); }

 private:
  const DetectorSetup& setup_;
  double beta_;
  RunSpec spec_;
  std::map<std::string, Estimate> cache_;
};

// Mean of Psi over a list of patterns: batch-means error over the list plus
// the (fully correlated) error of the Psi estimates themselves.
Estimate average_psi(PsiCache& psi, const std::vector<std::vector<std::uint8_t>>& patterns, std::size_t batches) {
  BatchAccumulator acc(patterns.size(), batches);
  std::map<std::string, std::pair<std::uint64_t, double>> used;
  std::uint64_t counted = 0;
  for (const auto& z : patterns) {
    if (acc.batch_means().size() == acc.batches()) break;
    const Estimate& e = psi(z);
    acc.add(e.mean);
    auto& u = used[history_key(z)];
    ++u.first;
    u.second = e.std_error;
    ++counted;
  }
  std::vector<BatchAccumulator> one{acc};
  Estimate out = finalize(one);
  double inner = 0.0;
  for (const auto& [key, u] : used) inner += static_cast<double>(u.first) / static_cast<double>(counted) * u.second;
  out.std_error = std::sqrt(out.std_error * out.std_error + inner * inner);
  return out;
}

SandwichLink link(const Estimate& hi, const Estimate& lo) {
  SandwichLink l;
  l.diff = hi.mean - lo.mean;
  l.sigma = combined_stderr(hi, lo);
  l.holds = l.diff >= -3.0 * l.sigma;
  return l;
}

}  // namespace

SandwichReport domination_chain_report(const CouplingKernel& kernel, const SandwichConfig& cfg) {
  const DetectorSetup setup(kernel, cfg.N, cfg.L, cfg.K, cfg.grid_half_side);
  const int d = kernel.dim();
  const double RLd = static_cast<double>(kernel.range()) * std::pow(static_cast<double>(cfg.L), d - 1);
  SandwichReport rep;

  ZSampling zs = sample_Z(setup, cfg.beta, cfg.window_samples, cfg.thinning, cfg.window_burn, cfg.seed, cfg.exec);
  rep.alpha = alpha_report(zs.tally, cfg.n_min);
  rep.s = cfg.s >= 0.0 ? cfg.s : rep.alpha.alpha / (2.0 * RLd);
  rep.bound = RLd * rep.s;
  if (!rep.alpha.any_used()) {
    throw PreconditionFailure(0.0, rep.bound, "precondition: no Z history reached the coverage threshold n_min");
  }
  if (!(rep.alpha.alpha > rep.bound) || !(rep.s > 0.0)) {
    std::ostringstream os;
    os << "precondition: alpha-hat = " << rep.alpha.alpha << " does not exceed R L^(d-1) s_h = " << rep.bound;
    throw PreconditionFailure(rep.alpha.alpha, rep.bound, os.str());
  }
  double jmax = 0.0;
  for (const auto& b : setup.inner()->bonds().exterior) jmax = std::max(jmax, b.J);
  rep.h = field_from_intensity(rep.s) / jmax;

  RunSpec field;
  field.sweeps = cfg.field_sweeps;
  field.seed = cfg.seed;
  field.chain_offset = 1;
  field.exec = cfg.exec;
  ZhatSampling zh = sample_Zhat(setup, cfg.beta, rep.s, field);
  rep.c = zh.origin_to_ghost;
  for (std::size_t k = 0; k < zh.tally.size(); ++k) {
    const auto m = zh.tally.marginal(k);
    rep.zhat_marginal.push_back(m.n ? static_cast<double>(m.ones) / static_cast<double>(m.n) : 0.0);
  }
  rep.zhat_check = check_upper_bound(zh.tally, rep.bound, cfg.n_min);

  auto qt = std::make_shared<const HistoryTally>(std::move(zs.tally));
  auto qht = std::make_shared<const HistoryTally>(std::move(zh.tally));
  const ConditionalOracle Q = ConditionalOracle::empirical(qt, cfg.n_min, ConditionalOracle::Bound::kLower, rep.alpha.alpha);
  const ConditionalOracle Qhat = ConditionalOracle::empirical(qht, cfg.n_min, ConditionalOracle::Bound::kUpper, rep.bound);

  CounterStream rng(cfg.seed, 2);
  std::vector<std::vector<std::uint8_t>> zhat_draws;
  zhat_draws.reserve(cfg.coupled_draws);
  std::uint64_t ones = 0, zhat_ones = 0;
  for (std::uint64_t i = 0; i < cfg.coupled_draws; ++i) {
    try {
      JointSample js = couple(Q, Qhat, setup.num_slabs(), rng);
      for (std::size_t k = 0; k < js.Z.size(); ++k) {
        ones += js.Z[k];
        zhat_ones += js.Zhat[k];
      }
      zhat_draws.push_back(std::move(js.Zhat));
    } catch (const DominationViolation&) {
      ++rep.domination_violations;
    }
  }
  rep.coupling_steps = Q.queries();
  rep.q_below_alpha = Q.bound_violations();
  rep.qhat_above_bound = Qhat.bound_violations();
  rep.oracle_bound_violations = rep.q_below_alpha + rep.qhat_above_bound;
  const double cells = static_cast<double>(zhat_draws.size() * setup.num_slabs());
  rep.z_frequency = cells > 0 ? static_cast<double>(ones) / cells : 0.0;
  rep.zhat_frequency = cells > 0 ? static_cast<double>(zhat_ones) / cells : 0.0;

  RunSpec psi_spec;
  psi_spec.sweeps = cfg.psi_sweeps;
  psi_spec.seed = cfg.seed;
  psi_spec.chain_offset = 3;
  psi_spec.exec = cfg.exec;
  PsiCache psi(setup, cfg.beta, psi_spec);
  rep.a = average_psi(psi, zs.patterns, 32);
  if (zhat_draws.size() < 32) throw std::runtime_error("domination report: too few coupled draws survived");
  rep.b = average_psi(psi, zhat_draws, 32);
  rep.psi_patterns = psi.size();
  rep.ab = link(rep.a, rep.b);
  rep.bc = link(rep.b, rep.c);
  return rep;
}

}  // namespace fklab
