#include "fklab/experiments.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "fklab/sampler.hpp"

namespace fklab {

namespace {

using nlohmann::json;

double z_score(const Estimate& e, double target) {
  const double d = e.mean - target;
  if (e.std_error > 0.0) return d / e.std_error;
  return std::abs(d) <= 1e-12 ? 0.0 : std::copysign(INFINITY, d);
}

std::vector<std::uint8_t> pattern_bits(const std::string& text, std::size_t M) {
  if (text.size() != M)
    throw ConfigError("config: pattern has " + std::to_string(text.size()) + " slab bits, the partition has " +
                      std::to_string(M) + " slabs");
  std::vector<std::uint8_t> z(M);
  for (std::size_t k = 0; k < M; ++k) {
    if (text[k] != '0' && text[k] != '1') throw ConfigError("config: pattern must consist of 0 and 1");
    z[k] = text[k] == '1';
  }
  return z;
}

std::string bits_text(const std::vector<std::uint8_t>& z) {
  std::string s;
  for (auto b : z) s += b ? '1' : '0';
  return s;
}

CsvRow base_row(const ExperimentConfig& cfg, double beta, int N, const std::string& bc) {
  CsvRow r;
  r.beta = beta;
  r.h = cfg.h > 0 ? cfg.h : 0.0;
  r.N = N;
  r.L = cfg.L;
  r.K = cfg.K;
  r.bc = bc;
  r.seed = cfg.seed;
  return r;
}

void emit(RunOutput* out, CsvRow r, const std::string& observable, const Estimate& e) {
  if (!out) return;
  r.observable = observable;
  r.mean = e.mean;
  r.std_error = e.std_error;
  r.n_samples = e.n_samples;
  out->row(r);
}

json estimate_json(const Estimate& e) {
  return json{{"mean", e.mean}, {"stderr", e.std_error}, {"n_samples", e.n_samples}, {"n_eff", e.n_eff}};
}

// Exterior coupling used to turn h into s.
double max_exterior_J(const Lattice& lattice) {
  double j = 0.0;
  for (const auto& b : lattice.bonds().exterior) j = std::max(j, b.J);
  return j;
}

}  // namespace

BoundaryCondition boundary_from_config(const ExperimentConfig& cfg, const Lattice& lattice) {
  if (cfg.bc == "free") return free_boundary();
  if (cfg.bc == "wired") return wired_boundary();
  if (cfg.bc == "mixed") {
    const SlabPartition part = slab_partition(lattice, cfg.L);
    return mixed_boundary(lattice, part, pattern_bits(cfg.pattern, part.size()));
  }
  throw ConfigError("config: bc must be free, wired or mixed");
}

RunSpec run_spec(const ExperimentConfig& cfg) {
  RunSpec s;
  s.sweeps = cfg.sweeps;
  s.burn_in = cfg.burn_in;
  s.batches = cfg.batches;
  s.chains = cfg.chains;
  s.seed = cfg.seed;
  return s;
}

// ---------------------------------------------------------------- exact-check

double ExactCheck::max_abs_z() const {
  double m = 0.0;
  for (const auto& c : cases) m = std::max(m, std::abs(c.z));
  return m;
}

ExactCheck run_exact_check(const ExperimentConfig& cfg, RunOutput* out) {
  struct Graph {
    std::string name;
    int d;
    std::vector<std::uint8_t> mixed;
  };
  // L = 1: two slabs on the bond, eight around the 2x2 box.
  const std::vector<Graph> graphs{{"single-bond", 1, {1, 0}}, {"box2", 2, {1, 0, 1, 0, 1, 0, 1, 0}}};
  ExactCheck res;
  if (out) out->seed(cfg.seed);
  for (const auto& g : graphs) {
    auto lattice = std::make_shared<const Lattice>(Box(1, g.d), CouplingKernel::nearest_neighbor(g.d, cfg.J));
    const SlabPartition part = slab_partition(*lattice, 1);
    for (double beta : cfg.betas) {
      for (const std::string bc_name : {"free", "wired", "mixed"}) {
        const BoundaryCondition bc = bc_name == std::string("free")    ? free_boundary()
                                     : bc_name == std::string("wired") ? wired_boundary()
                                                                       : mixed_boundary(*lattice, part, g.mixed);
        auto graph = std::make_shared<const FkGraph>(lattice, bc, make_intensities(*lattice, beta));
        const ExactDistribution exact(*graph);
        std::vector<std::string> names;
        std::vector<Event> events;
        for (std::size_t e = 0; e < lattice->num_interior(); ++e) {
          names.push_back("bond" + std::to_string(e));
          events.push_back(events::bond_open(e));
        }
        if (g.d == 2) {
          const Box& box = lattice->box();
          names.push_back("origin_to_diagonal");
          events.push_back(events::connected(static_cast<std::uint32_t>(box.index_of(box.origin())),
                                             static_cast<std::uint32_t>(box.index_of(Site{1, 1}))));
        }
        std::vector<Observable> obs;
        for (const auto& ev : events) obs.push_back(indicator(ev));
        const auto est = estimate_observables(graph, obs, run_spec(cfg));
        for (std::size_t i = 0; i < obs.size(); ++i) {
          ExactCase c{g.name, bc_name, names[i], beta, exact.event_probability(events[i]), est[i], 0.0};
          c.z = z_score(c.estimate, c.exact);
          if (out) {
            CsvRow r = base_row(cfg, beta, 1, bc_name);
            r.L = 1;
            r.K = 0;
            emit(out, r, g.name + ":" + c.observable, c.estimate);
            out->json(json{{"graph", g.name}, {"bc", bc_name}, {"beta", beta}, {"observable", c.observable},
                           {"exact", c.exact}, {"estimate", estimate_json(c.estimate)}, {"z", c.z}});
          }
          res.cases.push_back(std::move(c));
        }
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------- theta-compare

bool ThetaCompare::gap_nonincreasing(double beta) const {
  const ThetaPoint* prev = nullptr;
  for (const auto& p : points) {
    if (p.beta != beta) continue;
    if (prev && p.gap - prev->gap > 3.0 * std::hypot(p.gap_se, prev->gap_se)) return false;
    prev = &p;
  }
  return true;
}

ThetaCompare run_theta_compare(const ExperimentConfig& cfg, RunOutput* out) {
  ThetaCompare res;
  const CouplingKernel kernel = cfg.make_kernel();
  if (out) out->seed(cfg.seed);
  for (double beta : cfg.betas) {
    json gaps = json::array();
    for (int N : cfg.n_values()) {
      auto lattice = std::make_shared<const Lattice>(Box(N, cfg.d), kernel);
      auto fg = std::make_shared<const FkGraph>(lattice, free_boundary(), make_intensities(*lattice, beta));
      auto wg = std::make_shared<const FkGraph>(lattice, wired_boundary(), make_intensities(*lattice, beta));
      ThetaPoint p;
      p.beta = beta;
      p.N = N;
      // common seed for both arms
      p.free = estimate_event(fg, events::origin_to_boundary(*lattice), run_spec(cfg));
      p.wired = estimate_event(wg, events::origin_to_ghost(*lattice), run_spec(cfg));
      p.gap = p.wired.mean - p.free.mean;
      p.gap_se = paired_stderr(p.wired, p.free);
      if (out) {
        emit(out, base_row(cfg, beta, N, "free"), "theta", p.free);
        emit(out, base_row(cfg, beta, N, "wired"), "theta", p.wired);
        Estimate g;
        g.mean = p.gap;
        g.std_error = p.gap_se;
        g.n_samples = p.free.n_samples;
        emit(out, base_row(cfg, beta, N, "wired-free"), "theta_gap", g);
      }
      gaps.push_back(json{{"N", N}, {"gap", p.gap}, {"stderr", p.gap_se}});
      res.points.push_back(std::move(p));
    }
    if (out) out->json(json{{"beta", beta}, {"gaps", gaps}, {"gap_nonincreasing", res.gap_nonincreasing(beta)}});
  }
  return res;
}

// ---------------------------------------------------------------- magnetization-curve

MagnetizationCurve run_magnetization_curve(const ExperimentConfig& cfg, RunOutput* out) {
  MagnetizationCurve res;
  auto lattice = std::make_shared<const Lattice>(Box(cfg.N, cfg.d), cfg.make_kernel());
  if (out) out->seed(cfg.seed);
  for (double beta : cfg.betas) {
    auto g = std::make_shared<const FkGraph>(lattice, wired_boundary(), make_intensities(*lattice, beta));
    MagnetizationPoint p;
    p.beta = beta;
    p.m = estimate_event(g, events::origin_to_ghost(*lattice), run_spec(cfg));
    if (!res.points.empty()) {
      const auto& q = res.points.back();
      p.diff = p.m.mean - q.m.mean;
      p.paired_se = paired_stderr(p.m, q.m);
      p.combined_se = combined_stderr(p.m, q.m);
      if (p.diff < -3.0 * p.paired_se) res.monotone = false;
      const double r = p.combined_se > 0 ? std::abs(p.diff) / p.combined_se : (p.diff == 0.0 ? 0.0 : INFINITY);
      res.max_ratio = std::max(res.max_ratio, r);
    }
    if (out) {
      emit(out, base_row(cfg, beta, cfg.N, "wired"), "magnetization", p.m);
      out->json(json{{"beta", beta}, {"m", estimate_json(p.m)}, {"diff", p.diff}, {"paired_stderr", p.paired_se},
                     {"combined_stderr", p.combined_se}});
    }
    res.points.push_back(std::move(p));
  }
  if (out) out->json(json{{"monotone", res.monotone}, {"max_diff_over_sigma", res.max_ratio}});
  return res;
}

// ---------------------------------------------------------------- fkg-suite

FkgSuite run_fkg_suite(const ExperimentConfig& cfg, RunOutput* out) {
  FkgSuite res;
  auto lattice = std::make_shared<const Lattice>(Box(cfg.N, cfg.d), cfg.make_kernel());
  const SlabPartition part = slab_partition(*lattice, cfg.L);
  const std::size_t M = part.size();
  // free, Z1 c Z2 c Z3, wired; Z_j takes the slabs with k mod 4 < j
  std::vector<std::pair<std::string, BoundaryCondition>> arms{{"free", free_boundary()}};
  for (int j = 1; j <= 3; ++j) {
    std::vector<std::uint8_t> z(M);
    for (std::size_t k = 0; k < M; ++k) z[k] = static_cast<int>(k % 4) < j;
    arms.emplace_back("mixed:" + bits_text(z), mixed_boundary(*lattice, part, z));
  }
  arms.emplace_back("wired", wired_boundary());

  const std::vector<std::string> names{"origin_to_boundary", "origin_to_ghost"};
  if (out) out->seed(cfg.seed);
  for (double beta : cfg.betas) {
    std::vector<std::vector<Estimate>> est;
    for (const auto& [name, bc] : arms) {
      auto g = std::make_shared<const FkGraph>(lattice, bc, make_intensities(*lattice, beta));
      est.push_back(estimate_observables(
          g, {indicator(events::origin_to_boundary(*lattice)), indicator(events::origin_to_ghost(*lattice))},
          run_spec(cfg)));
      for (std::size_t o = 0; o < names.size(); ++o) emit(out, base_row(cfg, beta, cfg.N, name), names[o], est.back()[o]);
    }
    for (std::size_t a = 0; a + 1 < arms.size(); ++a) {
      for (std::size_t o = 0; o < names.size(); ++o) {
        FkgComparison c;
        c.beta = beta;
        c.upper = arms[a + 1].first;
        c.lower = arms[a].first;
        c.observable = names[o];
        c.diff = est[a + 1][o].mean - est[a][o].mean;
        c.se = paired_stderr(est[a + 1][o], est[a][o]);
        c.inversion = c.diff < -3.0 * c.se;
        res.inversions += c.inversion;
        if (out)
          out->json(json{{"beta", beta}, {"upper", c.upper}, {"lower", c.lower}, {"observable", c.observable},
                         {"diff", c.diff}, {"paired_stderr", c.se}, {"inversion", c.inversion}});
        res.comparisons.push_back(std::move(c));
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------- coarse-report / peierls

CoarseSummary run_coarse(const ExperimentConfig& cfg, double beta, int K, Exec exec) {
  validate_block_size(K, cfg.d);
  CoarseSummary res;
  res.beta = beta;
  res.K = K;
  res.W = cfg.window > 0 && K == cfg.K ? cfg.window : K / 2 + 3 * K;
  const BlockLayout layout(cfg.d, K, res.W);
  auto window = std::make_shared<const Lattice>(Box(layout.lattice_half_side(), cfg.d), cfg.make_kernel());
  auto graph = std::make_shared<const FkGraph>(window, free_boundary(), make_intensities(*window, beta));
  SwSampler s(graph, cfg.seed, 0, exec);
  for (std::uint64_t t = 0; t < cfg.burn; ++t) s.step();
  PeierlsAccumulator peierls(cfg.d);
  std::array<std::uint64_t, 4> cond{};
  std::uint64_t good = 0, blocks = 0;
  std::optional<BlockGrid> last;
  for (std::uint64_t i = 0; i < cfg.samples; ++i) {
    for (std::uint64_t t = 0; t < cfg.thinning; ++t) s.step();
    BlockGrid grid = classify_grid(*window, s.omega(), layout, exec);
    const auto& clusters = s.clusters();
    const auto v1 = adjacency_gluing_check(grid, clusters, GluingScope::kGood);
    const auto v2 = adjacency_gluing_check(grid, clusters, GluingScope::kConditions123);
    res.gluing_good += v1;
    res.gluing_123 += v2;
    res.grids_with_violation += (v1 + v2) > 0;
    for (const auto& v : grid.verdicts()) {
      cond[0] += v.crossing;
      cond[1] += v.small_others;
      cond[2] += v.face_crossings;
      cond[3] += v.closed_bond;
      good += v.good();
      ++blocks;
    }
    peierls.add(grid);
    last = std::move(grid);
  }
  res.grids = cfg.samples;
  if (blocks) {
    res.good = static_cast<double>(good) / static_cast<double>(blocks);
    for (int c = 0; c < 4; ++c) res.conditions[c] = static_cast<double>(cond[c]) / static_cast<double>(blocks);
  }
  res.peierls = peierls.report();
  if (last) {
    res.last_dump = last->dump();
    if (auto anchor = layout.block_of(Site(cfg.d))) res.last_contour = extract_contours(*last, 0, *anchor);
  }
  return res;
}

namespace {

json pattern_json(const PeierlsAccumulator::Pattern& p) {
  return json{{"eta", p.eta}, {"n", p.n}, {"bad", p.bad}, {"p", p.p}, {"stderr", p.std_error}, {"upper", p.upper},
              {"sufficient", p.sufficient}};
}

void emit_coarse(const ExperimentConfig& cfg, const CoarseSummary& c, const std::string& command, RunOutput* out) {
  if (!out) return;
  CsvRow r = base_row(cfg, c.beta, 0, "free");
  r.K = c.K;
  r.n_samples = c.grids;
  auto put = [&](const std::string& name, double v) {
    r.observable = name;
    r.mean = v;
    r.std_error = 0.0;
    out->row(r);
  };
  put("good_fraction", c.good);
  for (int i = 0; i < 4; ++i) put("condition" + std::to_string(i + 1), c.conditions[i]);
  put("gluing_violations", static_cast<double>(c.gluing_good));
  put("gluing_violations_123", static_cast<double>(c.gluing_123));
  if (c.peierls.any_sufficient) {
    r.observable = "peierls_max";
    r.mean = c.peierls.max.p;
    r.std_error = c.peierls.max.std_error;
    r.n_samples = c.peierls.max.n;
    out->row(r);
  }
  json pats = json::array();
  for (const auto& p : c.peierls.patterns) pats.push_back(pattern_json(p));
  json rec{{"beta", c.beta}, {"K", c.K}, {"W", c.W}, {"grids", c.grids}, {"good_fraction", c.good},
           {"patterns", pats}, {"insufficient_patterns", c.peierls.insufficient}};
  if (c.peierls.any_sufficient) rec["max"] = pattern_json(c.peierls.max);
  out->json(rec);
  if (c.last_contour) {
    json cj{{"K", c.K}, {"kind", "contour"}, {"connected_to_frame", c.last_contour->connected_to_frame},
            {"component", c.last_contour->component}};
    if (c.last_contour->contour) {
      cj["gamma"] = c.last_contour->contour->gamma;
      cj["boundary"] = c.last_contour->contour->boundary;
    }
    out->json(cj);
  }
  out->text(command + ".K" + std::to_string(c.K) + ".grid.txt", c.last_dump);
}

}  // namespace

std::vector<CoarseSummary> run_coarse_report(const ExperimentConfig& cfg, RunOutput* out) {
  std::vector<CoarseSummary> res;
  if (out) out->seed(cfg.seed);
  for (double beta : cfg.betas) {
    for (int K : cfg.k_values()) {
      res.push_back(run_coarse(cfg, beta, K));
      emit_coarse(cfg, res.back(), "coarse-report", out);
    }
  }
  return res;
}

PeierlsTrend run_peierls(const ExperimentConfig& cfg, RunOutput* out) {
  PeierlsTrend res;
  if (out) out->seed(cfg.seed);
  const double beta = cfg.betas.front();
  for (int K : cfg.k_values()) {
    res.per_K.push_back(run_coarse(cfg, beta, K));
    emit_coarse(cfg, res.per_K.back(), "peierls", out);
  }
  const auto& a = res.per_K.front().peierls;
  const auto& b = res.per_K.back().peierls;
  res.comparable = res.per_K.size() >= 2 && a.any_sufficient && b.any_sufficient;
  if (res.comparable) {
    const double se = std::hypot(a.max.std_error, b.max.std_error);
    res.z = se > 0 ? (a.max.p - b.max.p) / se : (a.max.p > b.max.p ? INFINITY : 0.0);
    res.decreasing = res.z > 1.645;
  }
  if (out)
    out->json(json{{"kind", "trend"}, {"K_first", res.per_K.front().K}, {"K_last", res.per_K.back().K},
                   {"comparable", res.comparable}, {"z", res.z}, {"decreasing", res.decreasing}});
  return res;
}

// ---------------------------------------------------------------- domination

ZhatBound run_zhat_bound(const ExperimentConfig& cfg, double s, RunOutput* out) {
  const CouplingKernel kernel = cfg.make_kernel();
  const DetectorSetup setup(kernel, cfg.N, cfg.L, cfg.K, cfg.window_for(cfg.K));
  RunSpec spec = run_spec(cfg);
  spec.sweeps = cfg.field_sweeps;
  spec.chains = 1;
  const double beta = cfg.betas.front();
  ZhatSampling zh = sample_Zhat(setup, beta, s, spec);
  ZhatBound res;
  res.s = s;
  res.bound = static_cast<double>(kernel.range()) * std::pow(static_cast<double>(cfg.L), cfg.d - 1) * s;
  res.check = check_upper_bound(zh.tally, res.bound, cfg.n_min);
  res.origin_to_ghost = zh.origin_to_ghost;
  if (out) {
    out->seed(cfg.seed);
    std::vector<double> marg;
    for (std::size_t k = 0; k < zh.tally.size(); ++k) {
      const auto m = zh.tally.marginal(k);
      marg.push_back(m.n ? static_cast<double>(m.ones) / static_cast<double>(m.n) : 0.0);
    }
    out->json(json{{"kind", "zhat_bound"}, {"s", s}, {"bound", res.bound}, {"checked", res.check.checked},
                   {"violations", res.check.violations}, {"worst_z", res.check.worst_z}, {"zhat_marginal", marg}});
  }
  return res;
}

SandwichConfig sandwich_config(const ExperimentConfig& cfg) {
  SandwichConfig s;
  s.beta = cfg.betas.front();
  s.N = cfg.N;
  s.L = cfg.L;
  s.K = cfg.K;
  s.grid_half_side = cfg.window_for(cfg.K);
  s.window_samples = cfg.samples;
  s.thinning = cfg.thinning;
  s.window_burn = cfg.burn;
  s.n_min = cfg.n_min;
  if (cfg.s > 0.0 && cfg.h > 0.0) throw ConfigError("config: give either h or s, not both");
  if (cfg.s > 0.0) {
    s.s = cfg.s;
  } else if (cfg.h > 0.0) {
    const Lattice inner(Box(cfg.N, cfg.d), cfg.make_kernel());
    s.s = boundary_intensity(cfg.h, max_exterior_J(inner));
  }
  s.field_sweeps = cfg.field_sweeps;
  s.coupled_draws = cfg.coupled_draws;
  s.psi_sweeps = cfg.psi_sweeps;
  s.seed = cfg.seed;
  return s;
}

DominationResult run_domination(const ExperimentConfig& cfg, RunOutput* out) {
  DominationResult res;
  if (out) out->seed(cfg.seed);
  const SandwichConfig sc = sandwich_config(cfg);
  try {
    res.report = domination_chain_report(cfg.make_kernel(), sc);
    res.precondition_ok = true;
    res.alpha = res.report.alpha.alpha;
    res.bound = res.report.bound;
  } catch (const PreconditionFailure& e) {
    res.precondition_ok = false;
    res.message = e.what();
    res.alpha = e.alpha;
    res.bound = e.bound;
    if (out)
      out->json(json{{"status", "precondition_failure"}, {"alpha", e.alpha}, {"bound", e.bound}, {"reason", e.what()}});
    return res;
  }
  if (out) {
    const auto& r = res.report;
    CsvRow row = base_row(cfg, sc.beta, cfg.N, "field");
    row.h = r.h;
    emit(out, row, "psi_Z", r.a);
    emit(out, row, "psi_Zhat", r.b);
    emit(out, row, "origin_to_ghost", r.c);
    out->json(json{{"status", "ok"},
                   {"alpha", r.alpha.alpha},
                   {"alpha_lower", r.alpha.alpha_lower},
                   {"argmin_k", r.alpha.argmin_k},
                   {"argmin_history", r.alpha.argmin_history},
                   {"histories_seen", r.alpha.histories_seen},
                   {"histories_used", r.alpha.histories_used},
                   {"coverage", r.alpha.coverage},
                   {"z_marginal", r.alpha.marginal},
                   {"zhat_marginal", r.zhat_marginal},
                   {"s", r.s},
                   {"h", r.h},
                   {"bound", r.bound},
                   {"zhat_bound_checked", r.zhat_check.checked},
                   {"zhat_bound_violations", r.zhat_check.violations},
                   {"a", estimate_json(r.a)},
                   {"b", estimate_json(r.b)},
                   {"c", estimate_json(r.c)},
                   {"a_minus_b", json{{"diff", r.ab.diff}, {"sigma", r.ab.sigma}, {"holds", r.ab.holds}}},
                   {"b_minus_c", json{{"diff", r.bc.diff}, {"sigma", r.bc.sigma}, {"holds", r.bc.holds}}},
                   {"coupling_steps", r.coupling_steps},
                   {"domination_violations", r.domination_violations},
                   {"q_below_alpha", r.q_below_alpha},
                   {"qhat_above_bound", r.qhat_above_bound},
                   {"psi_patterns", r.psi_patterns},
                   {"truncation_radius", DetectorSetup(cfg.make_kernel(), cfg.N, cfg.L, cfg.K, sc.grid_half_side)
                                             .truncation_radius()},
                   {"window", sc.grid_half_side},
                   {"holds", r.holds()}});
  }
  return res;
}

// ---------------------------------------------------------------- coupling-demo

CouplingDemo run_coupling_demo(const ExperimentConfig& cfg, RunOutput* out) {
  const double q = cfg.q_oracle, qh = cfg.qhat_oracle;
  if (!(q >= 0 && q <= 1 && qh >= 0 && qh <= 1)) throw ConfigError("config: oracle probabilities must lie in [0, 1]");
  const std::size_t M = cfg.chain_length;
  if (M == 0 || M > 20) throw ConfigError("config: chain_length must lie in [1, 20]");
  const auto Q = ConditionalOracle::constant(q);
  const auto Qh = ConditionalOracle::constant(qh);
  CounterStream rng(cfg.seed, 0);
  CouplingDemo res;
  std::vector<std::uint64_t> patterns_z(std::size_t{1} << M), patterns_zh(std::size_t{1} << M);
  for (std::uint64_t i = 0; i < cfg.coupled_draws; ++i) {
    JointSample js;
    try {
      js = couple(Q, Qh, M, rng);
    } catch (const DominationViolation&) {
      ++res.domination_violations;
      continue;
    }
    ++res.draws;
    std::size_t pz = 0, pzh = 0;
    for (std::size_t k = 0; k < M; ++k) {
      ++res.cells[js.Z[k]][js.Zhat[k]];
      pz |= std::size_t{js.Z[k]} << k;
      pzh |= std::size_t{js.Zhat[k]} << k;
    }
    ++patterns_z[pz];
    ++patterns_zh[pzh];
  }
  res.cells_total = res.draws * M;
  res.expected[0][0] = 1.0 - q;
  res.expected[0][1] = 0.0;
  res.expected[1][0] = q - qh;
  res.expected[1][1] = qh;
  const double n = static_cast<double>(res.cells_total);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double p = std::max(res.expected[a][b], 0.0);
      const double f = n > 0 ? static_cast<double>(res.cells[a][b]) / n : 0.0;
      const double sd = std::sqrt(p * (1 - p) / std::max(n, 1.0));
      res.z[a][b] = sd > 0 ? (f - p) / sd : (f == p ? 0.0 : INFINITY);
    }

  // Chi-square over whole chain patterns (i.i.d. Bernoulli bits); cells with
  // expectation below 5 are pooled.
  auto gof = [&](const std::vector<std::uint64_t>& counts, double prob) {
    double stat = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
    int df = -1;
    const double draws = static_cast<double>(res.draws);
    for (std::size_t pat = 0; pat < counts.size(); ++pat) {
      const int ones = std::popcount(pat);
      const double e = draws * std::pow(prob, ones) * std::pow(1 - prob, static_cast<double>(M) - ones);
      if (e < 5.0) {
        pooled_obs += static_cast<double>(counts[pat]);
        pooled_exp += e;
        continue;
      }
      stat += std::pow(static_cast<double>(counts[pat]) - e, 2) / e;
      ++df;
    }
    if (pooled_exp > 0.0) {
      stat += std::pow(pooled_obs - pooled_exp, 2) / pooled_exp;
      ++df;
    }
    if (df < 1) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(df), stat));
  };
  res.gof_p_Z = gof(patterns_z, q);
  res.gof_p_Zhat = gof(patterns_zh, qh);

  if (out) {
    out->seed(cfg.seed);
    json cells = json::array();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        cells.push_back(json{{"Z", a}, {"Zhat", b}, {"count", res.cells[a][b]}, {"expected", res.expected[a][b]},
                             {"z", res.z[a][b]}});
    out->json(json{{"q", q}, {"qhat", qh}, {"chain_length", M}, {"draws", res.draws}, {"cells", cells},
                   {"gof_p_Z", res.gof_p_Z}, {"gof_p_Zhat", res.gof_p_Zhat},
                   {"domination_violations", res.domination_violations}});
  }
  return res;
}

// ---------------------------------------------------------------- sample

std::string checkpoint_path(const ExperimentConfig& cfg, double beta, std::size_t chain) {
  return (std::filesystem::path(cfg.out_dir) /
          ("sample.beta" + format_real(beta) + ".chain" + std::to_string(chain) + ".fklb"))
      .string();
}

std::vector<Estimate> run_sample(const ExperimentConfig& cfg, const SampleOptions& opt, RunOutput* out) {
  const std::vector<std::string> names{"origin_to_boundary", "origin_to_ghost", "bond_density"};
  std::vector<Estimate> all;
  auto lattice = std::make_shared<const Lattice>(Box(cfg.N, cfg.d), cfg.make_kernel());
  const BoundaryCondition bc = boundary_from_config(cfg, *lattice);
  if (opt.write_checkpoints || opt.resume) std::filesystem::create_directories(cfg.out_dir);
  if (out) out->seed(cfg.seed);
  for (double beta : cfg.betas) {
    auto graph = std::make_shared<const FkGraph>(lattice, bc, make_intensities(*lattice, beta));
    const auto o = static_cast<std::uint32_t>(lattice->box().index_of(lattice->box().origin()));
    const auto burn = static_cast<std::uint64_t>(std::floor(cfg.burn_in * static_cast<double>(cfg.sweeps)));
    const std::uint64_t kept = cfg.sweeps - burn;
    const auto nchains = static_cast<std::int64_t>(cfg.chains);
    std::vector<std::vector<BatchAccumulator>> acc(cfg.chains);
    std::vector<std::string> errors(cfg.chains);
#pragma omp parallel for schedule(static, 1)
    for (std::int64_t c = 0; c < nchains; ++c) {
      try {
        SwSampler s(graph, cfg.seed, static_cast<std::uint64_t>(c), Exec::kSerial);
        const std::string path = checkpoint_path(cfg, beta, static_cast<std::size_t>(c));
        if (opt.resume) read_checkpoint(path, s);
        auto& a = acc[c];
        for (std::size_t i = 0; i < names.size(); ++i) a.emplace_back(kept, cfg.batches);
        const double nb = static_cast<double>(graph->num_random());
        for (std::uint64_t t = 0; t < cfg.sweeps; ++t) {
          const auto& cl = s.clusters();
          if (t >= burn) {
            a[0].add(cl.touches_boundary(o) ? 1.0 : 0.0);
            a[1].add(cl.connected_to_ghost(o) ? 1.0 : 0.0);
            a[2].add(static_cast<double>(s.omega().count()) / nb);
          }
          s.resample();
        }
        if (opt.write_checkpoints) write_checkpoint(path, s);
      } catch (const std::exception& e) {
        errors[c] = e.what();
      }
    }
    for (const auto& e : errors)
      if (!e.empty()) throw std::runtime_error(e);
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::vector<BatchAccumulator> per;
      for (auto& a : acc) per.push_back(a[i]);
      Estimate e = finalize(per);
      emit(out, base_row(cfg, beta, cfg.N, cfg.bc == "mixed" ? "mixed:" + cfg.pattern : cfg.bc), names[i], e);
      all.push_back(std::move(e));
    }
  }
  return all;
}

}  // namespace fklab
