// fklab: experiment runner for the random-cluster laboratory.
#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>

#include "fklab/experiments.hpp"

namespace {

using fklab::ExperimentConfig;

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
};

// Flags that write config keys directly.
const std::vector<std::pair<std::string, std::string>> kFlagKeys{
    {"--beta", "model.beta"},     {"--field", "model.h"},         {"--s", "model.s"},
    {"--bc", "model.bc"},         {"--pattern", "model.pattern"}, {"--d", "model.d"},
    {"--kernel", "model.kernel"}, {"--J", "model.J"},         {"--couplings", "model.couplings"},
    {"--N", "geometry.N"},        {"--N-grid", "geometry.N_grid"}, {"--L", "geometry.L"},
    {"--K", "geometry.K"},        {"--K-grid", "geometry.K_grid"}, {"--window", "geometry.window"},
    {"--sweeps", "run.sweeps"},   {"--burn-in", "run.burn_in"}, {"--batches", "run.batches"},
    {"--chains", "run.chains"},   {"--seed", "run.seed"},     {"--samples", "run.samples"},
    {"--thinning", "run.thinning"}, {"--burn", "run.burn"},   {"--n-min", "domination.n_min"},
    {"--field-sweeps", "domination.field_sweeps"}, {"--coupled-draws", "domination.coupled_draws"},
    {"--psi-sweeps", "domination.psi_sweeps"}, {"--q", "domination.q"}, {"--qhat", "domination.qhat"},
    {"--chain-length", "domination.chain_length"}, {"--out", "output.out_dir"},
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "key = value config file with [sections]");
  app->add_option("--set", c.sets, "override: section.key=value (repeatable)");
  for (const auto& [flag, key] : kFlagKeys) app->add_option(flag, c.flags[key], key);
}

ExperimentConfig build_config(const Common& c, const std::map<std::string, std::string>& defaults) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : defaults) fklab::set_config_value(cfg, k, v);
  if (const char* env = std::getenv("FKLAB_OUT_DIR")) cfg.out_dir = env;
  if (!c.config_path.empty()) fklab::load_config_into(cfg, c.config_path);
  // d first so that coupling lists parse against it
  if (auto it = c.flags.find("model.d"); it != c.flags.end() && !it->second.empty())
    fklab::set_config_value(cfg, it->first, it->second);
  for (const auto& [k, v] : c.flags)
    if (!v.empty() && k != "model.d") fklab::set_config_value(cfg, k, v);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw fklab::ConfigError("config: --set expects section.key=value, got '" + s + "'");
    fklab::set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

void print_files(const std::string& dir, const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << "wrote " << dir << "/" << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* t = std::getenv("FKLAB_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }

  CLI::App app{"fklab: finite-volume random-cluster experiments (q = 2)"};
  app.require_subcommand(1);

  struct Cmd {
    std::string name, help;
    std::map<std::string, std::string> defaults;
    fklab::Needs needs;
  };
  const std::vector<Cmd> cmds{
      {"exact-check", "sampler vs full enumeration on the single bond and the 2x2 box",
       {{"beta", "0.3,0.6,1.0"}, {"sweeps", "100000"}}, {}},
      {"theta-compare", "free vs wired P(0 <-> boundary) over N and beta grids",
       {{"beta", "0.3,0.6"}, {"N_grid", "8,16,32,64"}}, {}},
      {"magnetization-curve", "wired m(beta) with successive-difference diagnostics",
       {{"beta", "0.5:1.0:0.02"}, {"N", "32"}}, {}},
      {"fkg-suite", "wired >= mixed >= free along nested slab patterns",
       {{"beta", "0.5,0.8"}, {"N", "16"}, {"sweeps", "20000"}}, {true, false, false}},
      {"coarse-report", "block classification, gluing check, grid dump and contour", {}, {false, true, false}},
      {"peierls", "bad-block conditional frequencies and their trend in K", {{"K_grid", "16,36"}},
       {false, true, false}},
      {"domination", "Z / Z-hat detectors, alpha estimate and the sandwich report", {{"samples", "4000"}},
       {true, true, true}},
      {"coupling-demo", "monotone coupling with constant oracles", {{"coupled_draws", "100000"}}, {}},
      {"sample", "raw sampling with per-chain checkpoints", {}, {}},
  };

  std::vector<Common> commons(cmds.size());
  std::vector<CLI::App*> subs;
  bool resume = false, no_checkpoint = false;
  std::vector<double> zhat_s;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    add_common(sub, commons[i]);
    subs.push_back(sub);
  }
  subs[6]->add_option("--zhat-s", zhat_s, "also check the Z-hat bound at these boundary intensities")->delimiter(',');
  subs[8]->add_flag("--resume", resume, "continue from the checkpoints in the output directory");
  subs[8]->add_flag("--no-checkpoint", no_checkpoint, "do not write checkpoints");

  CLI11_PARSE(app, argc, argv);

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const Cmd& cmd = cmds[which];

  ExperimentConfig cfg;
  try {
    cfg = build_config(commons[which], cmd.defaults);
    fklab::validate(cfg, cmd.needs);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    fklab::RunOutput out(cfg, cmd.name);
    int status = 0;
    if (cmd.name == "exact-check") {
      const auto r = fklab::run_exact_check(cfg, &out);
      for (const auto& c : r.cases)
        std::printf("%-12s %-6s beta=%-4g %-20s exact=%.6f est=%.6f se=%.6f z=%+.2f\n", c.graph.c_str(), c.bc.c_str(),
                    c.beta, c.observable.c_str(), c.exact, c.estimate.mean, c.estimate.std_error, c.z);
      std::printf("max |z| = %.2f\n", r.max_abs_z());
      if (r.max_abs_z() > 4.0) status = 1;
    } else if (cmd.name == "theta-compare") {
      const auto r = fklab::run_theta_compare(cfg, &out);
      for (const auto& p : r.points)
        std::printf("beta=%-5g N=%-4d free=%.5f(%.5f) wired=%.5f(%.5f) gap=%+.5f(%.5f)\n", p.beta, p.N, p.free.mean,
                    p.free.std_error, p.wired.mean, p.wired.std_error, p.gap, p.gap_se);
    } else if (cmd.name == "magnetization-curve") {
      const auto r = fklab::run_magnetization_curve(cfg, &out);
      for (const auto& p : r.points)
        std::printf("beta=%-5g m=%.5f(%.5f) diff=%+.5f paired=%.5f combined=%.5f\n", p.beta, p.m.mean, p.m.std_error,
                    p.diff, p.paired_se, p.combined_se);
      std::printf("monotone=%d max|diff|/sigma=%.2f\n", r.monotone, r.max_ratio);
    } else if (cmd.name == "fkg-suite") {
      const auto r = fklab::run_fkg_suite(cfg, &out);
      for (const auto& c : r.comparisons)
        std::printf("beta=%-4g %-20s %s >= %s diff=%+.5f se=%.5f%s\n", c.beta, c.observable.c_str(), c.upper.c_str(),
                    c.lower.c_str(), c.diff, c.se, c.inversion ? " INVERSION" : "");
      std::printf("inversions=%zu\n", r.inversions);
      if (r.inversions) status = 1;
    } else if (cmd.name == "coarse-report" || cmd.name == "peierls") {
      std::vector<fklab::CoarseSummary> per;
      fklab::PeierlsTrend trend;
      if (cmd.name == "peierls") {
        trend = fklab::run_peierls(cfg, &out);
        per = trend.per_K;
      } else {
        per = fklab::run_coarse_report(cfg, &out);
      }
      for (const auto& c : per) {
        std::printf("beta=%g K=%d W=%d grids=%llu good=%.3f c1=%.3f c2=%.3f c3=%.3f c4=%.3f gluing=%llu/%llu\n",
                    c.beta, c.K, c.W, static_cast<unsigned long long>(c.grids), c.good, c.conditions[0],
                    c.conditions[1], c.conditions[2], c.conditions[3], static_cast<unsigned long long>(c.gluing_good),
                    static_cast<unsigned long long>(c.gluing_123));
        if (c.peierls.any_sufficient)
          std::printf("  peierls max: eta=%u p=%.4f se=%.4f n=%llu\n", c.peierls.max.eta, c.peierls.max.p,
                      c.peierls.max.std_error, static_cast<unsigned long long>(c.peierls.max.n));
      }
      if (cmd.name == "peierls")
        std::printf("trend: comparable=%d z=%.2f decreasing=%d\n", trend.comparable, trend.z, trend.decreasing);
    } else if (cmd.name == "domination") {
      for (double s : zhat_s) {
        const auto b = fklab::run_zhat_bound(cfg, s, &out);
        std::printf("zhat bound s=%g bound=%g checked=%zu violations=%zu worst_z=%.2f\n", s, b.bound, b.check.checked,
                    b.check.violations, b.check.worst_z);
      }
      const auto r = fklab::run_domination(cfg, &out);
      if (!r.precondition_ok) {
        std::printf("precondition failure: %s\n", r.message.c_str());
        status = 3;
      } else {
        const auto& s = r.report;
        std::printf("alpha=%.5f (lower %.5f) s=%.6g bound=%.6g\n", s.alpha.alpha, s.alpha.alpha_lower, s.s, s.bound);
        std::printf("a=%.5f(%.5f) b=%.5f(%.5f) c=%.5f(%.5f) a>=b:%d b>=c:%d violations=%llu\n", s.a.mean,
                    s.a.std_error, s.b.mean, s.b.std_error, s.c.mean, s.c.std_error, s.ab.holds, s.bc.holds,
                    static_cast<unsigned long long>(s.domination_violations));
      }
    } else if (cmd.name == "coupling-demo") {
      const auto r = fklab::run_coupling_demo(cfg, &out);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          std::printf("(Z=%d, Zhat=%d) count=%llu expected=%.3f z=%+.2f\n", a, b,
                      static_cast<unsigned long long>(r.cells[a][b]), r.expected[a][b], r.z[a][b]);
      std::printf("gof p: Z=%.4f Zhat=%.4f\n", r.gof_p_Z, r.gof_p_Zhat);
    } else if (cmd.name == "sample") {
      const auto r = fklab::run_sample(cfg, {resume, !no_checkpoint}, &out);
      std::size_t i = 0;
      for (double beta : cfg.betas)
        for (const char* name : {"origin_to_boundary", "origin_to_ghost", "bond_density"}) {
          std::printf("beta=%-5g %-20s %.6f(%.6f)\n", beta, name, r[i].mean, r[i].std_error);
          ++i;
        }
    }
    print_files(cfg.out_dir, out.finish());
    return status;
  } catch (const fklab::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
