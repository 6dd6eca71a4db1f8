#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "fklab/sampler.hpp"

using namespace fklab;

namespace {

const double kHalf = 0.5 * std::log(2.0);

std::shared_ptr<const Lattice> nn(int N, int d) {
  return std::make_shared<const Lattice>(Box(N, d), CouplingKernel::nearest_neighbor(d));
}

std::shared_ptr<const FkGraph> graph(std::shared_ptr<const Lattice> l, const BoundaryCondition& bc, double beta) {
  return std::make_shared<const FkGraph>(l, bc, make_intensities(*l, beta));
}

RunSpec spec(std::uint64_t sweeps, std::uint64_t seed = 1) {
  RunSpec s;
  s.sweeps = sweeps;
  s.seed = seed;
  return s;
}

// <sigma_0> on d = 1, N = 2 by summing 2^4 states: sites -1..2, field h on
// the two end sites, origin is the second site.
double spin_chain_oracle(double beta, double h) {
  double z = 0.0, m = 0.0;
  for (int s = 0; s < 16; ++s) {
    double sg[4];
    for (int i = 0; i < 4; ++i) sg[i] = (s >> i & 1) ? 1.0 : -1.0;
    const double e = beta * (sg[0] * sg[1] + sg[1] * sg[2] + sg[2] * sg[3]) + h * (sg[0] + sg[3]);
    z += std::exp(e);
    m += sg[1] * std::exp(e);
  }
  return m / z;
}

}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("p = 0 closes every bond in one step") {
    const auto l = nn(3, 2);
    SwSampler s(graph(l, wired_boundary(), 0.0), 1, 0);
    s.set_omega(BondConfig(l->num_interior(), true));
    s.step();
    CHECK(s.omega().count() == 0);
  }

  TEST_CASE("ghost cluster gets spin +1") {
    const auto l = nn(3, 2);
    SwSampler s(graph(l, wired_boundary(), 0.4), 1, 0);
    for (int t = 0; t < 20; ++t) {
      s.clusters();
      s.resample();
      const auto& g = s.graph();
      CHECK(s.spins()[g.ghost()] == 1);
    }
  }

  TEST_CASE("single bond against the exact oracle") {
    const auto l = nn(1, 1);
    const auto gf = graph(l, free_boundary(), kHalf);
    const Estimate f = estimate_event(gf, events::bond_open(0), spec(100000));
    CHECK(std::abs(f.z_against(1.0 / 3.0)) <= 3.0);
    CHECK(f.batch_means.size() >= 16);

    const double beta = 0.4;
    const auto gw = graph(l, wired_boundary(), beta);
    const Estimate w = estimate_event(gw, events::bond_open(0), spec(100000));
    CHECK(std::abs(w.z_against(bond_intensity(beta, 1.0))) <= 3.0);
  }

  TEST_CASE("2x2 free box marginals against enumeration") {
    const auto l = nn(1, 2);
    const auto g = graph(l, free_boundary(), kHalf);
    const ExactDistribution ex(*g);
    std::vector<Observable> obs;
    for (std::size_t e = 0; e < 4; ++e) obs.push_back(indicator(events::bond_open(e)));
    obs.push_back(indicator(events::connected(0, 3)));
    const auto est = estimate_observables(g, obs, spec(100000));
    for (std::size_t e = 0; e < 4; ++e) CHECK(std::abs(est[e].z_against(ex.marginal(e))) <= 3.0);
    CHECK(std::abs(est[4].z_against(0.219512195121951)) <= 3.0);
  }

  TEST_CASE("property: SW matches enumeration under every boundary kind") {
    const auto l = nn(1, 2);
    const auto part = slab_partition(*l, 2);
    struct Arm {
      const char* name;
      std::shared_ptr<const FkGraph> g;
    };
    const double beta = 0.6;
    const std::vector<Arm> arms{
        {"free", graph(l, free_boundary(), beta)},
        {"wired", graph(l, wired_boundary(), beta)},
        {"mixed", graph(l, mixed_boundary(*l, part, {1, 0, 0, 1}), beta)},
        {"field", std::make_shared<const FkGraph>(l, wired_boundary(), make_intensities_with_field(*l, beta, 0.2))},
    };
    for (const auto& a : arms) {
      CAPTURE(a.name);
      const ExactDistribution ex(*a.g);
      std::vector<Observable> obs{indicator(events::origin_to_ghost(*l)), indicator(events::connected(0, 3))};
      std::vector<double> want{ex.event_probability(events::origin_to_ghost(*l)),
                               ex.event_probability(events::connected(0, 3))};
      for (std::size_t e = 0; e < a.g->num_random(); ++e) {
        obs.push_back(indicator(events::bond_open(e)));
        want.push_back(ex.marginal(e));
      }
      const auto est = estimate_observables(a.g, obs, spec(60000, 3));
      for (std::size_t i = 0; i < obs.size(); ++i) {
        CAPTURE(i);
        if (est[i].std_error == 0.0)
          CHECK(est[i].mean == doctest::Approx(want[i]).epsilon(1e-12));
        else
          CHECK(std::abs(est[i].z_against(want[i])) <= 3.0);
      }
    }
  }

  TEST_CASE("metropolis cross-check on the 2x2 box") {
    const auto l = nn(1, 2);
    const auto g = graph(l, free_boundary(), 0.6);
    const double want = ExactDistribution(*g).event_probability(events::connected(0, 3));
    const Estimate m = metropolis_event(g, events::connected(0, 3), spec(60000));
    CHECK(std::abs(m.z_against(want)) <= 3.0);
  }

  TEST_CASE("beta = 0 never reaches the boundary from inside") {
    const auto l = nn(4, 2);
    const Estimate e = estimate_event(graph(l, free_boundary(), 0.0), events::origin_to_boundary(*l), spec(2000));
    CHECK(e.mean == 0.0);
    CHECK(e.std_error == 0.0);
  }

  TEST_CASE("serial and parallel sweeps are bit-identical") {
    const auto l = nn(8, 2);
    const auto g = graph(l, wired_boundary(), 0.5);
    SwSampler a(g, 7, 3, Exec::kSerial), b(g, 7, 3, Exec::kParallel);
    for (int t = 0; t < 200; ++t) {
      a.step();
      b.step();
    }
    CHECK(a.omega() == b.omega());

    const int saved = omp_get_max_threads();
    RunSpec s = spec(2000, 4);
    s.chains = 3;
    omp_set_num_threads(1);
    const Estimate one = estimate_event(g, events::origin_to_ghost(*l), s);
    omp_set_num_threads(4);
    const Estimate four = estimate_event(g, events::origin_to_ghost(*l), s);
    omp_set_num_threads(saved);
    CHECK(one.mean == four.mean);
    CHECK(one.std_error == four.std_error);
    CHECK(one.batch_means == four.batch_means);
  }

  TEST_CASE("checkpoint round trip resumes the same trajectory") {
    const auto l = nn(4, 2);
    const auto g = graph(l, free_boundary(), 0.7);
    SwSampler a(g, 11, 0);
    for (int t = 0; t < 50; ++t) a.step();
    const auto bytes = encode_checkpoint(a);
    CHECK(bytes[0] == 'F');
    CHECK(bytes[3] == 'B');

    SwSampler b(g, 999, 5);
    decode_checkpoint(bytes, b);
    CHECK(b.omega() == a.omega());
    CHECK(b.sweep() == a.sweep());
    for (int t = 0; t < 50; ++t) {
      a.step();
      b.step();
    }
    CHECK(a.omega() == b.omega());

    const auto path = (std::filesystem::temp_directory_path() / "fklab_test_ckpt.fklb").string();
    write_checkpoint(path, a);
    SwSampler c(g, 1, 1);
    read_checkpoint(path, c);
    std::remove(path.c_str());
    CHECK(c.omega() == a.omega());

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS(decode_checkpoint(bad, c));
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS(decode_checkpoint(bad, c));
    const auto other = nn(5, 2);
    SwSampler d(graph(other, free_boundary(), 0.7), 1, 0);
    CHECK_THROWS(decode_checkpoint(bytes, d));
  }

  TEST_CASE("psi examples") {
    const auto l = nn(4, 2);
    const auto part = slab_partition(*l, 2);
    const double beta = 0.8;
    const RunSpec s = spec(20000, 2);
    std::vector<std::uint8_t> zero(part.size(), 0), all(part.size(), 1), one(part.size(), 0);
    one[0] = 1;
    const Estimate p0 = estimate_psi(l, part, zero, beta, s);
    CHECK(p0.exact);
    CHECK(p0.mean == 0.0);
    const Estimate pall = estimate_psi(l, part, all, beta, s);
    const Estimate wired = estimate_event(graph(l, wired_boundary(), beta), events::origin_to_ghost(*l), s);
    CHECK(pall.mean == wired.mean);
    const Estimate p1 = estimate_psi(l, part, one, beta, s);
    CHECK(p1.mean > p0.mean + 3.0 * p1.std_error);
    CHECK(pall.mean - p1.mean > 3.0 * paired_stderr(pall, p1));
  }

  TEST_CASE("boundary field") {
    const auto l = nn(4, 2);
    CHECK_THROWS_AS(sample_with_boundary_field(l, 0.6, 0.0, spec(100)), std::invalid_argument);
    const RunSpec s = spec(20000, 5);
    const Estimate big = sample_with_boundary_field(l, 0.6, field_from_intensity(0.999999), s);
    const Estimate wired = estimate_event(graph(l, wired_boundary(), 0.6), events::origin_to_ghost(*l), s);
    CHECK(std::abs(big.mean - wired.mean) <= 3.0 * combined_stderr(big, wired));

    // single site box with its two boundary bonds
    const auto one = nn(1, 1);
    const double h = 0.3;
    const FkGraph g(one, wired_boundary(), make_intensities_with_field(*one, 0.5, h));
    CHECK(g.num_random() == 3);
    const double exact = ExactDistribution(g).event_probability(events::origin_to_ghost(*one));
    const Estimate est = sample_with_boundary_field(one, 0.5, h, spec(100000, 6));
    CHECK(std::abs(est.z_against(exact)) <= 3.0);
  }

  TEST_CASE("spin oracles") {
    const auto chain = nn(2, 1);
    const SpinBoundary field{SpinBoundary::Kind::kField, 1.0};
    const double want = spin_chain_oracle(0.5, 1.0);
    CHECK(want == doctest::Approx(0.486725471307327).epsilon(1e-12));
    CHECK(exact_spin_magnetization(*chain, 0.5, field) == doctest::Approx(want).epsilon(1e-12));
    const Estimate gl = glauber_magnetization(chain, 0.5, field, spec(100000, 8));
    CHECK(std::abs(gl.z_against(want)) <= 3.0);
    // FK identity: the boundary-field connection probability is <sigma_0>
    const FkGraph g(chain, wired_boundary(), make_intensities_with_field(*chain, 0.5, 1.0));
    CHECK(ExactDistribution(g).event_probability(events::origin_to_ghost(*chain)) == doctest::Approx(want).epsilon(1e-12));

    const auto l = nn(3, 2);
    const Estimate hot = glauber_magnetization(l, 0.0, {}, spec(20000, 9));
    CHECK(std::abs(hot.z_against(0.0)) <= 3.0);
  }

  TEST_CASE("glauber with plus boundary matches the FK sampler at s = p") {
    const auto l = nn(8, 2);
    const double beta = 0.6;
    const Estimate gl = glauber_magnetization(l, beta, {SpinBoundary::Kind::kPlus, 0.0}, spec(20000, 12));
    // + boundary couples at beta, so its FK boundary intensity is p
    const Estimate fk = sample_with_boundary_field(l, beta, beta, spec(20000, 13));
    CHECK(std::abs(gl.mean - fk.mean) <= 3.0 * combined_stderr(gl, fk));
  }

  TEST_CASE("property: connection probability is nondecreasing in beta") {
    const auto l = nn(6, 2);
    for (bool wired : {false, true}) {
      const BoundaryCondition bc = wired ? wired_boundary() : free_boundary();
      Estimate prev;
      bool first = true;
      for (double beta = 0.3; beta <= 0.71; beta += 0.1) {
        const Estimate e = estimate_event(graph(l, bc, beta), events::origin_to_boundary(*l), spec(6000, 21));
        if (!first) CHECK(e.mean - prev.mean >= -3.0 * paired_stderr(e, prev));
        prev = e;
        first = false;
      }
    }
  }

  TEST_CASE("property: FKG ordering along nested slab patterns") {
    const auto l = nn(6, 2);
    const auto part = slab_partition(*l, 3);
    const double beta = 0.5;
    const RunSpec s = spec(8000, 31);
    std::vector<std::uint8_t> z(part.size(), 0);
    Estimate prev = exact_estimate(0.0);  // Z = 0
    for (std::size_t k = 0; k < part.size(); k += 3) {
      for (std::size_t j = k; j < std::min(k + 3, part.size()); ++j) z[j] = 1;
      const Estimate e =
          estimate_event(graph(l, mixed_boundary(*l, part, z), beta), events::origin_to_ghost(*l), s);
      CHECK(e.mean - prev.mean >= -3.0 * paired_stderr(e, prev));
      prev = e;
    }
    const Estimate w = estimate_event(graph(l, wired_boundary(), beta), events::origin_to_ghost(*l), s);
    CHECK(w.mean == prev.mean);
  }
}
