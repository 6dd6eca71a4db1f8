#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <set>

#include "fklab/domination.hpp"

using namespace fklab;

namespace {

const DetectorSetup& small_setup() {
  static const DetectorSetup s(CouplingKernel::nearest_neighbor(2), 8, 2, 16, 72);
  return s;
}

std::vector<std::uint8_t> all_states(const BlockLayout& l, std::uint8_t v) { return std::vector<std::uint8_t>(l.num_blocks(), v); }

// Upper tail P(X >= k) of Binomial(n, p), summed in logs.
double upper_tail(std::uint64_t n, std::uint64_t k, double p) {
  double below = 0.0;
  for (std::uint64_t i = 0; i < k; ++i) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(double(n - i) + 1.0);
    below += std::exp(lc + i * std::log(p) + double(n - i) * std::log1p(-p));
  }
  return 1.0 - below;
}

// One-sided 95% lower confidence bound by bisection on the tail.
double cp_lower(std::uint64_t n, std::uint64_t k) {
  double lo = 0.0, hi = double(k) / double(n);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (upper_tail(n, k, mid) < 0.05 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

HistoryTally single_slab(std::uint64_t n, std::uint64_t ones) {
  HistoryTally t(1);
  for (std::uint64_t i = 0; i < n; ++i) t.add({static_cast<std::uint8_t>(i < ones ? 1 : 0)});
  return t;
}

}  // namespace

TEST_SUITE("domination") {
  TEST_CASE("detector geometry") {
    const auto& s = small_setup();
    CHECK(s.num_slabs() == 32);
    CHECK(s.exclusion_half_side() == 32);
    CHECK(s.truncation_radius() == 74 - 9);
    std::size_t ext = 0;
    for (std::size_t k = 0; k < s.num_slabs(); ++k) {
      CHECK(s.path_bonds(k).size() == 13);  // i = 0 .. 3K/4
      CHECK(s.exterior_bonds(k).size() == 2);
      CHECK_FALSE(s.slab_bonds(k).empty());
      ext += s.exterior_bonds(k).size();
    }
    CHECK(ext == s.inner()->num_exterior());
    CHECK_THROWS_AS(DetectorSetup(CouplingKernel::nearest_neighbor(2), 8, 2, 16, 56), std::invalid_argument);
    CHECK_THROWS_AS(DetectorSetup(CouplingKernel::nearest_neighbor(2), 12, 2, 16, 72), std::invalid_argument);
  }

  TEST_CASE("Z on hand-built configurations") {
    const auto& s = small_setup();
    const auto& layout = s.layout();
    const auto good = grid_from_states(layout, all_states(layout, 1));
    const std::size_t nb = s.window()->num_interior();

    SUBCASE("everything closed") {
      const BondConfig w(nb, false);
      for (std::size_t k = 0; k < s.num_slabs(); ++k) CHECK_FALSE(detect_Z(s, w, good, k).X());
    }
    SUBCASE("everything open: no block is good") {
      const BondConfig w(nb, true);
      const auto grid = classify_grid(*s.window(), w, layout);
      CHECK(grid.good_fraction() == 0.0);
      for (std::size_t k = 0; k < s.num_slabs(); ++k) {
        const ZDetail z = detect_Z(s, w, grid, k);
        CHECK(z.slab_open);
        CHECK(z.path_open);
        CHECK_FALSE(z.y_good);
        CHECK_FALSE(z.Z());
      }
    }
    SUBCASE("one slab and its path opened") {
      for (std::size_t k : {std::size_t{0}, std::size_t{13}, std::size_t{31}}) {
        BondConfig w(nb, false);
        for (auto e : s.slab_bonds(k)) w.set(e, true);
        for (auto e : s.path_bonds(k)) w.set(e, true);
        const auto z = detect_Z_all(s, w, good);
        for (std::size_t j = 0; j < z.size(); ++j) CHECK(z[j] == (j == k ? 1 : 0));

        auto lonely = all_states(layout, 0);
        lonely[s.y_block(k)] = 1;
        const ZDetail d = detect_Z(s, w, grid_from_states(layout, lonely), k);
        CHECK(d.X());
        CHECK_FALSE(d.reaches_frame);

        w.set(s.path_bonds(k).back(), false);
        CHECK_FALSE(detect_Z(s, w, good, k).X());
      }
    }
  }

  TEST_CASE("Z-hat reads the exterior bonds of each slab") {
    const auto& s = small_setup();
    BondConfig ext(s.inner()->num_exterior(), false);
    for (auto z : detect_Zhat_all(s, ext)) CHECK(z == 0);
    ext.set(s.exterior_bonds(5).front(), true);
    const auto z = detect_Zhat_all(s, ext);
    for (std::size_t k = 0; k < z.size(); ++k) CHECK(z[k] == (k == 5 ? 1 : 0));
    CHECK_THROWS_AS(detect_Zhat(s, BondConfig(3), 0), std::invalid_argument);
  }

  TEST_CASE("property: pi^Z interpolates between free and wired") {
    const auto& s = small_setup();
    const auto& inner = s.inner();
    const auto table = make_intensities(*inner, 0.5);
    const std::size_t M = s.num_slabs();
    const FkGraph gw(inner, wired_boundary(), table), gf(inner, free_boundary(), table);
    const FkGraph g1(inner, build_pi_Z(s, std::vector<std::uint8_t>(M, 1)), table);
    const FkGraph g0(inner, build_pi_Z(s, std::vector<std::uint8_t>(M, 0)), table);
    std::mt19937_64 gen(4);
    for (int t = 0; t < 20; ++t) {
      BondConfig w(inner->num_interior());
      for (std::size_t e = 0; e < w.size(); ++e) w.set(e, gen() % 2);
      const auto cw = build_clusters(gw, w), c1 = build_clusters(g1, w);
      const auto cf = build_clusters(gf, w), c0 = build_clusters(g0, w);
      CHECK(cw.finite_cluster_count() == c1.finite_cluster_count());
      CHECK(cf.finite_cluster_count() == c0.finite_cluster_count());
      for (std::uint32_t x = 0; x < inner->num_sites(); ++x) {
        CHECK(cw.connected_to_ghost(x) == c1.connected_to_ghost(x));
        CHECK_FALSE(c0.connected_to_ghost(x));
      }
    }
    // with every bond closed the ghost holds exactly the sites next to wired slabs
    std::vector<std::uint8_t> Z(M);
    for (std::size_t k = 0; k < M; ++k) Z[k] = (k % 3 == 0) ? 1 : 0;
    const FkGraph gz(inner, build_pi_Z(s, Z), table);
    const auto c = build_clusters(gz, BondConfig(inner->num_interior(), false));
    std::set<std::uint32_t> expect;
    for (std::size_t e = 0; e < inner->num_exterior(); ++e)
      if (Z[s.partition().slab_of_boundary[inner->exterior_outer(e)]]) expect.insert(inner->exterior_inner(e));
    for (std::uint32_t x = 0; x < inner->num_sites(); ++x) CHECK(c.connected_to_ghost(x) == (expect.count(x) == 1));
  }

  TEST_CASE("history tally") {
    HistoryTally t(3);
    t.add({1, 0, 1});
    t.add({1, 1, 1});
    t.add({0, 0, 0});
    CHECK(t.samples() == 3);
    CHECK(t.marginal(0).ones == 2);
    const std::vector<std::uint8_t> h1{1};
    const auto c = t.find(1, h1);
    REQUIRE(c);
    CHECK(c->n == 2);
    CHECK(c->ones == 1);
    const std::vector<std::uint8_t> h2{0, 1};
    CHECK_FALSE(t.find(2, h2));
    CHECK(t.histories(2).size() == 3);
    CHECK(history_key(std::vector<std::uint8_t>{1, 0, 1}) == "101");
    CHECK_THROWS_AS(t.add({1}), std::invalid_argument);
  }

  TEST_CASE("alpha with Clopper-Pearson lower bound") {
    CHECK(cp_lower(4000, 8) == doctest::Approx(0.000995581579747).epsilon(1e-9));
    CHECK(cp_lower(1000, 1) == doctest::Approx(0.000051291978909).epsilon(1e-9));

    const auto r = alpha_report(single_slab(4000, 8), 1000);
    CHECK(r.alpha == doctest::Approx(0.002));
    CHECK(r.alpha_lower == doctest::Approx(0.000995581579747).epsilon(1e-9));
    CHECK(r.coverage == 1.0);
    CHECK(alpha_report(single_slab(1000, 1), 1000).alpha_lower == doctest::Approx(0.000051291978909).epsilon(1e-9));
    CHECK(alpha_report(single_slab(1000, 0), 1000).alpha_lower == 0.0);

    const auto thin = alpha_report(single_slab(999, 500), 1000);
    CHECK_FALSE(thin.any_used());
    CHECK(thin.alpha == 0.0);

    // the minimum runs over histories, not marginals
    HistoryTally t(2);
    for (int i = 0; i < 2000; ++i) t.add({static_cast<std::uint8_t>(i % 2), static_cast<std::uint8_t>(i % 4 == 1 ? 1 : 0)});
    const auto m = alpha_report(t, 100);
    CHECK(m.alpha == doctest::Approx(0.0));
    CHECK(m.argmin_k == 1);
    CHECK(m.argmin_history == "0");
    CHECK(m.marginal[1] == doctest::Approx(0.25));
  }

  TEST_CASE("upper-bound check") {
    const auto high = check_upper_bound(single_slab(1000, 500), 0.1, 100);
    CHECK(high.checked == 1);
    CHECK(high.violations == 1);
    const auto ok = check_upper_bound(single_slab(1000, 100), 0.1, 100);
    CHECK(ok.violations == 0);
    CHECK(ok.worst_z == doctest::Approx(0.0));
    CHECK(check_upper_bound(single_slab(10, 10), 0.1, 100).checked == 0);
  }

  TEST_CASE("monotone coupling") {
    SUBCASE("cell frequencies") {
      const auto Q = ConditionalOracle::constant(0.6), Qh = ConditionalOracle::constant(0.2);
      CounterStream rng(7, 0);
      const int n = 100000;
      int c11 = 0, c10 = 0, c00 = 0;
      for (int i = 0; i < n; ++i) {
        const auto js = couple(Q, Qh, 1, rng);
        REQUIRE(js.Z[0] >= js.Zhat[0]);
        (js.Zhat[0] ? c11 : js.Z[0] ? c10 : c00) += 1;
      }
      const double sd = std::sqrt(0.25 / n);
      CHECK(std::abs(c11 / double(n) - 0.2) < 4 * sd);
      CHECK(std::abs(c10 / double(n) - 0.4) < 4 * sd);
      CHECK(std::abs(c00 / double(n) - 0.4) < 4 * sd);
      CHECK(Q.queries() == std::uint64_t(n));
    }
    SUBCASE("zero lower chain") {
      const auto Q = ConditionalOracle::constant(0.3), Qh = ConditionalOracle::constant(0.0);
      CounterStream rng(1, 0);
      for (int i = 0; i < 100; ++i)
        for (auto z : couple(Q, Qh, 16, rng).Zhat) CHECK(z == 0);
    }
    SUBCASE("violation is reported") {
      const auto Q = ConditionalOracle::constant(0.1), Qh = ConditionalOracle::constant(0.2);
      CounterStream rng(1, 0);
      CHECK_THROWS_AS(couple(Q, Qh, 4, rng), DominationViolation);
      CHECK_THROWS_AS(ConditionalOracle::constant(1.5)(0, {}), std::domain_error);
    }
    SUBCASE("property: each chain keeps its conditional law") {
      auto last = [](std::span<const std::uint8_t> h) { return h.empty() ? 0 : h.back(); };
      const ConditionalOracle Q([&](std::size_t, std::span<const std::uint8_t> h) { return 0.3 + 0.4 * last(h); });
      const ConditionalOracle Qh([&](std::size_t, std::span<const std::uint8_t> h) { return 0.1 + 0.1 * last(h); });
      HistoryTally tz(4), th(4);
      CounterStream rng(11, 0);
      for (int i = 0; i < 40000; ++i) {
        const auto js = couple(Q, Qh, 4, rng);
        for (std::size_t k = 0; k < 4; ++k) REQUIRE(js.Z[k] >= js.Zhat[k]);
        tz.add(js.Z);
        th.add(js.Zhat);
      }
      auto check_cell = [](const HistoryTally& t, std::size_t k, std::vector<std::uint8_t> h, double q) {
        const auto c = t.find(k, h);
        REQUIRE(c);
        const double f = double(c->ones) / double(c->n);
        CHECK(std::abs(f - q) < 4.0 * std::sqrt(q * (1 - q) / double(c->n)));
      };
      check_cell(tz, 0, {}, 0.3);
      check_cell(tz, 1, {1}, 0.7);
      check_cell(tz, 2, {0, 1}, 0.7);
      check_cell(tz, 3, {1, 1, 0}, 0.3);
      check_cell(th, 1, {0}, 0.1);
      check_cell(th, 2, {0, 1}, 0.2);
    }
  }

  TEST_CASE("empirical oracle falls back to the marginal") {
    HistoryTally t(2);
    for (int i = 0; i < 100; ++i) t.add({1, static_cast<std::uint8_t>(i < 30 ? 1 : 0)});
    t.add({0, 1});
    auto tp = std::make_shared<const HistoryTally>(t);
    const auto Q = ConditionalOracle::empirical(tp, 50, ConditionalOracle::Bound::kLower, 0.5);
    CHECK(Q(1, std::vector<std::uint8_t>{1}) == doctest::Approx(0.3));
    CHECK(Q(1, std::vector<std::uint8_t>{0}) == doctest::Approx(31.0 / 101.0));
    CHECK(Q.bound_violations() == 2);
  }

  TEST_CASE("Z sampling is identical serial and parallel") {
    const auto& s = small_setup();
    const auto a = sample_Z(s, 0.8, 4, 1, 2, 3, Exec::kSerial);
    const auto b = sample_Z(s, 0.8, 4, 1, 2, 3, Exec::kParallel);
    CHECK(a.patterns == b.patterns);
    CHECK(a.good_fraction == b.good_fraction);
    CHECK(a.x_counts == b.x_counts);
    const auto zero = sample_Z(s, 0.0, 3, 1, 0, 3);
    for (auto c : zero.x_counts) CHECK(c == 0);
  }

  TEST_CASE("precondition failures") {
    SandwichConfig cfg;
    cfg.window_samples = 20;
    cfg.n_min = 10;
    cfg.field_sweeps = 200;
    cfg.coupled_draws = 100;
    cfg.psi_sweeps = 64;
    cfg.s = 0.99;
    CHECK_THROWS_AS(domination_chain_report(CouplingKernel::nearest_neighbor(2), cfg), PreconditionFailure);
    cfg.n_min = 1000;  // no history is covered
    cfg.s = -1.0;
    CHECK_THROWS_AS(domination_chain_report(CouplingKernel::nearest_neighbor(2), cfg), PreconditionFailure);
    cfg.beta = 0.0;  // alpha-hat is zero
    cfg.n_min = 10;
    CHECK_THROWS_AS(domination_chain_report(CouplingKernel::nearest_neighbor(2), cfg), PreconditionFailure);
    CHECK_THROWS_AS(sample_Zhat(small_setup(), 0.8, 1.0, RunSpec{}), std::invalid_argument);
  }

  TEST_CASE("an opened slab costs p per bond") {
    // P(X_k) <= p^(#slab bonds) under any FK measure with q >= 1.
    const DetectorSetup wide(CouplingKernel::nearest_neighbor(2), 48, 32, 16, 104);
    const double p = 1.0 - std::exp(-2.0 * 0.8);
    for (std::size_t k = 0; k < wide.num_slabs(); ++k) {
      const double n = double(wide.slab_bonds(k).size());
      CHECK(n >= 3 * 32 - 1);
      CHECK(std::pow(p, n) < 1e-6);
    }
  }
}
