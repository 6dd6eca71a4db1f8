#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <random>
#include <set>

#include "fklab/lattice.hpp"

using namespace fklab;

namespace {

CouplingKernel range2_1d() { return CouplingKernel(1, {{Site{1}, 1.0}, {Site{2}, 0.5}}); }

// Independent count of nearest-neighbour bonds: d (2N)^(d-1) (2N-1).
std::size_t nn_interior(int N, int d) {
  std::size_t s = 1;
  for (int i = 0; i < d - 1; ++i) s *= static_cast<std::size_t>(2 * N);
  return static_cast<std::size_t>(d) * s * static_cast<std::size_t>(2 * N - 1);
}

// Pairs of box sites at L1 distance one, by scanning all pairs.
std::size_t brute_nn_pairs(const Box& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < b.volume(); ++i) {
    const Site x = b.site_at(i);
    for (std::size_t j = i + 1; j < b.volume(); ++j) {
      const Site y = b.site_at(j);
      int l1 = 0;
      for (int a = 0; a < b.dim(); ++a) l1 += std::abs(x[a] - y[a]);
      n += l1 == 1;
    }
  }
  return n;
}

std::size_t nn_faces(int N, int d) {
  std::size_t s = 1;
  for (int i = 0; i < d - 1; ++i) s *= static_cast<std::size_t>(2 * N);
  return 2 * static_cast<std::size_t>(d) * s;
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("box sizes") {
    Box b1(1, 1);
    CHECK(b1.volume() == 2);
    CHECK(b1.lo() == 0);
    CHECK(b1.hi() == 1);
    CHECK(Box(2, 2).volume() == 16);
    CHECK(Box(4, 3).volume() == 512);
    CHECK_THROWS_AS(Box(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(Box(2, 0), std::invalid_argument);
  }

  TEST_CASE("site index is lexicographic and invertible") {
    Box b(3, 3);
    Site prev = b.site_at(0);
    CHECK(b.index_of(prev) == 0);
    for (std::size_t i = 1; i < b.volume(); ++i) {
      const Site s = b.site_at(i);
      CHECK(prev < s);
      CHECK(b.index_of(s) == i);
      CHECK(b.contains(s));
      prev = s;
    }
  }

  TEST_CASE("nearest-neighbour bonds of small boxes") {
    const Lattice l2(Box(1, 2), CouplingKernel::nearest_neighbor(2));
    CHECK(l2.num_interior() == 4);

    const Lattice l1(Box(1, 1), CouplingKernel::nearest_neighbor(1));
    REQUIRE(l1.num_interior() == 1);
    CHECK(l1.bonds().interior[0].a == Site{0});
    CHECK(l1.bonds().interior[0].b == Site{1});
    const auto cl = l1.bonds().closure();
    REQUIRE(cl.size() == 3);
    CHECK(cl[0].a == Site{-1});
    CHECK(cl[0].b == Site{0});
    CHECK(cl[2].a == Site{1});
    CHECK(cl[2].b == Site{2});
  }

  TEST_CASE("range-2 kernel in one dimension") {
    const Lattice l(Box(1, 1), range2_1d());
    REQUIRE(l.num_interior() == 1);
    std::set<int> outer;
    for (const auto& b : l.bonds().exterior) {
      const Site o = l.box().contains(b.a) ? b.b : b.a;
      outer.insert(o[0]);
    }
    CHECK(outer == std::set<int>{-2, -1, 2, 3});
    CHECK(l.bonds().exterior.size() == 6);  // 0-(-1), 0-(-2), 0-2, 1-2, 1-3, 1-(-1)
  }

  TEST_CASE("boundary sites") {
    CHECK(Lattice(Box(4, 2), CouplingKernel::nearest_neighbor(2)).boundary().size() == 32);
    const Lattice l1(Box(2, 1), CouplingKernel::nearest_neighbor(1));
    REQUIRE(l1.boundary().size() == 2);
    CHECK(l1.boundary()[0] == Site{-2});
    CHECK(l1.boundary()[1] == Site{3});
    const Lattice r2(Box(2, 1), range2_1d());
    std::vector<int> got;
    for (const auto& s : r2.boundary()) got.push_back(s[0]);
    CHECK(got == std::vector<int>{-3, -2, 3, 4});
  }

  TEST_CASE("slab partition examples") {
    const Lattice l(Box(4, 2), CouplingKernel::nearest_neighbor(2));
    const auto p2 = slab_partition(l, 2);
    CHECK(p2.size() == 16);
    for (const auto& s : p2.slabs) CHECK(s.size() == 2);
    const auto p8 = slab_partition(l, 8);
    CHECK(p8.size() == 4);
    CHECK_THROWS_AS(slab_partition(l, 3), std::invalid_argument);
    CHECK_THROWS_AS(slab_partition(l, 0), std::invalid_argument);

    for (int N : {1, 3, 5}) {
      const Lattice l1(Box(N, 1), CouplingKernel::nearest_neighbor(1));
      const auto p = slab_partition(l1, 1);
      REQUIRE(p.size() == 2);
      CHECK(p.slabs[0] == std::vector<Site>{Site{-N}});
      CHECK(p.slabs[1] == std::vector<Site>{Site{N + 1}});
    }
  }

  TEST_CASE("property: bond enumeration matches closed-form counts") {
    for (int d = 1; d <= 3; ++d)
      for (int N = 1; N <= 8; ++N) {
        const Lattice l(Box(N, d), CouplingKernel::nearest_neighbor(d));
        CHECK(l.num_interior() == nn_interior(N, d));
        if (l.num_sites() <= 1024) CHECK(l.num_interior() == brute_nn_pairs(l.box()));
        CHECK(l.num_exterior() == nn_faces(N, d));
        CHECK(l.boundary().size() == nn_faces(N, d));
      }
  }

  TEST_CASE("property: canonical index is a bijection in lexicographic order") {
    std::mt19937 gen(7);
    for (int trial = 0; trial < 6; ++trial) {
      const int d = 1 + trial % 3;
      const int N = 1 + static_cast<int>(gen() % 3);
      std::vector<CouplingKernel::Entry> entries{{unit(d, 0), 1.0}};
      if (d >= 2) {
        Site diag(d);
        diag[0] = 1;
        diag[1] = 1;
        entries.push_back({diag, 0.25});
      }
      const Lattice l(Box(N, d), CouplingKernel(d, entries));
      const auto& in = l.bonds().interior;
      for (std::size_t i = 0; i < in.size(); ++i) {
        CHECK(in[i].index == i);
        CHECK(in[i].a < in[i].b);
        CHECK(in[i].J > 0.0);
        if (i) CHECK(in[i - 1] < in[i]);
        const auto idx = l.interior_index(in[i].a, in[i].b);
        REQUIRE(idx.has_value());
        CHECK(*idx == i);
        CHECK(l.interior_index(in[i].b, in[i].a) == idx);
        CHECK(l.box().site_at(l.interior_u(i)) == in[i].a);
        CHECK(l.box().site_at(l.interior_v(i)) == in[i].b);
      }
      const auto cl = l.bonds().closure();
      CHECK(cl.size() == in.size() + l.bonds().exterior.size());
      for (std::size_t i = 0; i < cl.size(); ++i) CHECK(cl[i].index == i);
    }
  }

  TEST_CASE("property: slab partition is a disjoint cover of the boundary") {
    auto check = [](const Lattice& l, int L, bool face_sizes) {
      const auto p = slab_partition(l, L);
      std::set<Site> seen;
      std::size_t total = 0;
      for (std::size_t s = 0; s < p.size(); ++s) {
        for (const Site& x : p.slabs[s]) seen.insert(x);
        total += p.slabs[s].size();
        if (s) CHECK(p.centers[s - 1] < p.centers[s]);
      }
      CHECK(total == seen.size());
      CHECK(seen == std::set<Site>(l.boundary().begin(), l.boundary().end()));
      for (std::size_t bi = 0; bi < l.boundary().size(); ++bi) {
        const auto k = p.slab_of_boundary[bi];
        REQUIRE(k < p.size());
        CHECK(std::count(p.slabs[k].begin(), p.slabs[k].end(), l.boundary()[bi]) == 1);
      }
      if (face_sizes) {
        std::size_t want = 1;
        for (int a = 0; a < l.box().dim() - 1; ++a) want *= static_cast<std::size_t>(L);
        for (const auto& s : p.slabs) CHECK(s.size() == want);
      }
    };
    for (int d = 1; d <= 3; ++d)
      for (int N = 1; N <= 8; ++N) {
        const Lattice l(Box(N, d), CouplingKernel::nearest_neighbor(d));
        for (int L = 1; L <= 2 * N; ++L) {
          if ((2 * N) % L) continue;
          CAPTURE(d);
          CAPTURE(N);
          CAPTURE(L);
          check(l, L, true);
        }
      }
    // range 2: corner sites join an adjacent slab
    for (int d = 1; d <= 2; ++d)
      for (int N = 1; N <= 4; ++N) {
        std::vector<CouplingKernel::Entry> e;
        for (int a = 0; a < d; ++a) {
          e.push_back({unit(d, a), 1.0});
          Site two(d);
          two[a] = 2;
          e.push_back({two, 0.5});
        }
        const Lattice l(Box(N, d), CouplingKernel(d, e));
        for (int L : {1, 2}) {
          CAPTURE(d);
          CAPTURE(N);
          CAPTURE(L);
          check(l, L, false);
        }
      }
  }
}
