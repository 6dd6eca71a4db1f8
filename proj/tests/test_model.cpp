#include <doctest.h>

#include <cmath>

#include "fklab/lattice.hpp"
#include "fklab/model.hpp"

using namespace fklab;

TEST_SUITE("model") {
  TEST_CASE("bond intensity") {
    CHECK(bond_intensity(0.0, 1.0) == 0.0);
    CHECK(bond_intensity(std::log(2.0), 1.0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(bond_intensity(50.0, 1.0) < 1.0);
    CHECK(bond_intensity(1e6, 1.0) < 1.0);
    CHECK(bond_intensity(20.0, 1.0) > 1.0 - 1e-12);
    CHECK_THROWS_AS(bond_intensity(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bond_intensity(0.1, -1.0), std::invalid_argument);
  }

  TEST_CASE("boundary intensity and its inverse") {
    CHECK(boundary_intensity(0.0, 1.0) == 0.0);
    CHECK(boundary_intensity(0.5 * std::log(2.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(boundary_intensity(-1.0, 1.0), std::invalid_argument);
    CHECK(field_from_intensity(0.0) == 0.0);
    CHECK(field_from_intensity(0.5) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
    CHECK(field_from_intensity(0.75) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(field_from_intensity(1.0), std::invalid_argument);
    CHECK_THROWS_AS(field_from_intensity(-0.01), std::invalid_argument);
  }

  TEST_CASE("field override on a single-J kernel gives s_h = s") {
    const Lattice l(Box(2, 2), CouplingKernel::nearest_neighbor(2));
    const double s = 0.3;
    const auto t = make_intensities_with_field(l, 0.7, field_from_intensity(s));
    REQUIRE(t.has_boundary_override);
    CHECK(t.exterior.size() == l.num_exterior());
    CHECK(t.max_exterior() == doctest::Approx(s).epsilon(1e-12));
    for (double p : t.interior) CHECK(p == doctest::Approx(bond_intensity(0.7, 1.0)));
    const auto plain = make_intensities(l, 0.7);
    CHECK_FALSE(plain.has_boundary_override);
  }

  TEST_CASE("property: intensities are strictly increasing") {
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
      const double p = bond_intensity(0.01 * i, 1.0);
      CHECK(p > prev);
      CHECK(p >= 0.0);
      CHECK(p < 1.0);
      prev = p;
    }
    prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
      const double p = bond_intensity(0.35, 0.02 * i);
      CHECK(p > prev);
      prev = p;
    }
  }

  TEST_CASE("property: field round trip on [0, 0.999]") {
    for (int i = 0; i <= 999; ++i) {
      const double s = 0.001 * i;
      const double back = boundary_intensity(field_from_intensity(s), 1.0);
      if (s == 0.0)
        CHECK(back == 0.0);
      else
        CHECK(std::abs(back - s) / s <= 1e-12);
    }
  }

  TEST_CASE("property: kernels are symmetric and ferromagnetic") {
    const CouplingKernel k(2, {{Site{1, 0}, 1.0}, {Site{1, 1}, 0.5}, {Site{0, 2}, 0.25}});
    CHECK(k.range() == 2);
    CHECK_FALSE(k.is_nearest_neighbor());
    for (const auto& e : k.support()) CHECK(k(-e.displacement) == e.J);
    CHECK(k(Site{0, 0}) == 0.0);
    CHECK(k(Site{3, 0}) == 0.0);
    CHECK(k.support().size() == 2 * k.positive_support().size());

    CHECK_THROWS_AS(CouplingKernel(2, {{Site{1, 0}, -0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(CouplingKernel(2, {{Site{1, 0}, 1.0}, {Site{0, 1}, -1e-9}}), std::invalid_argument);
    CHECK_THROWS_AS(CouplingKernel(2, {{Site{0, 0}, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(CouplingKernel(2, {{Site{1, 0}, 1.0}, {Site{-1, 0}, 2.0}}), std::invalid_argument);
    CHECK(CouplingKernel::nearest_neighbor(3).is_nearest_neighbor());
  }
}
