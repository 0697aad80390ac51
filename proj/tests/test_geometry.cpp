#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stretchlab/geometry.hpp"

using namespace stretchlab::geom;

TEST(Geometry, DistanceAlongDiameter) {
  EXPECT_NEAR(distance(0.0, std::tanh(0.5)), 1.0, 1e-14);
  EXPECT_NEAR(distance_from_origin(polar_point(3.0, 1.1)), 3.0, 1e-12);
  EXPECT_NEAR(distance(polar_point(1.0, 0.0), polar_point(1.0, std::numbers::pi)), 2.0, 1e-12);
}

TEST(Geometry, MobiusIsIsometryAndInverse) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const Mobius m = Mobius::translation(0.8) * Mobius::rotation(0.3) * Mobius::to_origin({0.2, -0.4});
  for (int k = 0; k < 50; ++k) {
    const Complex z{u(rng), u(rng)}, w{u(rng), u(rng)};
    EXPECT_NEAR(distance(m(z), m(w)), distance(z, w), 1e-10);
    EXPECT_NEAR(std::abs(m.inverse()(m(z)) - z), 0.0, 1e-12);
  }
  EXPECT_NEAR(std::abs(Mobius::to_origin({0.3, 0.5})({0.3, 0.5})), 0.0, 1e-15);
  EXPECT_NEAR(distance_from_origin(Mobius::translation(1.7)(0.0)), 1.7, 1e-12);
}

TEST(Geometry, GeodesicPointSplitsDistance) {
  const Complex z{0.1, 0.5}, w{-0.6, -0.2};
  const double d = distance(z, w);
  for (double f : {0.1, 0.5, 0.9}) {
    const Complex p = geodesic_point(z, w, f);
    EXPECT_NEAR(distance(z, p), f * d, 1e-10);
    EXPECT_NEAR(distance(p, w), (1.0 - f) * d, 1e-10);
  }
  EXPECT_NEAR(distance(z, midpoint(z, w)), 0.5 * d, 1e-10);
}

TEST(Geometry, FermiCoordinatesRoundTrip) {
  const Geodesic g{0.4, 2.9};
  const FermiFrame frame(g);
  for (double t : {-1.5, 0.0, 0.7}) {
    for (double rho : {-0.8, 0.0, 0.35}) {
      const Complex z = frame.point(t, rho);
      const auto [t2, rho2] = frame.coordinates(z);
      EXPECT_NEAR(t2, t, 1e-10);
      EXPECT_NEAR(rho2, rho, 1e-10);
      EXPECT_NEAR(frame.distance(z), std::abs(rho), 1e-10);
    }
  }
  // Points on the geodesic are spaced by arclength.
  EXPECT_NEAR(distance(frame.point(-0.5, 0.0), frame.point(1.0, 0.0)), 1.5, 1e-10);
}

TEST(Geometry, SameGeodesicRespectsOrientation) {
  const Geodesic g{0.2, 3.0}, h{3.0, 0.2};
  EXPECT_TRUE(same_geodesic(g, g, 1e-12));
  EXPECT_FALSE(same_geodesic(g, h, 1e-6));
  EXPECT_TRUE(same_geodesic(g, h, 1e-6, false));
  EXPECT_NEAR(angle_gap(0.1, 2.0 * std::numbers::pi - 0.1), 0.2, 1e-14);
}
