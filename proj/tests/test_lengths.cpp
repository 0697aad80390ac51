#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stretchlab/errors.hpp"
#include "stretchlab/lengths.hpp"

using namespace stretchlab;
using lengths::ConformalFactor;

namespace {

const SurfaceGroup& G() { return shared_bolza_group(); }

ConformalFactor shrink(double s = 0.2, double eps = 0.3) {
  metric::CollarBumpParams p;
  p.s = s;
  p.epsilon = eps;
  return ConformalFactor::collar_bump(G(), p);
}

geom::FermiFrame a1_frame() { return geom::FermiFrame(axis(G().generators[0])); }

// Layered shortest path across the a1 collar: layers at fixed rho, any
// t-to-t' hop between consecutive layers, segments weighted by sqrt(phi) at
// their midpoint.
double layered_distance(const ConformalFactor& phi, double t0, double rho0, double t1, double rho1) {
  const auto frame = a1_frame();
  const int layers = 50;
  const double tlo = std::min(t0, t1) - 0.05, thi = std::max(t0, t1) + 0.05;
  const int nt = 401;
  std::vector<double> ts(nt);
  for (int j = 0; j < nt; ++j) ts[j] = tlo + (thi - tlo) * j / (nt - 1);
  auto cost = [&](Complex a, Complex b) { return std::sqrt(phi(geom::midpoint(a, b))) * geom::distance(a, b); };
  const Complex start = frame.point(t0, rho0), end = frame.point(t1, rho1);
  std::vector<Complex> prev_pts(nt), pts(nt);
  std::vector<double> prev(nt), cur(nt);
  const double rho_first = rho0 + (rho1 - rho0) / layers;
  for (int j = 0; j < nt; ++j) {
    prev_pts[j] = frame.point(ts[j], rho_first);
    prev[j] = cost(start, prev_pts[j]);
  }
  for (int k = 2; k < layers; ++k) {
    const double rho = rho0 + (rho1 - rho0) * k / layers;
    for (int j = 0; j < nt; ++j) {
      pts[j] = frame.point(ts[j], rho);
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < nt; ++i) best = std::min(best, prev[i] + cost(prev_pts[i], pts[j]));
      cur[j] = best;
    }
    std::swap(prev, cur);
    std::swap(prev_pts, pts);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nt; ++i) best = std::min(best, prev[i] + cost(prev_pts[i], end));
  return best;
}

}  // namespace

TEST(DiscreteLength, ConstantFactors) {
  lengths::PolyPath path;
  path.points = {geom::polar_point(1.0, 0.0), geom::polar_point(1.0, 3.14159265358979)};
  // Distance 2 between the points.
  EXPECT_NEAR(lengths::discrete_length(ConformalFactor(), path), 2.0, 1e-9);
  EXPECT_NEAR(lengths::discrete_length(ConformalFactor::constant(4.0), path), 4.0, 1e-9);
}

TEST(DiscreteLength, AxisSegmentGivesTranslationLength) {
  const auto frame = a1_frame();
  const double l = translation_length(G().generators[0]);
  lengths::PolyPath path;
  for (int k = 0; k < 20; ++k) path.points.push_back(frame.point(0.3 + l * k / 19.0, 0.0));
  EXPECT_NEAR(lengths::discrete_length(ConformalFactor(), path), l, 1e-9);
  EXPECT_LE(std::abs(G().generators[0].apply(path.points.front()) - path.points.back()), 1e-9);
}

TEST(ClosedLength, HyperbolicAndScaled) {
  for (const char* w : {"a1", "a1b1", "a1B2b1"}) {
    const auto cls = make_class(G(), word_from_string(w));
    const auto hyp = lengths::closed_length(ConformalFactor(), cls);
    EXPECT_TRUE(hyp.converged);
    EXPECT_NEAR(hyp.value, cls.length_g1, 1e-6 * cls.length_g1) << w;
    const auto scaled = lengths::closed_length(ConformalFactor::constant(4.0), cls);
    EXPECT_NEAR(scaled.value, 2.0 * cls.length_g1, 1e-4 * cls.length_g1) << w;
  }
}

TEST(ClosedLength, ShrinkAlongCollarCore) {
  const auto cls = make_class(G(), word_from_string("a1"));
  const auto r = lengths::closed_length(shrink(), cls);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 0.8 * cls.length_g1, 1e-3 * cls.length_g1);
}

TEST(ClosedLength, Invariants) {
  const auto phi = shrink();
  const auto cls = make_class(G(), word_from_string("a1b1A2"));
  const auto r = lengths::closed_length(phi, cls);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.closure_residual, 1e-9);
  EXPECT_NEAR(lengths::discrete_length(phi, r.path), r.value, 1e-12 * r.value);
  for (std::size_t k = 1; k < r.energy_history.size(); ++k) {
    EXPECT_LE(r.energy_history[k], r.energy_history[k - 1] * (1.0 + 1e-12));
  }
  // Never longer than the hyperbolic axis measured in phi.
  lengths::LengthOptions frozen;
  frozen.max_iters = 0;
  EXPECT_LE(r.value, lengths::closed_length(phi, cls, frozen).value + 1e-12);
}

TEST(ClosedLength, OrientationSymmetry) {
  const auto phi = shrink();
  const auto x = lengths::closed_length(phi, make_class(G(), word_from_string("a1b1")));
  const auto y = lengths::closed_length(phi, make_class(G(), word_from_string("B1A1")));
  EXPECT_NEAR(x.value, y.value, 1e-6);
}

TEST(ClosedLength, RefinementOracle) {
  const auto phi = shrink();
  const auto cls = make_class(G(), word_from_string("a1a1b1"));
  lengths::LengthOptions base;
  lengths::LengthOptions fine = base;
  fine.points_per_unit *= 4.0;
  fine.min_points *= 4;
  fine.max_iters *= 10;
  const double coarse = lengths::closed_length(phi, cls, base).value;
  const double refined = lengths::closed_length(phi, cls, fine).value;
  EXPECT_NEAR(coarse, refined, 1e-3 * refined);
  lengths::LengthOptions doubled = base;
  doubled.points_per_unit *= 2.0;
  doubled.min_points *= 2;
  EXPECT_NEAR(lengths::closed_length(phi, cls, doubled).value, coarse, 5e-4 * coarse);
}

TEST(Distance, HyperbolicAndScaled) {
  const Complex x{0.1, 0.2}, y{-0.4, 0.5};
  const double d = geom::distance(x, y);
  EXPECT_NEAR(lengths::distance(ConformalFactor(), x, y), d, 1e-6);
  EXPECT_NEAR(lengths::distance(ConformalFactor::constant(3.0), x, y), std::sqrt(3.0) * d, 1e-5);
}

TEST(Distance, AcrossCollarMatchesLayeredSearch) {
  const auto phi = shrink();
  const auto frame = a1_frame();
  const Complex x = frame.point(-0.1, -0.5), y = frame.point(0.2, 0.5);
  const double d = lengths::distance(phi, x, y);
  lengths::PolyPath straight;
  for (int k = 0; k <= 200; ++k) straight.points.push_back(geom::geodesic_point(x, y, k / 200.0));
  EXPECT_LE(d, lengths::discrete_length(phi, straight) + 1e-9);
  EXPECT_NEAR(d, layered_distance(phi, -0.1, -0.5, 0.2, 0.5), 1e-3);
}

TEST(TimeChange, ScaledMetric) {
  const lengths::TangentVector v{{0.1, -0.2}, 0.7};
  EXPECT_NEAR(lengths::infinitesimal_time_change(ConformalFactor(), ConformalFactor::constant(4.0), v), 2.0, 2e-3);
  EXPECT_NEAR(lengths::infinitesimal_time_change(ConformalFactor::constant(2.0), v, 6.0, 1e-2), std::sqrt(2.0), 2e-3);
}

TEST(TimeChange, AlongShrunkCollarCore) {
  const double s = 0.2;
  const lengths::TangentVector v{{0.0, 0.0}, 0.0};
  EXPECT_NEAR(lengths::infinitesimal_time_change(shrink(s), ConformalFactor(), v), 1.0 / (1.0 - s), 5e-3);
}

TEST(TimeChange, PeriodIntegralRecoversLength) {
  // Sum of a(phi_t v) dt over one g1-period of the core equals its g2-length.
  const double s = 0.2;
  const auto source = shrink(s);
  const double l = translation_length(G().generators[0]);
  const auto frame = a1_frame();
  const int samples = 4;
  const double dt = (1.0 - s) * l / samples;
  double total = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Complex p = frame.point(l * k / samples, 0.0);
    total += lengths::infinitesimal_time_change(source, ConformalFactor(), {p, std::arg(frame.point(l * k / samples + 1e-6, 0.0) - p)}) * dt;
  }
  EXPECT_NEAR(total, l, 1e-2 * l);
}
