#include <gtest/gtest.h>

#include <cmath>

#include "stretchlab/errors.hpp"
#include "stretchlab/metric.hpp"

using namespace stretchlab;
using metric::ConformalFactor;

namespace {

const SurfaceGroup& G() { return shared_bolza_group(); }

ConformalFactor shrink(double s, double eps) {
  metric::CollarBumpParams p;
  p.s = s;
  p.epsilon = eps;
  return ConformalFactor::collar_bump(G(), p);
}

ConformalFactor enlarge(double a = 1.5, double eps = 1.0, double w = 0.3) {
  metric::CollarBumpParams p;
  p.direction = metric::BumpDirection::Enlarge;
  p.plateau = a;
  p.epsilon = eps;
  p.core_width = w;
  return ConformalFactor::collar_bump(G(), p);
}

// The axis of a1 is the real diameter.
Complex on_axis_of_a1(double t, double rho) { return geom::FermiFrame(axis(G().generators[0])).point(t, rho); }

}  // namespace

TEST(Factor, ConstantEvaluates) {
  const auto phi = ConformalFactor::constant(4.0);
  EXPECT_DOUBLE_EQ(phi({0.3, -0.2}), 4.0);
  EXPECT_TRUE(phi.is_constant());
  EXPECT_DOUBLE_EQ(ConformalFactor()({0.1, 0.1}), 1.0);
}

TEST(Factor, ShrinkProfile) {
  EXPECT_NEAR(metric::shrink_multiplier(0.0, 0.3, 0.2), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(metric::shrink_multiplier(0.3, 0.3, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(metric::shrink_multiplier(0.5, 0.3, 0.2), 1.0);
  const auto phi = shrink(0.2, 0.3);
  EXPECT_NEAR(phi(on_axis_of_a1(0.4, 0.0)), 0.64, 1e-12);
  EXPECT_NEAR(phi(on_axis_of_a1(0.0, 0.3)), 1.0, 1e-12);
  EXPECT_NEAR(phi(on_axis_of_a1(0.0, -0.45)), 1.0, 1e-12);
  EXPECT_NEAR(phi.min_value(), 0.64, 1e-12);
}

TEST(Factor, PlateauStep) {
  EXPECT_DOUBLE_EQ(metric::plateau_step(0.1, 0.3, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(metric::plateau_step(1.2, 0.3, 1.0), 0.0);
  double prev = 1.0;
  for (double rho = 0.3; rho <= 1.0; rho += 0.05) {
    const double v = metric::plateau_step(rho, 0.3, 1.0);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
  const auto phi = enlarge();
  EXPECT_NEAR(phi(on_axis_of_a1(0.2, 0.1)), 1.5, 1e-12);
}

TEST(Factor, Invariance) {
  const auto grid = octagon_grid(10, 32);
  EXPECT_LE(metric::invariance_residual(shrink(0.2, 0.3), G(), grid), 1e-6);
  EXPECT_LE(metric::invariance_residual(enlarge(), G(), grid), 1e-6);
  EXPECT_LE(metric::invariance_residual(ConformalFactor::constant(2.0), G(), grid), 1e-12);
}

TEST(Factor, FromJson) {
  const auto phi = metric::factor_from_json(R"({"kind": "constant", "a": 3})", G());
  EXPECT_DOUBLE_EQ(phi.constant_value(), 3.0);
  const auto bump = metric::factor_from_json(R"({"kind": "collar_bump", "axis_word": "a1", "epsilon": 0.3, "s": 0.2})", G());
  EXPECT_NEAR(bump(on_axis_of_a1(0.0, 0.0)), 0.64, 1e-12);
  EXPECT_THROW(metric::factor_from_json(R"({"kind": "constant", "a": -1})", G()), Error);
  EXPECT_THROW(metric::factor_from_json(R"({"kind": "nope"})", G()), Error);
}

TEST(Curvature, ConstantFactors) {
  for (Complex x : {Complex{0.0, 0.0}, Complex{0.3, 0.4}, Complex{-0.5, 0.1}}) {
    EXPECT_NEAR(metric::curvature(ConformalFactor(), x), -1.0, 1e-6);
    EXPECT_NEAR(metric::curvature(ConformalFactor::constant(4.0), x), -0.25, 1e-6);
  }
}

TEST(Curvature, ShrinkOnAxisMatchesClosedForm) {
  const double s = 0.2, eps = 0.3;
  const double expected = -(1.0 + 2.0 * s / (eps * eps * (1.0 - s))) / ((1.0 - s) * (1.0 - s));
  EXPECT_NEAR(metric::curvature(shrink(s, eps), on_axis_of_a1(0.3, 0.0)), expected, 1e-3 * std::abs(expected));
}

TEST(Curvature, BoundsAndRejection) {
  const auto grid = octagon_grid(8, 24);
  const auto hyp = metric::curvature_bounds(ConformalFactor(), grid);
  EXPECT_NEAR(hyp.K_min, -1.0, 1e-5);
  EXPECT_NEAR(hyp.K_max, -1.0, 1e-5);
  const auto scaled = metric::curvature_bounds(ConformalFactor::constant(4.0), grid);
  EXPECT_NEAR(scaled.K_max, -0.25, 1e-5);

  // A deep, thin tube has positively curved rims; sample across it.
  SampleGrid across;
  for (int k = 0; k <= 20; ++k) across.points.push_back(on_axis_of_a1(0.0, 0.1 * k / 20.0));
  across.spacing = 5e-3;
  try {
    metric::curvature_bounds(shrink(0.5, 0.1), across, 2e-4);
    ADD_FAILURE() << "expected NotNegativelyCurved";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotNegativelyCurved);
  }
  const auto report = metric::curvature_bounds(shrink(0.5, 0.1), across, 2e-4, false);
  EXPECT_FALSE(report.negatively_curved);
  EXPECT_GT(report.nonnegative_count, 0u);
}

TEST(Curvature, GromovKatokCondition) {
  const auto grid = octagon_grid(8, 24);
  const auto hyp = metric::curvature_bounds(ConformalFactor(), grid);
  EXPECT_TRUE(metric::check_gk_condition(hyp, hyp, 1.2));
  EXPECT_FALSE(metric::check_gk_condition(hyp, hyp, 0.5));

  // The tube surrogate is positively curved in its transition annulus, so
  // the plateau data is read off samples inside the core.
  const double a = 1.5;
  const auto phi = enlarge(a);
  EXPECT_FALSE(metric::curvature_bounds(phi, octagon_grid(30, 96), 1e-3, false).negatively_curved);
  SampleGrid core;
  for (double t : {-0.5, 0.0, 0.8}) {
    for (double rho : {-0.2, -0.1, 0.0, 0.1, 0.2}) core.points.push_back(on_axis_of_a1(t, rho));
  }
  core.spacing = 0.1;
  const auto plateau = metric::curvature_bounds(phi, core);
  EXPECT_NEAR(plateau.K_max, -1.0 / a, 1e-5);
  EXPECT_NEAR(plateau.K_min, -1.0 / a, 1e-5);
  EXPECT_FALSE(metric::check_gk_condition(hyp, plateau, std::sqrt(a)));
  EXPECT_TRUE(metric::check_gk_condition(hyp, plateau, 1.01 * std::sqrt(a)));
}
