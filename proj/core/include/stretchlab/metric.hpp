#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stretchlab/fuchsian.hpp"

namespace stretchlab::metric {

enum class BumpDirection { Shrink, Enlarge };

struct CollarBumpParams {
  std::string axis_word = "a1";
  double epsilon = 0.3;  // tube radius (outer radius of the transition for enlarge)
  double s = 0.2;        // shrink depth, m_s(0) = 1 - s
  BumpDirection direction = BumpDirection::Shrink;
  double plateau = 1.5;     // enlarge: value on the core
  double core_width = 0.3;  // enlarge: half-width of the plateau core
  int depth = 3;            // word length of the consulted axis translates
};

// m_s(rho): 1 - s exp(1 - 1/(1 - (rho/eps)^2)) inside the tube, 1 outside.
double shrink_multiplier(double rho, double epsilon, double s);
// Smooth step: 1 for rho <= w, 0 for rho >= eps.
double plateau_step(double rho, double w, double epsilon);

// Gamma-invariant positive function on the disk; g = phi * g_hyp.
class ConformalFactor {
 public:
  enum class Kind { Constant, CollarBump, Composite };

  ConformalFactor();  // phi == 1
  static ConformalFactor constant(double a);
  static ConformalFactor collar_bump(const SurfaceGroup& group, const CollarBumpParams& params);
  static ConformalFactor composite(std::vector<ConformalFactor> parts);

  Kind kind() const;
  double operator()(Complex x) const { return evaluate(x); }
  double evaluate(Complex x) const;
  // Same as evaluate for a point already reduced into the octagon.
  double evaluate_reduced(Complex x) const;

  bool is_constant() const;
  double constant_value() const;  // only for constant factors
  double max_value() const;
  double min_value() const;

  const CollarBumpParams* collar_params() const;
  // Minimum distance to the consulted axis translates (collar bumps only).
  double distance_to_axis(Complex x) const;
  std::vector<GroupElement> translate_set() const;
  std::size_t lift_count() const;

  std::string describe() const;  // JSON text

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Max over words of length <= max_len and grid points of |phi(x) - phi(g x)|.
double invariance_residual(const ConformalFactor& phi, const SurfaceGroup& group, const SampleGrid& grid,
                           int max_len = 3);

// K = (-1 - 0.5 Delta log phi) / phi for the metric phi * g_hyp.
double curvature(const ConformalFactor& phi, Complex x, double h = 1e-3);

struct CurvatureReport {
  std::vector<Complex> grid;
  std::vector<double> K_values;
  double K_min = 0.0;
  double K_max = 0.0;
  bool negatively_curved = false;
  std::size_t nonnegative_count = 0;
};

CurvatureReport curvature_bounds(const ConformalFactor& phi, const SampleGrid& grid, double h = 1e-3,
                                 bool require_negative = true);

// 0 < K_min(g1) / K_max(g2) < L^2.
bool check_gk_condition(const CurvatureReport& g1, const CurvatureReport& g2, double L);

// {"kind": "constant", "a": 4} or {"kind": "collar_bump", ...} or
// {"kind": "composite", "parts": [...]}.
ConformalFactor factor_from_json(const std::string& json_text, const SurfaceGroup& group);

}  // namespace stretchlab::metric
