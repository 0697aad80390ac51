#pragma once

#include <optional>
#include <vector>

#include "stretchlab/fuchsian.hpp"
#include "stretchlab/metric.hpp"

namespace stretchlab::lengths {

using metric::ConformalFactor;

struct PolyPath {
  std::vector<Complex> points;
  std::optional<GroupElement> closure;  // closed mode: points.back() == closure(points.front())
};

struct LengthResult {
  double value = 0.0;
  int iterations = 0;
  std::vector<double> energy_history;
  bool converged = false;
  PolyPath path;
  double closure_residual = 0.0;
  double max_offset = 0.0;  // largest normal displacement from the initial geodesic
};

struct LengthOptions {
  double points_per_unit = 8.0;
  int min_points = 16;
  int max_iters = 200;
  double tol = 1e-12;
  double max_step = 0.25 * 0.5 * octagon::systole();  // injectivity radius / 4
  double fd_step = 1e-4;
  int fixed_points = 0;  // overrides the density rule when > 0
};

// Sum of sqrt(phi(midpoint)) * d_hyp over segments.
double discrete_length(const ConformalFactor& phi, const PolyPath& path);

int point_count(double hyperbolic_length, const LengthOptions& options);

// Minimizes the discrete phi-length in the free homotopy class, starting from
// the hyperbolic axis. Not converging is reported through the flag.
LengthResult closed_length(const ConformalFactor& phi, const ConjugacyClass& cls, const LengthOptions& options = {});
LengthResult closed_length(const ConformalFactor& phi, const ConjugacyClass& cls, int n_points, int max_iters,
                           double tol);

// Minimized discrete phi-length with fixed endpoints.
LengthResult distance_path(const ConformalFactor& phi, Complex x, Complex y, const LengthOptions& options = {});
// Throws NotConverged.
double distance(const ConformalFactor& phi, Complex x, Complex y, const LengthOptions& options = {});
double distance(const ConformalFactor& phi, Complex x, Complex y, int n_points, double tol);

struct TangentVector {
  Complex point;
  double direction = 0.0;  // angle of the tangent in the disk chart
};

// Hyperbolic geodesic from v, parametrized by arclength of the metric
// phi_source * g_hyp along it.
class Ray {
 public:
  Ray(const ConformalFactor& source, const TangentVector& v);
  Complex at(double t) const;

 private:
  double hyperbolic_parameter(double t) const;

  const ConformalFactor* source_;
  geom::Mobius back_;
  double direction_;
  double constant_speed_ = 0.0;  // > 0 when the source is constant
};

struct TimeChangeOptions {
  std::vector<double> horizons{6.0, 8.0};  // Richardson pair, error ~ exp(-T)
  double step = 1e-2;
  LengthOptions lengths{16.0, 32, 200, 1e-14};
};

// Finite-horizon Busemann quotient of the target metric along the
// source-metric ray from v.
double infinitesimal_time_change(const ConformalFactor& source, const ConformalFactor& target,
                                 const TangentVector& v, const TimeChangeOptions& options = {});
// Hyperbolic source.
double infinitesimal_time_change(const ConformalFactor& phi, const TangentVector& v, double horizon, double step);

}  // namespace stretchlab::lengths
