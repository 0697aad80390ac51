#pragma once

// Poincare disk primitives. All points are complex numbers with |z| < 1,
// boundary points have |z| = 1.

#include <complex>
#include <utility>

namespace stretchlab::geom {

using Complex = std::complex<double>;

double distance(Complex z, Complex w);
double distance_from_origin(Complex z);

// Point at hyperbolic distance r from the origin in direction theta.
Complex polar_point(double r, double theta);

// Point a fraction of the way along the geodesic segment from z to w.
Complex geodesic_point(Complex z, Complex w, double fraction);
Complex midpoint(Complex z, Complex w);

Complex boundary_point(double angle);

// z -> (alpha z + beta) / (conj(beta) z + conj(alpha)), |alpha|^2 - |beta|^2 = 1.
struct Mobius {
  Complex alpha{1.0, 0.0};
  Complex beta{0.0, 0.0};

  Complex operator()(Complex z) const {
    return (alpha * z + beta) / (std::conj(beta) * z + std::conj(alpha));
  }
  Mobius inverse() const { return {std::conj(alpha), -beta}; }
  // Composition: (f * g)(z) = f(g(z)).
  Mobius operator*(const Mobius& g) const {
    return {alpha * g.alpha + beta * std::conj(g.beta), alpha * g.beta + beta * std::conj(g.alpha)};
  }

  static Mobius identity() { return {}; }
  static Mobius rotation(double theta);
  // Hyperbolic translation by t along the real diameter, towards +1.
  static Mobius translation(double t);
  // Isometry taking p to the origin and fixing the diameter through p.
  static Mobius to_origin(Complex p);
};

// Oriented geodesic given by its endpoint angles on the unit circle.
struct Geodesic {
  double repelling = 0.0;
  double attracting = 0.0;
};

bool same_geodesic(const Geodesic& g, const Geodesic& h, double tol, bool oriented = true);
double angle_gap(double a, double b);

// Fermi coordinates (t, rho) along an oriented geodesic: t is arclength
// along the geodesic measured from its closest point to the origin, rho is the
// signed distance (positive on the left).
class FermiFrame {
 public:
  FermiFrame() = default;
  explicit FermiFrame(const Geodesic& g);

  Complex point(double t, double rho) const;
  std::pair<double, double> coordinates(Complex z) const;
  double signed_distance(Complex z) const;
  double distance(Complex z) const;

  // Disk isometry that sends the geodesic to the real diameter with the
  // attracting end at +1.
  const Mobius& normalizer() const { return to_frame_; }

 private:
  Mobius to_frame_;
  Mobius from_frame_;
};

// Signed distance of w to the real diameter (positive in the upper half).
double signed_distance_to_real_axis(Complex w);

}  // namespace stretchlab::geom
