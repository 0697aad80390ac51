#include "stretchlab/geometry.hpp"

#include <cmath>
#include <numbers>

namespace stretchlab::geom {

double distance(Complex z, Complex w) {
  const double num = std::abs(z - w);
  const double den = std::abs(1.0 - std::conj(w) * z);
  return 2.0 * std::atanh(std::min(num / den, 1.0 - 1e-16));
}

double distance_from_origin(Complex z) { return 2.0 * std::atanh(std::abs(z)); }

Complex polar_point(double r, double theta) { return std::polar(std::tanh(0.5 * r), theta); }

Complex boundary_point(double angle) { return std::polar(1.0, angle); }

Complex geodesic_point(Complex z, Complex w, double fraction) {
  const Mobius m = Mobius::to_origin(z);
  const Complex v = m(w);
  const double r = std::abs(v);
  if (r == 0.0) return z;
  const double d = 2.0 * std::atanh(r);
  const Complex u = v / r * std::tanh(0.5 * fraction * d);
  return m.inverse()(u);
}

Complex midpoint(Complex z, Complex w) { return geodesic_point(z, w, 0.5); }

Mobius Mobius::rotation(double theta) { return {std::polar(1.0, 0.5 * theta), 0.0}; }

Mobius Mobius::translation(double t) { return {std::cosh(0.5 * t), std::sinh(0.5 * t)}; }

Mobius Mobius::to_origin(Complex p) {
  const double s = 1.0 / std::sqrt(1.0 - std::norm(p));
  return {s, -p * s};
}

double angle_gap(double a, double b) {
  return std::abs(std::remainder(a - b, 2.0 * std::numbers::pi));
}

bool same_geodesic(const Geodesic& g, const Geodesic& h, double tol, bool oriented) {
  if (angle_gap(g.repelling, h.repelling) <= tol && angle_gap(g.attracting, h.attracting) <= tol) {
    return true;
  }
  if (oriented) return false;
  return angle_gap(g.repelling, h.attracting) <= tol && angle_gap(g.attracting, h.repelling) <= tol;
}

FermiFrame::FermiFrame(const Geodesic& g) {
  const double delta = std::remainder(g.attracting - g.repelling, 2.0 * std::numbers::pi);
  const double half = 0.5 * std::abs(delta);
  const double mu = g.repelling + 0.5 * delta;
  const Complex foot = std::polar(std::tan(0.25 * std::numbers::pi - 0.5 * half), mu);
  const Mobius center = Mobius::to_origin(foot);
  const Complex v = center(boundary_point(g.attracting));
  to_frame_ = Mobius::rotation(-std::arg(v)) * center;
  from_frame_ = to_frame_.inverse();
}

Complex FermiFrame::point(double t, double rho) const {
  // Half-plane picture: the geodesic is the imaginary axis, oriented upwards.
  const double e = std::exp(t);
  const Complex z{-e * std::tanh(rho), e / std::cosh(rho)};
  const Complex i{0.0, 1.0};
  return from_frame_((z - i) / (z + i));
}

std::pair<double, double> FermiFrame::coordinates(Complex z) const {
  const Complex w = to_frame_(z);
  const Complex i{0.0, 1.0};
  const Complex h = i * (1.0 + w) / (1.0 - w);
  return {std::log(std::abs(h)), std::asinh(-h.real() / h.imag())};
}

double signed_distance_to_real_axis(Complex w) {
  return std::asinh(2.0 * w.imag() / (1.0 - std::norm(w)));
}

double FermiFrame::signed_distance(Complex z) const { return signed_distance_to_real_axis(to_frame_(z)); }

double FermiFrame::distance(Complex z) const { return std::abs(signed_distance(z)); }

}  // namespace stretchlab::geom
