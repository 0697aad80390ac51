#include "stretchlab/lengths.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "quadrature.hpp"
#include "stretchlab/errors.hpp"

namespace stretchlab::lengths {

using geom::FermiFrame;
using geom::Mobius;

double discrete_length(const ConformalFactor& phi, const PolyPath& path) {
  if (path.points.size() < 2) throw Error(ErrorCode::InvalidArgument, "path needs at least 2 points");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
    const Complex p = path.points[i];
    const Complex q = path.points[i + 1];
    total += std::sqrt(phi(geom::midpoint(p, q))) * geom::distance(p, q);
  }
  return total;
}

int point_count(double hyperbolic_length, const LengthOptions& options) {
  if (options.fixed_points > 0) return options.fixed_points;
  return std::max(options.min_points, static_cast<int>(std::ceil(options.points_per_unit * hyperbolic_length)));
}

namespace {

// Curve given as a graph rho(t) over a hyperbolic geodesic in Fermi
// coordinates; points i = 0..n sit at fixed parameters t[i].
class GraphCurve {
 public:
  GraphCurve(const ConformalFactor& phi, FermiFrame frame, std::vector<double> t, bool periodic)
      : phi_(phi), frame_(frame), t_(std::move(t)), periodic_(periodic) {}

  int segments() const { return static_cast<int>(t_.size()) - 1; }
  int variables() const { return periodic_ ? segments() : segments() - 1; }

  // Variable index for point i, or -1 when the point is pinned.
  int var(int i) const {
    const int n = segments();
    if (periodic_) return i == n ? 0 : i;
    return (i == 0 || i == n) ? -1 : i - 1;
  }

  double rho_at(const Eigen::VectorXd& x, int i) const {
    const int v = var(i);
    return v < 0 ? 0.0 : x[v];
  }

  double segment(int i, double ra, double rb) const {
    const Complex p = frame_.point(t_[static_cast<std::size_t>(i)], ra);
    const Complex q = frame_.point(t_[static_cast<std::size_t>(i + 1)], rb);
    return std::sqrt(phi_(geom::midpoint(p, q))) * geom::distance(p, q);
  }

  double energy(const Eigen::VectorXd& x) const {
    double e = 0.0;
    for (int i = 0; i < segments(); ++i) e += segment(i, rho_at(x, i), rho_at(x, i + 1));
    return e;
  }

  void derivatives(const Eigen::VectorXd& x, double h, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
    const int m = variables();
    g.setZero(m);
    H.setZero(m, m);
    for (int i = 0; i < segments(); ++i) {
      const int a = var(i);
      const int b = var(i + 1);
      const double ra = rho_at(x, i);
      const double rb = rho_at(x, i + 1);
      if (a < 0 && b < 0) continue;
      if (a >= 0 && b >= 0) {
        double e[3][3];
        for (int p = -1; p <= 1; ++p) {
          for (int q = -1; q <= 1; ++q) e[p + 1][q + 1] = segment(i, ra + p * h, rb + q * h);
        }
        g[a] += (e[2][1] - e[0][1]) / (2.0 * h);
        g[b] += (e[1][2] - e[1][0]) / (2.0 * h);
        H(a, a) += (e[2][1] - 2.0 * e[1][1] + e[0][1]) / (h * h);
        H(b, b) += (e[1][2] - 2.0 * e[1][1] + e[1][0]) / (h * h);
        const double mixed = (e[2][2] - e[2][0] - e[0][2] + e[0][0]) / (4.0 * h * h);
        if (a == b) {
          H(a, a) += 2.0 * mixed;
        } else {
          H(a, b) += mixed;
          H(b, a) += mixed;
        }
      } else {
        const int v = a >= 0 ? a : b;
        const bool first = a >= 0;
        auto eval = [&](double d) { return first ? segment(i, ra + d, rb) : segment(i, ra, rb + d); };
        const double ep = eval(h), e0 = eval(0.0), em = eval(-h);
        g[v] += (ep - em) / (2.0 * h);
        H(v, v) += (ep - 2.0 * e0 + em) / (h * h);
      }
    }
  }

  PolyPath path(const Eigen::VectorXd& x) const {
    PolyPath out;
    for (int i = 0; i <= segments(); ++i) out.points.push_back(frame_.point(t_[static_cast<std::size_t>(i)], rho_at(x, i)));
    return out;
  }

 private:
  const ConformalFactor& phi_;
  FermiFrame frame_;
  std::vector<double> t_;
  bool periodic_;
};

LengthResult minimize(const GraphCurve& curve, const LengthOptions& options) {
  const int m = curve.variables();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  LengthResult result;
  double energy = curve.energy(x);
  result.energy_history.push_back(energy);
  if (m == 0) {
    result.value = energy;
    result.converged = true;
    result.path = curve.path(x);
    return result;
  }
  Eigen::VectorXd g(m);
  Eigen::MatrixXd H(m, m);
  int it = 0;
  for (; it < options.max_iters; ++it) {
    curve.derivatives(x, options.fd_step, g, H);
    const double gnorm = g.cwiseAbs().maxCoeff();
    if (gnorm < 1e-13 * std::max(1.0, energy)) {
      result.converged = true;
      break;
    }
    // Levenberg-damped Newton direction.
    Eigen::VectorXd step;
    double mu = 0.0;
    const double scale = std::max(1e-12, H.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd A = H;
      A.diagonal().array() += mu;
      Eigen::LLT<Eigen::MatrixXd> llt(A);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(-g);
        if (step.allFinite() && g.dot(step) < 0.0) break;
      }
      mu = mu == 0.0 ? 1e-8 * scale : 10.0 * mu;
      step.resize(0);
    }
    if (step.size() == 0) step = -g / scale;
    const double biggest = step.cwiseAbs().maxCoeff();
    if (biggest > options.max_step) step *= options.max_step / biggest;

    const double slope = g.dot(step);
    double alpha = 1.0;
    bool accepted = false;
    double trial_energy = energy;
    for (int ls = 0; ls < 40; ++ls) {
      trial_energy = curve.energy(x + alpha * step);
      if (trial_energy <= energy + 1e-4 * alpha * slope && trial_energy <= energy) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No decrease left at working precision.
      result.converged = gnorm < 1e-7 * std::max(1.0, energy);
      break;
    }
    x += alpha * step;
    const double decrease = energy - trial_energy;
    energy = trial_energy;
    result.energy_history.push_back(energy);
    if (decrease <= options.tol * energy && -slope * alpha <= 1e3 * options.tol * energy) {
      result.converged = true;
      ++it;
      break;
    }
  }
  result.iterations = it;
  result.value = energy;
  result.path = curve.path(x);
  result.max_offset = m > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
  return result;
}

geom::Geodesic geodesic_through(Complex x, Complex y) {
  const Mobius to = Mobius::to_origin(x);
  const Complex v = to(y);
  const double theta = std::arg(v);
  const Mobius back = to.inverse();
  return {std::arg(back(-std::polar(1.0, theta))), std::arg(back(std::polar(1.0, theta)))};
}

}  // namespace

LengthResult closed_length(const ConformalFactor& phi, const ConjugacyClass& cls, const LengthOptions& options) {
  const double ell = translation_length(cls.representative);
  const int n = point_count(ell, options);
  if (n < 8) throw Error(ErrorCode::InvalidArgument, "closed_length needs at least 8 points");
  const FermiFrame frame(axis(cls.representative));
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = -0.5 * ell + ell * i / n;
  const GraphCurve curve(phi, frame, std::move(t), true);
  LengthResult r = minimize(curve, options);
  r.path.closure = cls.representative;
  r.closure_residual = geom::distance(r.path.points.back(), cls.representative.apply(r.path.points.front()));
  return r;
}

LengthResult closed_length(const ConformalFactor& phi, const ConjugacyClass& cls, int n_points, int max_iters,
                           double tol) {
  LengthOptions o;
  o.fixed_points = n_points;
  o.max_iters = max_iters;
  o.tol = tol;
  return closed_length(phi, cls, o);
}

LengthResult distance_path(const ConformalFactor& phi, Complex x, Complex y, const LengthOptions& options) {
  const double d = geom::distance(x, y);
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "distance needs distinct points");
  const FermiFrame frame(geodesic_through(x, y));
  const double tx = frame.coordinates(x).first;
  const double ty = frame.coordinates(y).first;
  const int n = std::max(2, point_count(d, options));
  std::vector<double> t(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = tx + (ty - tx) * i / n;
  const GraphCurve curve(phi, frame, std::move(t), false);
  return minimize(curve, options);
}

double distance(const ConformalFactor& phi, Complex x, Complex y, const LengthOptions& options) {
  const LengthResult r = distance_path(phi, x, y, options);
  if (!r.converged) throw Error(ErrorCode::NotConverged, "distance minimization did not converge");
  return r.value;
}

double distance(const ConformalFactor& phi, Complex x, Complex y, int n_points, double tol) {
  LengthOptions o;
  o.fixed_points = n_points;
  o.tol = tol;
  return distance(phi, x, y, o);
}

// ---------------------------------------------------------------- time change

Ray::Ray(const ConformalFactor& source, const TangentVector& v)
    : source_(&source), back_(Mobius::to_origin(v.point).inverse()), direction_(v.direction) {
  if (source.is_constant()) constant_speed_ = std::sqrt(source.constant_value());
}

namespace {
const detail::GaussRule& ray_rule() {
  static const detail::GaussRule rule = detail::gauss_legendre(8);
  return rule;
}
}  // namespace

double Ray::hyperbolic_parameter(double t) const {
  if (constant_speed_ > 0.0) return t / constant_speed_;
  auto hyp_point = [&](double tau) { return back_(std::polar(std::tanh(0.5 * tau), direction_)); };
  auto speed = [&](double tau) {
    // Points behind the base point are reflected through it.
    const Complex p = tau >= 0.0 ? hyp_point(tau) : back_(std::polar(std::tanh(-0.5 * tau), direction_ + std::numbers::pi));
    return std::sqrt((*source_)(p));
  };
  auto integral = [&](double a, double b) {
    const auto& rule = ray_rule();
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      s += rule.weights[k] * speed(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k]);
    }
    return 0.5 * (b - a) * s;
  };
  const double sign = t >= 0.0 ? 1.0 : -1.0;
  const double target = std::abs(t);
  const double block = 0.05;
  double tau = 0.0, acc = 0.0;
  for (;;) {
    const double piece = integral(sign * tau, sign * (tau + block));
    if (acc + std::abs(piece) >= target) break;
    acc += std::abs(piece);
    tau += block;
  }
  double x = tau + (target - acc) / speed(sign * tau);
  for (int it = 0; it < 50; ++it) {
    const double f = acc + std::abs(integral(sign * tau, sign * x)) - target;
    const double dx = f / speed(sign * x);
    x -= dx;
    if (std::abs(dx) < 1e-15) break;
  }
  return sign * x;
}

Complex Ray::at(double t) const {
  const double tau = hyperbolic_parameter(t);
  if (tau >= 0.0) return back_(std::polar(std::tanh(0.5 * tau), direction_));
  return back_(std::polar(std::tanh(-0.5 * tau), direction_ + std::numbers::pi));
}

double infinitesimal_time_change(const ConformalFactor& source, const ConformalFactor& target,
                                 const TangentVector& v, const TimeChangeOptions& options) {
  if (options.horizons.empty()) throw Error(ErrorCode::InvalidArgument, "no horizons");
  const double h = options.step;
  if (!(h >= 1e-3 && h <= 1e-1)) throw Error(ErrorCode::InvalidArgument, "step must lie in [1e-3, 1e-1]");
  const Ray ray(source, v);
  std::vector<double> values;
  for (double T : options.horizons) {
    if (T < 5.0) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 5");
    const Complex c0 = ray.at(0.0);
    const Complex ch = ray.at(h);
    const Complex far = ray.at(T);
    LengthOptions lo = options.lengths;
    lo.fixed_points = point_count(geom::distance(c0, far), options.lengths);
    const double d0 = distance(target, c0, far, lo);
    const double dh = distance(target, ch, far, lo);
    values.push_back((d0 - dh) / h);
  }
  if (values.size() == 1) return values[0];
  const double T1 = options.horizons[options.horizons.size() - 2];
  const double T2 = options.horizons.back();
  const double w = std::exp(-(T2 - T1));
  return (values.back() - w * values[values.size() - 2]) / (1.0 - w);
}

double infinitesimal_time_change(const ConformalFactor& phi, const TangentVector& v, double horizon, double step) {
  TimeChangeOptions o;
  if (horizon - 2.0 >= 5.0) {
    o.horizons = {horizon - 2.0, horizon};
  } else {
    o.horizons = {horizon};
  }
  o.step = step;
  return infinitesimal_time_change(ConformalFactor::constant(1.0), phi, v, o);
}

}  // namespace stretchlab::lengths
