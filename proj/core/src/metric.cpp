#include "stretchlab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "stretchlab/errors.hpp"
#include "stretchlab/io.hpp"

namespace stretchlab::metric {

using geom::Mobius;
using nlohmann::json;

double shrink_multiplier(double rho, double epsilon, double s) {
  const double u = rho / epsilon;
  if (std::abs(u) >= 1.0) return 1.0;
  return 1.0 - s * std::exp(1.0 - 1.0 / (1.0 - u * u));
}

namespace {
double smooth_psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace

double plateau_step(double rho, double w, double epsilon) {
  rho = std::abs(rho);
  if (rho <= w) return 1.0;
  if (rho >= epsilon) return 0.0;
  const double v = (rho - w) / (epsilon - w);
  const double p = smooth_psi(1.0 - v);
  return p / (p + smooth_psi(v));
}

struct ConformalFactor::Impl {
  Kind kind = Kind::Constant;
  double a = 1.0;
  CollarBumpParams params;
  SurfaceGroup group;
  std::vector<Mobius> lift_normalizers;
  std::vector<GroupElement> translates;
  std::vector<ConformalFactor> parts;

  double profile(double rho) const {
    if (params.direction == BumpDirection::Shrink) {
      const double m = shrink_multiplier(rho, params.epsilon, params.s);
      return m * m;
    }
    return 1.0 + (params.plateau - 1.0) * plateau_step(rho, params.core_width, params.epsilon);
  }

  double distance_reduced(Complex z) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Mobius& m : lift_normalizers) {
      best = std::min(best, std::abs(geom::signed_distance_to_real_axis(m(z))));
    }
    return best;
  }
};

namespace {

Complex reduce_or_throw(Complex x, const SurfaceGroup& group) {
  if (!(std::abs(x) < 1.0)) throw Error(ErrorCode::InvarianceBudgetExceeded, "point outside the disk");
  if (!reduce_point(x, group, 256)) {
    throw Error(ErrorCode::InvarianceBudgetExceeded, "point too deep for the fundamental-domain search");
  }
  return x;
}

std::vector<Word> reduced_words_up_to(int max_len) {
  std::vector<Word> out{Word{}};
  std::vector<Word> frontier{Word{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const Word& w : frontier) {
      for (int l = 0; l < 8; ++l) {
        if (!w.empty() && w.back() == inverse_letter(l)) continue;
        Word x = w;
        x.push_back(l);
        next.push_back(x);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

struct LiftSet {
  std::vector<geom::Geodesic> lifts;
  std::vector<GroupElement> translates;
};

LiftSet collect_lifts(const SurfaceGroup& group, const geom::Geodesic& base, int depth, double horizon) {
  LiftSet out;
  for (const Word& w : reduced_words_up_to(depth)) {
    const GroupElement h = group.evaluate(w);
    const Mobius m = h.mobius();
    const geom::Geodesic g{std::arg(m(geom::boundary_point(base.repelling))),
                           std::arg(m(geom::boundary_point(base.attracting)))};
    if (geom::FermiFrame(g).distance(Complex{0.0, 0.0}) > horizon) continue;
    const bool seen = std::any_of(out.lifts.begin(), out.lifts.end(),
                                  [&](const geom::Geodesic& x) { return geom::same_geodesic(x, g, 1e-9, false); });
    if (seen) continue;
    out.lifts.push_back(g);
    out.translates.push_back(h);
  }
  return out;
}

}  // namespace

ConformalFactor::ConformalFactor() : impl_(std::make_shared<Impl>()) {}

ConformalFactor ConformalFactor::constant(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "constant factor must be positive");
  auto impl = std::make_shared<Impl>();
  impl->a = a;
  ConformalFactor f;
  f.impl_ = impl;
  return f;
}

ConformalFactor ConformalFactor::collar_bump(const SurfaceGroup& group, const CollarBumpParams& params) {
  if (!(params.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (params.direction == BumpDirection::Shrink && !(params.s > 0.0 && params.s < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "s must lie in (0, 1)");
  }
  if (params.direction == BumpDirection::Enlarge &&
      !(params.plateau > 0.0 && params.core_width >= 0.0 && params.core_width < params.epsilon)) {
    throw Error(ErrorCode::InvalidArgument, "enlarge needs plateau > 0 and 0 <= core_width < epsilon");
  }
  if (params.depth < 0) throw Error(ErrorCode::InvalidArgument, "depth must be >= 0");
  const GroupElement core = group.evaluate(word_from_string(params.axis_word));
  const geom::Geodesic base = axis(core);
  const double horizon = octagon::circumradius() + params.epsilon;
  LiftSet lifts = collect_lifts(group, base, params.depth, horizon);
  const LiftSet check = collect_lifts(group, base, params.depth + 1, horizon);
  if (check.lifts.size() != lifts.lifts.size()) {
    throw Error(ErrorCode::InvarianceBudgetExceeded,
                "axis translates of depth " + std::to_string(params.depth + 1) +
                    " reach the tube horizon; increase depth");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::CollarBump;
  impl->params = params;
  impl->group = group;
  impl->translates = std::move(lifts.translates);
  for (const auto& g : lifts.lifts) impl->lift_normalizers.push_back(geom::FermiFrame(g).normalizer());
  ConformalFactor f;
  f.impl_ = impl;
  return f;
}

ConformalFactor ConformalFactor::composite(std::vector<ConformalFactor> parts) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Composite;
  impl->parts = std::move(parts);
  ConformalFactor f;
  f.impl_ = impl;
  return f;
}

ConformalFactor::Kind ConformalFactor::kind() const { return impl_->kind; }

double ConformalFactor::evaluate(Complex x) const {
  switch (impl_->kind) {
    case Kind::Constant:
      return impl_->a;
    case Kind::CollarBump:
      return impl_->profile(impl_->distance_reduced(reduce_or_throw(x, impl_->group)));
    case Kind::Composite: {
      double v = 1.0;
      for (const auto& p : impl_->parts) v *= p.evaluate(x);
      return v;
    }
  }
  return 1.0;
}

double ConformalFactor::evaluate_reduced(Complex x) const {
  switch (impl_->kind) {
    case Kind::Constant:
      return impl_->a;
    case Kind::CollarBump:
      return impl_->profile(impl_->distance_reduced(x));
    case Kind::Composite: {
      double v = 1.0;
      for (const auto& p : impl_->parts) v *= p.evaluate_reduced(x);
      return v;
    }
  }
  return 1.0;
}

bool ConformalFactor::is_constant() const {
  if (impl_->kind == Kind::Constant) return true;
  if (impl_->kind == Kind::Composite) {
    return std::all_of(impl_->parts.begin(), impl_->parts.end(), [](const auto& p) { return p.is_constant(); });
  }
  return false;
}

double ConformalFactor::constant_value() const {
  if (!is_constant()) throw Error(ErrorCode::InvalidArgument, "factor is not constant");
  return evaluate(Complex{0.0, 0.0});
}

double ConformalFactor::max_value() const {
  switch (impl_->kind) {
    case Kind::Constant:
      return impl_->a;
    case Kind::CollarBump:
      return impl_->params.direction == BumpDirection::Shrink ? 1.0 : std::max(1.0, impl_->params.plateau);
    case Kind::Composite: {
      double v = 1.0;
      for (const auto& p : impl_->parts) v *= p.max_value();
      return v;
    }
  }
  return 1.0;
}

double ConformalFactor::min_value() const {
  switch (impl_->kind) {
    case Kind::Constant:
      return impl_->a;
    case Kind::CollarBump:
      if (impl_->params.direction == BumpDirection::Shrink) return (1.0 - impl_->params.s) * (1.0 - impl_->params.s);
      return std::min(1.0, impl_->params.plateau);
    case Kind::Composite: {
      double v = 1.0;
      for (const auto& p : impl_->parts) v *= p.min_value();
      return v;
    }
  }
  return 1.0;
}

const CollarBumpParams* ConformalFactor::collar_params() const {
  return impl_->kind == Kind::CollarBump ? &impl_->params : nullptr;
}

double ConformalFactor::distance_to_axis(Complex x) const {
  if (impl_->kind != Kind::CollarBump) throw Error(ErrorCode::InvalidArgument, "not a collar bump");
  return impl_->distance_reduced(reduce_or_throw(x, impl_->group));
}

std::vector<GroupElement> ConformalFactor::translate_set() const { return impl_->translates; }

std::size_t ConformalFactor::lift_count() const { return impl_->lift_normalizers.size(); }

namespace {
json factor_json(const ConformalFactor& f);
}

std::string ConformalFactor::describe() const { return factor_json(*this).dump(); }

namespace {
json factor_json(const ConformalFactor& f) {
  switch (f.kind()) {
    case ConformalFactor::Kind::Constant:
      return {{"kind", "constant"}, {"a", f.constant_value()}};
    case ConformalFactor::Kind::CollarBump: {
      const CollarBumpParams& p = *f.collar_params();
      json j{{"kind", "collar_bump"}, {"axis_word", p.axis_word}, {"epsilon", p.epsilon}, {"depth", p.depth}};
      if (p.direction == BumpDirection::Shrink) {
        j["direction"] = "shrink";
        j["s"] = p.s;
      } else {
        j["direction"] = "enlarge";
        j["a"] = p.plateau;
        j["core_width"] = p.core_width;
      }
      return j;
    }
    case ConformalFactor::Kind::Composite:
      return {{"kind", "composite"}};
  }
  return {};
}
}  // namespace

double invariance_residual(const ConformalFactor& phi, const SurfaceGroup& group, const SampleGrid& grid,
                           int max_len) {
  double worst = 0.0;
  for (const Word& w : reduced_words_up_to(max_len)) {
    if (w.empty()) continue;
    const Mobius m = group.evaluate(w).mobius();
    for (Complex x : grid.points) worst = std::max(worst, std::abs(phi(x) - phi(m(x))));
  }
  return worst;
}

namespace {
double log_laplacian(const ConformalFactor& phi, Complex x, double h) {
  const Mobius back = Mobius::to_origin(x).inverse();
  const double d = std::tanh(0.5 * h);
  const double f0 = std::log(phi(x));
  double sum = 0.0;
  for (Complex u : {Complex{d, 0.0}, Complex{-d, 0.0}, Complex{0.0, d}, Complex{0.0, -d}}) sum += std::log(phi(back(u)));
  // The disk metric is 4|dz|^2 at the origin.
  return (sum - 4.0 * f0) / (4.0 * d * d);
}
}  // namespace

double curvature(const ConformalFactor& phi, Complex x, double h) {
  if (!(h > 1e-4)) throw Error(ErrorCode::StepTooSmall, "step " + io::format_double(h) + " <= 1e-4");
  if (h > 1e-2) throw Error(ErrorCode::InvalidArgument, "step must be <= 1e-2");
  const double value = phi(x);
  const double coarse = log_laplacian(phi, x, h);
  const double fine = log_laplacian(phi, x, 0.5 * h);
  const double lap = (4.0 * fine - coarse) / 3.0;
  const double dh = std::tanh(0.25 * h);
  const double roundoff = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(std::log(value))) / (dh * dh);
  if (roundoff > 1e-5 * (1.0 + std::abs(lap)) || std::abs(fine - coarse) > 1e-2 * (1.0 + std::abs(lap))) {
    throw Error(ErrorCode::StepTooSmall, "step-halving disagreement in the Laplacian stencil");
  }
  return (-1.0 - 0.5 * lap) / value;
}

CurvatureReport curvature_bounds(const ConformalFactor& phi, const SampleGrid& grid, double h,
                                 bool require_negative) {
  CurvatureReport r;
  r.grid = grid.points;
  r.K_values.reserve(grid.points.size());
  r.K_min = std::numeric_limits<double>::infinity();
  r.K_max = -std::numeric_limits<double>::infinity();
  for (Complex x : grid.points) {
    const double k = curvature(phi, x, h);
    r.K_values.push_back(k);
    r.K_min = std::min(r.K_min, k);
    r.K_max = std::max(r.K_max, k);
    if (k >= 0.0) ++r.nonnegative_count;
  }
  r.negatively_curved = r.K_max < 0.0;
  if (require_negative && !r.negatively_curved) {
    throw Error(ErrorCode::NotNegativelyCurved, "K_max = " + io::format_double(r.K_max) + " at " +
                                                    std::to_string(r.nonnegative_count) + " grid points");
  }
  return r;
}

bool check_gk_condition(const CurvatureReport& g1, const CurvatureReport& g2, double L) {
  if (!(L > 0.0)) throw Error(ErrorCode::InvalidArgument, "L must be positive");
  if (!g1.negatively_curved || !g2.negatively_curved) return false;
  const double ratio = g1.K_min / g2.K_max;
  return ratio > 0.0 && ratio < L * L;
}

namespace {

double number_at(const json& j, const char* key, const std::string& path, double fallback, bool required) {
  if (!j.contains(key)) {
    if (required) throw Error(ErrorCode::ConfigInvalid, path + "." + key + " is required");
    return fallback;
  }
  if (!j.at(key).is_number()) throw Error(ErrorCode::ConfigInvalid, path + "." + key + " must be a number");
  return j.at(key).get<double>();
}

ConformalFactor parse_factor(const json& j, const SurfaceGroup& group, const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw Error(ErrorCode::ConfigInvalid, path + ".kind is required");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant" || kind == "hyperbolic") {
    const double a = number_at(j, "a", path, 1.0, kind == "constant");
    if (!(a > 0.0)) throw Error(ErrorCode::ConfigInvalid, path + ".a must be positive");
    return ConformalFactor::constant(a);
  }
  if (kind == "collar_bump") {
    CollarBumpParams p;
    if (j.contains("axis_word")) p.axis_word = j.at("axis_word").get<std::string>();
    p.epsilon = number_at(j, "epsilon", path, p.epsilon, true);
    const std::string dir = j.value("direction", std::string("shrink"));
    if (dir == "shrink") {
      p.direction = BumpDirection::Shrink;
      p.s = number_at(j, "s", path, p.s, true);
      if (!(p.s > 0.0 && p.s < 1.0)) throw Error(ErrorCode::ConfigInvalid, path + ".s must lie in (0, 1)");
    } else if (dir == "enlarge") {
      p.direction = BumpDirection::Enlarge;
      p.plateau = number_at(j, "a", path, p.plateau, true);
      p.core_width = number_at(j, "core_width", path, p.core_width, false);
    } else {
      throw Error(ErrorCode::ConfigInvalid, path + ".direction must be shrink or enlarge");
    }
    p.depth = static_cast<int>(number_at(j, "depth", path, p.depth, false));
    if (!(p.epsilon > 0.0)) throw Error(ErrorCode::ConfigInvalid, path + ".epsilon must be positive");
    try {
      return ConformalFactor::collar_bump(group, p);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
    }
  }
  if (kind == "composite") {
    if (!j.contains("parts") || !j.at("parts").is_array()) {
      throw Error(ErrorCode::ConfigInvalid, path + ".parts must be an array");
    }
    std::vector<ConformalFactor> parts;
    for (std::size_t i = 0; i < j.at("parts").size(); ++i) {
      parts.push_back(parse_factor(j.at("parts")[i], group, path + ".parts[" + std::to_string(i) + "]"));
    }
    return ConformalFactor::composite(std::move(parts));
  }
  throw Error(ErrorCode::ConfigInvalid, path + ".kind '" + kind + "' is unknown");
}

}  // namespace

ConformalFactor factor_from_json(const std::string& json_text, const SurfaceGroup& group) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("factor: ") + e.what());
  }
  return parse_factor(j, group, "factor");
}

}  // namespace stretchlab::metric
