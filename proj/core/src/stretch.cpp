#include "stretchlab/stretch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "parallel.hpp"
#include "quadrature.hpp"
#include "stretchlab/errors.hpp"
#include "stretchlab/io.hpp"

namespace stretchlab::stretch {

namespace {

bool entry_less(const OrbitEntry& x, const OrbitEntry& y) {
  if (x.l1 != y.l1) return x.l1 < y.l1;
  return x.cls.cyclic_word < y.cls.cyclic_word;
}

std::string pair_text(const MetricPair& pair) {
  return "{\"source\":" + pair.source.describe() + ",\"target\":" + pair.target.describe() + "}";
}

// Primitive converged entries inside the window, with their log-weights at r.
struct WindowTerms {
  std::vector<double> x;
  std::vector<double> ratio;
};

WindowTerms window_terms(const OrbitDatabase& db, double r, const Window& window) {
  if (!(window.T > 0.0) || !(window.dT > 0.0)) throw Error(ErrorCode::InvalidArgument, "window needs T > 0 and dT > 0");
  WindowTerms w;
  for (const auto& e : db.entries) {
    if (!e.cls.primitive || !e.converged) continue;
    if (e.l1 <= window.T - window.dT || e.l1 > window.T) continue;
    w.x.push_back(std::log(e.l1) + r * window.T * e.ratio);
    w.ratio.push_back(e.ratio);
  }
  if (w.x.empty()) throw Error(ErrorCode::EmptyWindow, "no primitive classes with l1 in the window");
  return w;
}

}  // namespace

double class_length(const ConformalFactor& phi, const ConjugacyClass& cls, const BuildOptions& options,
                    bool* converged, int* iterations) {
  if (options.constant_shortcut && phi.is_constant()) {
    if (converged) *converged = true;
    if (iterations) *iterations = 0;
    return std::sqrt(phi.constant_value()) * cls.length_g1;
  }
  const auto r = lengths::closed_length(phi, cls, options.lengths);
  if (converged) *converged = r.converged;
  if (iterations) *iterations = r.iterations;
  return r.value;
}

OrbitDatabase build_orbit_database(const SurfaceGroup& group, const MetricPair& pair, const Cutoffs& cutoffs,
                                   const BuildOptions& options) {
  EnumerateOptions eo;
  eo.budget = cutoffs.budget;
  auto classes = enumerate_classes(group, cutoffs.max_word_len, cutoffs.max_length, eo);
  if (cutoffs.min_length) {
    std::erase_if(classes, [&](const ConjugacyClass& c) { return c.length_g1 < *cutoffs.min_length; });
  }
  if (cutoffs.merge_conjugates) classes = merge_conjugate_classes(classes, group).classes;
  auto db = build_orbit_database(classes, pair, options);
  db.cutoffs = cutoffs;
  return db;
}

OrbitDatabase build_orbit_database(const std::vector<ConjugacyClass>& classes, const MetricPair& pair,
                                   const BuildOptions& options) {
  OrbitDatabase db;
  db.entries.resize(classes.size());
  detail::parallel_for(classes.size(), options.workers, [&](std::size_t i) {
    OrbitEntry& e = db.entries[i];
    e.cls = classes[i];
    bool c1 = true, c2 = true;
    int it1 = 0, it2 = 0;
    e.l1 = class_length(pair.source, e.cls, options, &c1, &it1);
    e.l2 = class_length(pair.target, e.cls, options, &c2, &it2);
    e.ratio = e.l2 / e.l1;
    e.converged = c1 && c2;
    e.iterations = std::max(it1, it2);
  });
  std::stable_sort(db.entries.begin(), db.entries.end(), entry_less);
  db.pair_description = pair_text(pair);
  return db;
}

OrbitDatabase reversed(const OrbitDatabase& db) {
  OrbitDatabase out = db;
  for (auto& e : out.entries) {
    std::swap(e.l1, e.l2);
    e.ratio = e.l2 / e.l1;
  }
  std::stable_sort(out.entries.begin(), out.entries.end(), entry_less);
  return out;
}

std::optional<std::size_t> find_entry(const OrbitDatabase& db, const std::string& word) {
  const Word w = minimal_rotation(cyclic_reduce(word_from_string(word)));
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    if (db.entries[i].cls.cyclic_word == w) return i;
  }
  return std::nullopt;
}

double geodesic_stretch(const OrbitDatabase& db, const std::vector<std::pair<std::size_t, double>>& weights) {
  double num = 0.0, den = 0.0;
  for (const auto& [i, w] : weights) {
    if (i >= db.entries.size()) throw Error(ErrorCode::InvalidArgument, "entry index out of range");
    if (w < 0.0) throw Error(ErrorCode::InvalidArgument, "negative current weight");
    num += w * db.entries[i].l2;
    den += w * db.entries[i].l1;
  }
  if (!(den > 0.0)) throw Error(ErrorCode::EmptyMeasure, "current has zero mass");
  return num / den;
}

std::vector<std::size_t> mather_proxy(const OrbitDatabase& db, double delta) {
  return stretch_report(db, delta).mather_proxy;
}

StretchReport stretch_report(const OrbitDatabase& db, double delta) {
  if (delta < 0.0) throw Error(ErrorCode::InvalidArgument, "delta must be nonnegative");
  StretchReport rep;
  rep.delta = delta;
  rep.S_lower = -std::numeric_limits<double>::infinity();
  rep.s_window = std::numeric_limits<double>::infinity();
  for (const auto& e : db.entries) {
    if (!e.converged) {
      ++rep.excluded;
      continue;
    }
    rep.S_lower = std::max(rep.S_lower, e.ratio);
    rep.s_window = std::min(rep.s_window, e.ratio);
  }
  if (rep.excluded == db.entries.size()) throw Error(ErrorCode::EmptyMeasure, "no converged classes");
  const double tie = 1e-12 * std::abs(rep.S_lower);
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    const auto& e = db.entries[i];
    if (!e.converged) continue;
    if (e.ratio >= rep.S_lower - tie) rep.argmax.push_back(i);
    if (e.ratio >= rep.S_lower - delta - tie) rep.mather_proxy.push_back(i);
  }
  return rep;
}

double cocycle_residual(const OrbitDatabase& d12, const OrbitDatabase& d23, const OrbitDatabase& d13) {
  std::map<Word, double> r12, r23;
  for (const auto& e : d12.entries) r12[e.cls.cyclic_word] = e.ratio;
  for (const auto& e : d23.entries) r23[e.cls.cyclic_word] = e.ratio;
  double worst = 0.0;
  std::size_t shared = 0;
  for (const auto& e : d13.entries) {
    auto a = r12.find(e.cls.cyclic_word);
    auto b = r23.find(e.cls.cyclic_word);
    if (a == r12.end() || b == r23.end()) continue;
    ++shared;
    worst = std::max(worst, std::abs(e.ratio - a->second * b->second));
  }
  if (shared == 0) throw Error(ErrorCode::InvalidArgument, "databases share no classes");
  return worst;
}

double identity_stretch(const MetricPair& pair, Complex x) {
  return std::sqrt(pair.target.evaluate(x) / pair.source.evaluate(x));
}

bool LipReport::in_argmax_region(Complex x) const {
  for (const auto& a : argmax) {
    if (geom::distance(x, a) <= grid_spacing) return true;
  }
  return false;
}

LipReport lip_identity(const MetricPair& pair, const SampleGrid& grid, double rel_tol) {
  if (grid.points.empty()) throw Error(ErrorCode::InvalidArgument, "empty sample grid");
  LipReport rep;
  rep.grid_spacing = grid.spacing;
  std::vector<double> values(grid.points.size());
  for (std::size_t i = 0; i < grid.points.size(); ++i) values[i] = identity_stretch(pair, grid.points[i]);
  rep.value = *std::max_element(values.begin(), values.end());
  rep.tolerance = rel_tol * rep.value;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= rep.value - rep.tolerance) rep.argmax.push_back(grid.points[i]);
  }
  return rep;
}

double weighted_lip_identity(const MetricPair& pair, const ConjugacyClass& cls, const lengths::LengthOptions& options,
                             int subdivisions) {
  if (subdivisions < 1) throw Error(ErrorCode::InvalidArgument, "subdivisions must be positive");
  // The denominator is the same discrete g1-length the database stores.
  const auto result = lengths::closed_length(pair.source, cls, options);
  const auto& path = result.path;
  const auto rule = detail::gauss_legendre(4);
  double lt = 0.0;
  for (std::size_t k = 0; k + 1 < path.points.size(); ++k) {
    const Complex p = path.points[k], q = path.points[k + 1];
    const double seg = geom::distance(p, q);
    for (int j = 0; j < subdivisions; ++j) {
      const double f0 = static_cast<double>(j) / subdivisions;
      const double f1 = static_cast<double>(j + 1) / subdivisions;
      for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        const double f = f0 + 0.5 * (rule.nodes[g] + 1.0) * (f1 - f0);
        const double w = 0.5 * rule.weights[g] * (f1 - f0) * seg;
        const Complex z = geom::geodesic_point(p, q, f);
        lt += w * std::sqrt(pair.target.evaluate(z));
      }
    }
  }
  return lt / result.value;
}

VolumeReport volume_ratio(const MetricPair& pair, int n_angular, int n_radial) {
  constexpr int kSectors = 16;
  const auto samples = static_cast<std::size_t>(kSectors) * static_cast<std::size_t>(std::max(n_angular, 0)) *
                       static_cast<std::size_t>(std::max(n_radial, 0));
  if (samples < 10000) throw Error(ErrorCode::InvalidArgument, "volume quadrature needs at least 1e4 samples");
  const auto ra = detail::gauss_legendre(n_angular);
  const auto rr = detail::gauss_legendre(n_radial);
  const double width = std::numbers::pi / 8.0;
  VolumeReport rep;
  rep.samples = samples;
  for (int s = 0; s < kSectors; ++s) {
    // Half-sectors run from a side midpoint to a vertex, so the boundary is
    // smooth inside each one.
    const double th0 = s * width;
    for (std::size_t i = 0; i < ra.nodes.size(); ++i) {
      const double th = th0 + 0.5 * (ra.nodes[i] + 1.0) * width;
      const double wth = 0.5 * ra.weights[i] * width;
      const double rmax = octagon::boundary_radius(th);
      for (std::size_t j = 0; j < rr.nodes.size(); ++j) {
        const double r = 0.5 * (rr.nodes[j] + 1.0) * rmax;
        const double w = wth * 0.5 * rr.weights[j] * rmax * std::sinh(r);
        const Complex z = geom::polar_point(r, th);
        rep.base_area += w;
        rep.source_area += w * pair.source.evaluate(z);
        rep.target_area += w * pair.target.evaluate(z);
      }
    }
  }
  rep.ratio = rep.target_area / rep.source_area;
  return rep;
}

double orbit_sum_pressure(const OrbitDatabase& db, double r, const Window& window) {
  const auto w = window_terms(db, r, window);
  const double m = *std::max_element(w.x.begin(), w.x.end());
  double sum = 0.0;
  for (double x : w.x) sum += std::exp(x - m);
  return (m + std::log(sum)) / window.T;
}

double tilted_mean_ratio(const OrbitDatabase& db, double r, const Window& window) {
  const auto w = window_terms(db, r, window);
  const double m = *std::max_element(w.x.begin(), w.x.end());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < w.x.size(); ++i) {
    const double e = std::exp(w.x[i] - m);
    num += e * w.ratio[i];
    den += e;
  }
  return num / den;
}

std::size_t window_count(const OrbitDatabase& db, const Window& window) {
  try {
    return window_terms(db, 0.0, window).x.size();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyWindow) return 0;
    throw;
  }
}

double window_max_ratio(const OrbitDatabase& db, const Window& window) {
  const auto w = window_terms(db, 0.0, window);
  return *std::max_element(w.ratio.begin(), w.ratio.end());
}

ThermoCurve thermo_curve(const OrbitDatabase& db, const std::vector<double>& r_grid, const Window& window,
                         double step) {
  if (r_grid.size() < 5) throw Error(ErrorCode::InvalidArgument, "thermo sweep needs at least 5 grid points");
  if (!std::is_sorted(r_grid.begin(), r_grid.end())) throw Error(ErrorCode::InvalidArgument, "r grid must be sorted");
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  ThermoCurve c;
  c.window = window;
  c.step = step;
  auto P = [&](double r) { return orbit_sum_pressure(db, r, window); };
  for (double r : r_grid) {
    const double p0 = P(r);
    const double pp = P(r + step), pm = P(r - step);
    const double pp2 = P(r + 2 * step), pm2 = P(r - 2 * step);
    const double E = (pp - pm) / (2 * step);
    const double V = (pp - 2 * p0 + pm) / (step * step);
    const double E2 = (pp2 - pm2) / (4 * step);
    const double V2 = (pp2 - 2 * p0 + pm2) / (4 * step * step);
    const double roundoff = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(p0));
    c.r.push_back(r);
    c.P.push_back(p0);
    c.E.push_back(E);
    c.h.push_back(p0 - r * E);
    c.Var.push_back(V);
    c.noise.push_back(std::abs(E2 - E) + std::abs(r) * std::abs(E2 - E) + std::abs(V2 - V) +
                      roundoff / (step * step));
  }
  return c;
}

std::string thermo_csv(const ThermoCurve& curve) {
  std::ostringstream out;
  out << "r,P,E,h,Var\n";
  for (std::size_t i = 0; i < curve.r.size(); ++i) {
    out << io::format_double(curve.r[i]) << ',' << io::format_double(curve.P[i]) << ','
        << io::format_double(curve.E[i]) << ',' << io::format_double(curve.h[i]) << ','
        << io::format_double(curve.Var[i]) << '\n';
  }
  return out.str();
}

double bowen_entropy(const OrbitDatabase& db, const Window& window) {
  auto F = [&](double s) { return orbit_sum_pressure(db, -s, window); };
  double lo = 0.0, hi = 1.0;
  if (F(lo) <= 0.0) return 0.0;
  while (F(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorCode::NoConvergence, "entropy root not bracketed");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

EntropyStretchReport entropy_stretch_check(const OrbitDatabase& forward, const OrbitDatabase& backward,
                                           const Window& window, double band) {
  EntropyStretchReport rep;
  rep.band = band;
  rep.h1 = orbit_sum_pressure(forward, 0.0, window);
  rep.h2 = bowen_entropy(forward, window);
  rep.S = stretch_report(forward, 0.0).S_lower;
  rep.product = rep.h2 / rep.h1 * rep.S;
  rep.violated = rep.product < 1.0 - band;
  rep.reversal_product = rep.S * stretch_report(backward, 0.0).s_window;
  return rep;
}

namespace {

struct OrbitPoint {
  geom::Mobius m;
  double d = 0.0;
};

// Orbit points deduplicated on a cell hash with a neighbour check.
class PointSet {
 public:
  bool insert(Complex z) {
    const auto cx = cell(z.real()), cy = cell(z.imag());
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (const auto& p : it->second) {
          if (std::abs(p - z) < kTol) return false;
        }
      }
    }
    cells_[key(cx, cy)].push_back(z);
    return true;
  }

 private:
  static constexpr double kCell = 1e-8;
  static constexpr double kTol = 1e-9;
  static long long cell(double v) { return static_cast<long long>(std::floor(v / kCell)); }
  static long long key(long long x, long long y) { return x * 1000000007LL + y; }
  std::unordered_map<long long, std::vector<Complex>> cells_;
};

double level_root(const std::vector<OrbitPoint>& upper, const std::vector<OrbitPoint>& lower) {
  auto logZ = [](const std::vector<OrbitPoint>& lvl, double s) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& p : lvl) m = std::max(m, -s * p.d);
    double sum = 0.0;
    for (const auto& p : lvl) sum += std::exp(-s * p.d - m);
    return m + std::log(sum);
  };
  auto F = [&](double s) { return logZ(upper, s) - logZ(lower, s); };
  if (F(0.0) <= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (F(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CriticalExponentReport critical_exponent(const std::vector<GroupElement>& generators, double R, std::uint64_t budget) {
  if (generators.empty()) throw Error(ErrorCode::InvalidArgument, "no generators");
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  if (budget == 0) budget = default_word_budget();

  std::vector<geom::Mobius> letters;
  double reach = 0.0;
  for (const auto& g : generators) {
    letters.push_back(g.mobius());
    letters.push_back(g.inverse().mobius());
    reach = std::max(reach, geom::distance_from_origin(g.apply(Complex(0.0, 0.0))));
  }
  // Elements further out than this are not expanded; a geodesic word can
  // leave the ball by at most about two generator displacements.
  const double expand_limit = R + 2.0 * reach;

  PointSet seen;
  seen.insert(Complex(0.0, 0.0));
  std::vector<std::vector<OrbitPoint>> levels{{OrbitPoint{geom::Mobius::identity(), 0.0}}};
  std::uint64_t total = 1;
  bool pruned = false;
  int complete = 0;
  std::size_t within_R = 1, within_half = 1;
  while (true) {
    std::vector<OrbitPoint> next;
    bool pruned_here = false;
    for (const auto& p : levels.back()) {
      if (p.d > expand_limit) {
        pruned_here = true;
        continue;
      }
      for (const auto& l : letters) {
        const geom::Mobius m = p.m * l;
        const Complex z = m(Complex(0.0, 0.0));
        if (!seen.insert(z)) continue;
        next.push_back({m, geom::distance_from_origin(z)});
        if (++total > budget) throw Error(ErrorCode::CapacityExceeded, "orbit enumeration exceeded the budget");
      }
    }
    if (next.empty()) break;
    const bool is_complete = !pruned && !pruned_here;
    pruned = pruned || pruned_here;
    for (const auto& p : next) {
      if (p.d <= R) ++within_R;
      if (p.d <= R / 2) ++within_half;
    }
    levels.push_back(std::move(next));
    if (is_complete) complete = static_cast<int>(levels.size()) - 1;
    else break;
  }

  CriticalExponentReport rep;
  rep.complete_levels = complete;
  rep.orbit_count = within_R;
  for (const auto& l : levels) rep.level_sizes.push_back(l.size());
  rep.raw_growth = std::log(static_cast<double>(within_R)) / R;
  rep.raw_growth_half = std::log(static_cast<double>(within_half)) / (R / 2);
  if (complete < 1) throw Error(ErrorCode::InvalidArgument, "radius too small for a complete word level");
  rep.exponent = level_root(levels[complete], levels[complete - 1]);
  rep.error_bar = complete >= 2 ? std::abs(rep.exponent - level_root(levels[complete - 1], levels[complete - 2]))
                                : std::abs(rep.exponent);
  return rep;
}

std::string ratio_csv(const OrbitDatabase& db) {
  std::ostringstream out;
  out << "cyclic_word,trace,length_g1,primitive,length_g2,ratio,converged,iterations\n";
  for (const auto& e : db.entries) {
    out << e.cls.name() << ',' << io::format_double(std::abs(e.cls.representative.trace())) << ','
        << io::format_double(e.l1) << ',' << (e.cls.primitive ? 1 : 0) << ',' << io::format_double(e.l2) << ','
        << io::format_double(e.ratio) << ',' << (e.converged ? 1 : 0) << ',' << e.iterations << '\n';
  }
  return out.str();
}

}  // namespace stretchlab::stretch
