#include "stretchlab/fuchsian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "stretchlab/errors.hpp"
#include "stretchlab/io.hpp"

namespace stretchlab {

using geom::Mobius;

// ---------------------------------------------------------------- words

Word inverse_word(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (int& l : out) l = inverse_letter(l);
  return out;
}

Word free_reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (int l : w) {
    if (!out.empty() && out.back() == inverse_letter(l)) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return free_reduce(out);
}

bool is_cyclically_reduced(const Word& w) {
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (w[i + 1] == inverse_letter(w[i])) return false;
  }
  return w.size() < 2 || w.back() != inverse_letter(w.front());
}

Word cyclic_reduce(const Word& w) {
  Word r = free_reduce(w);
  std::size_t lo = 0, hi = r.size();
  while (hi - lo >= 2 && r[hi - 1] == inverse_letter(r[lo])) {
    ++lo;
    --hi;
  }
  return Word(r.begin() + static_cast<std::ptrdiff_t>(lo), r.begin() + static_cast<std::ptrdiff_t>(hi));
}

namespace {
// True if the rotation of w starting at `shift` is lexicographically smaller than w.
bool rotation_smaller(const int* w, std::size_t n, std::size_t shift) {
  for (std::size_t i = 0; i < n; ++i) {
    const int x = w[(shift + i) % n];
    if (x != w[i]) return x < w[i];
  }
  return false;
}

bool is_minimal_rotation(const int* w, std::size_t n) {
  for (std::size_t s = 1; s < n; ++s) {
    if (rotation_smaller(w, n, s)) return false;
  }
  return true;
}
}  // namespace

Word minimal_rotation(const Word& w) {
  const std::size_t n = w.size();
  std::size_t best = 0;
  for (std::size_t s = 1; s < n; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const int x = w[(s + i) % n];
      const int y = w[(best + i) % n];
      if (x != y) {
        if (x < y) best = s;
        break;
      }
    }
  }
  Word out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = w[(best + i) % n];
  return out;
}

std::size_t primitive_period(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i % p];
    if (ok) return p;
  }
  return n;
}

bool is_proper_power(const Word& w) { return !w.empty() && primitive_period(w) < w.size(); }

std::string word_to_string(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (int l : w) {
    const int k = l / 2;
    const bool inv = (l & 1) != 0;
    const char base = (k % 2 == 0) ? 'a' : 'b';
    s.push_back(inv ? static_cast<char>(base - 'a' + 'A') : base);
    s.push_back(static_cast<char>('1' + k / 2));
  }
  return s;
}

Word word_from_string(const std::string& s) {
  Word w;
  if (s.empty() || s == "e") return w;
  if (s.size() % 2 != 0) throw Error(ErrorCode::InvalidArgument, "malformed word '" + s + "'");
  for (std::size_t i = 0; i < s.size(); i += 2) {
    const char ch = s[i];
    const char idx = s[i + 1];
    int k;
    if (ch == 'a' || ch == 'A') {
      k = 0;
    } else if (ch == 'b' || ch == 'B') {
      k = 1;
    } else {
      throw Error(ErrorCode::InvalidArgument, "malformed word '" + s + "'");
    }
    if (idx != '1' && idx != '2') throw Error(ErrorCode::InvalidArgument, "malformed word '" + s + "'");
    k += 2 * (idx - '1');
    const bool inv = ch == 'A' || ch == 'B';
    w.push_back(2 * k + (inv ? 1 : 0));
  }
  return w;
}

// ---------------------------------------------------------------- elements

GroupElement::GroupElement(double a, double b, double c, double d, Word word)
    : a_(a), b_(b), c_(c), d_(d), word_(std::move(word)) {
  renormalize();
}

void GroupElement::renormalize() {
  const double det = a_ * d_ - b_ * c_;
  if (!(det > 0.0)) throw Error(ErrorCode::InvalidArgument, "matrix with non-positive determinant");
  const double s = 1.0 / std::sqrt(det);
  a_ *= s;
  b_ *= s;
  c_ *= s;
  d_ *= s;
}

GroupElement GroupElement::from_mobius(const Mobius& m, Word word) {
  const double a = m.alpha.real() + m.beta.real();
  const double d = m.alpha.real() - m.beta.real();
  const double b = m.alpha.imag() - m.beta.imag();
  const double c = -m.alpha.imag() - m.beta.imag();
  return GroupElement(a, b, c, d, std::move(word));
}

Mobius GroupElement::mobius() const {
  return {Complex{0.5 * (a_ + d_), 0.5 * (b_ - c_)}, Complex{0.5 * (a_ - d_), -0.5 * (b_ + c_)}};
}

bool GroupElement::is_hyperbolic(double tol) const { return std::abs(trace()) > 2.0 + tol; }

GroupElement GroupElement::operator*(const GroupElement& g) const {
  return GroupElement(a_ * g.a_ + b_ * g.c_, a_ * g.b_ + b_ * g.d_, c_ * g.a_ + d_ * g.c_, c_ * g.b_ + d_ * g.d_,
                      concat(word_, g.word_));
}

GroupElement GroupElement::inverse() const { return GroupElement(d_, -b_, -c_, a_, inverse_word(word_)); }

double GroupElement::max_entry_diff(const GroupElement& g) const {
  // PSL: a matrix and its negative are the same isometry.
  const double plus = std::max({std::abs(a_ - g.a_), std::abs(b_ - g.b_), std::abs(c_ - g.c_), std::abs(d_ - g.d_)});
  const double minus = std::max({std::abs(a_ + g.a_), std::abs(b_ + g.b_), std::abs(c_ + g.c_), std::abs(d_ + g.d_)});
  return std::min(plus, minus);
}

GroupElement power(const GroupElement& g, int k) {
  GroupElement base = k >= 0 ? g : g.inverse();
  GroupElement out;
  for (int i = 0; i < std::abs(k); ++i) out = out * base;
  return out;
}

GroupElement commutator(const GroupElement& x, const GroupElement& y) {
  return x * y * x.inverse() * y.inverse();
}

double translation_length(const GroupElement& g) {
  const double t = std::abs(g.trace());
  if (t <= 2.0 + kHyperbolicTol) {
    throw Error(ErrorCode::NonHyperbolic, "|trace| = " + io::format_double(t) + " for word " + word_to_string(g.word()));
  }
  return 2.0 * std::acosh(0.5 * t);
}

geom::Geodesic axis(const GroupElement& g) {
  if (!g.is_hyperbolic()) throw Error(ErrorCode::NonHyperbolic, "axis of a non-hyperbolic element");
  const Mobius m = g.mobius();
  const double re = m.alpha.real();
  const double im = m.alpha.imag();
  const double s = std::sqrt((std::abs(re) - 1.0) * (std::abs(re) + 1.0));
  const double sign = re > 0.0 ? 1.0 : -1.0;
  const Complex cb = std::conj(m.beta);
  const Complex att = Complex(sign * s, im) / cb;
  const Complex rep = Complex(-sign * s, im) / cb;
  return {std::arg(rep), std::arg(att)};
}

// ---------------------------------------------------------------- octagon

namespace octagon {
double systole() { return 2.0 * std::acosh(1.0 + std::numbers::sqrt2); }
double inradius() { return 0.5 * systole(); }
double circumradius() { return std::acosh(3.0 + 2.0 * std::numbers::sqrt2); }
double area() { return 4.0 * std::numbers::pi; }
double boundary_radius(double theta) {
  const double step = 0.25 * std::numbers::pi;
  const double off = theta - step * std::round(theta / step);
  return std::atanh(std::tanh(inradius()) / std::cos(off));
}
}  // namespace octagon

GroupElement SurfaceGroup::evaluate(const Word& w) const {
  GroupElement out;
  for (int l : w) out = out * letters[static_cast<std::size_t>(l)];
  return out;
}

GroupElement SurfaceGroup::octagon_relator() const { return evaluate({0, 3, 4, 7, 1, 2, 5, 6}); }

GroupElement SurfaceGroup::commutator_relator() const {
  return commutator(symplectic_basis[0], symplectic_basis[1]) * commutator(symplectic_basis[2], symplectic_basis[3]);
}

SurfaceGroup build_bolza_group() {
  SurfaceGroup g;
  const Mobius t = Mobius::translation(octagon::systole());
  for (int k = 0; k < 4; ++k) {
    const double angle = k * 0.25 * std::numbers::pi;
    const Mobius m = Mobius::rotation(angle) * t * Mobius::rotation(-angle);
    g.generators[static_cast<std::size_t>(k)] = GroupElement::from_mobius(m, {2 * k});
    g.letters[static_cast<std::size_t>(2 * k)] = g.generators[static_cast<std::size_t>(k)];
    g.letters[static_cast<std::size_t>(2 * k + 1)] = g.generators[static_cast<std::size_t>(k)].inverse();
  }
  for (int j = 0; j < 8; ++j) {
    const int letter = j < 4 ? 2 * j : 2 * (j - 4) + 1;
    g.side_pairings[static_cast<std::size_t>(j)] = g.letters[static_cast<std::size_t>(letter)];
    g.side_inverse_mobius[static_cast<std::size_t>(j)] = g.side_pairings[static_cast<std::size_t>(j)].inverse().mobius();
  }
  g.symplectic_basis = {g.evaluate({0}), g.evaluate({3}), g.evaluate({3, 0, 4}), g.evaluate({7, 4})};
  return g;
}

const SurfaceGroup& shared_bolza_group() {
  static const SurfaceGroup group = build_bolza_group();
  return group;
}

bool in_octagon(Complex z, double tol) {
  const SurfaceGroup& g = shared_bolza_group();
  const double r = std::abs(z);
  for (const Mobius& m : g.side_inverse_mobius) {
    if (std::abs(m(z)) < r - tol) return false;
  }
  return true;
}

bool reduce_point(Complex& z, const SurfaceGroup& group, int search_depth, Mobius* applied) {
  for (int step = 0; step <= search_depth; ++step) {
    double best = std::abs(z);
    int best_j = -1;
    Complex best_z = z;
    for (int j = 0; j < 8; ++j) {
      const Complex w = group.side_inverse_mobius[static_cast<std::size_t>(j)](z);
      const double r = std::abs(w);
      if (r < best - 1e-14) {
        best = r;
        best_j = j;
        best_z = w;
      }
    }
    if (best_j < 0) return true;
    if (step == search_depth) return false;
    z = best_z;
    if (applied) *applied = group.side_inverse_mobius[static_cast<std::size_t>(best_j)] * *applied;
  }
  return false;
}

Reduction reduce_to_fundamental_domain(Complex z, const SurfaceGroup& group, int search_depth) {
  if (search_depth < 1) throw Error(ErrorCode::InvalidArgument, "search_depth must be >= 1");
  if (!(std::abs(z) < 1.0)) throw Error(ErrorCode::InvalidArgument, "point outside the disk");
  GroupElement acc;
  for (int step = 0; step <= search_depth; ++step) {
    double best = std::abs(z);
    int best_j = -1;
    Complex best_z = z;
    for (int j = 0; j < 8; ++j) {
      const Complex w = group.side_inverse_mobius[static_cast<std::size_t>(j)](z);
      if (std::abs(w) < best - 1e-14) {
        best = std::abs(w);
        best_j = j;
        best_z = w;
      }
    }
    if (best_j < 0) return {z, acc};
    if (step == search_depth) break;
    z = best_z;
    acc = group.side_pairings[static_cast<std::size_t>(best_j)].inverse() * acc;
  }
  throw Error(ErrorCode::NotReduced, "no translate within search depth " + std::to_string(search_depth));
}

// ---------------------------------------------------------------- classes

std::uint64_t default_word_budget() {
  if (const char* env = std::getenv("STRETCHLAB_BUDGET")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return v;
  }
  return 10'000'000ull;
}

std::uint64_t projected_word_count(int n_generators, int max_word_len) {
  const std::uint64_t m = 2ull * static_cast<std::uint64_t>(n_generators);
  std::uint64_t total = 0, level = m;
  for (int k = 1; k <= max_word_len; ++k) {
    total += level;
    if (total > (1ull << 62)) return total;
    level *= (m - 1);
  }
  return total;
}

ConjugacyClass make_class(const SurfaceGroup& group, const Word& word) {
  ConjugacyClass c;
  c.cyclic_word = minimal_rotation(cyclic_reduce(word));
  if (c.cyclic_word.empty()) throw Error(ErrorCode::NonHyperbolic, "trivial word");
  c.representative = group.evaluate(c.cyclic_word);
  c.length_g1 = translation_length(c.representative);
  c.primitive = !is_proper_power(c.cyclic_word);
  return c;
}

namespace {
struct Mat2 {
  double a, b, c, d;
};

Mat2 mul(const Mat2& x, const Mat2& y) {
  Mat2 r{x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  const double s = 1.0 / std::sqrt(r.a * r.d - r.b * r.c);
  r.a *= s;
  r.b *= s;
  r.c *= s;
  r.d *= s;
  return r;
}

struct Enumerator {
  const SurfaceGroup& group;
  int max_len;
  std::optional<double> cutoff;
  std::vector<int> allowed;
  std::array<Mat2, 8> mats{};
  std::vector<int> word;
  std::vector<ConjugacyClass> out;
  std::size_t trivial = 0;

  void visit(const Mat2& m) {
    const std::size_t n = word.size();
    if (word.back() != inverse_letter(word.front()) && is_minimal_rotation(word.data(), n)) {
      const double t = std::abs(m.a + m.d);
      // The surface group is torsion-free without parabolics, so a
      // non-hyperbolic word is a relator conjugate, i.e. the identity.
      if (t <= 2.0 + kHyperbolicTol) {
        if (std::abs(m.b) + std::abs(m.c) + std::abs(m.a - m.d) > 1e-6) {
          throw Error(ErrorCode::NonHyperbolic, "word " + word_to_string(word) + " is not hyperbolic");
        }
        ++trivial;
      } else {
      const double len = 2.0 * std::acosh(0.5 * t);
      if (!cutoff || len <= *cutoff) {
        ConjugacyClass c;
        c.cyclic_word = word;
        c.representative = GroupElement(m.a, m.b, m.c, m.d, word);
        c.length_g1 = len;
        c.primitive = !is_proper_power(word);
        out.push_back(std::move(c));
      }
      }
    }
    if (static_cast<int>(n) == max_len) return;
    for (int l : allowed) {
      if (l < word.front() || l == inverse_letter(word.back())) continue;
      word.push_back(l);
      visit(mul(m, mats[static_cast<std::size_t>(l)]));
      word.pop_back();
    }
  }
};
}  // namespace

std::vector<ConjugacyClass> enumerate_classes(const SurfaceGroup& group, int max_word_len,
                                              std::optional<double> length_cutoff, const EnumerateOptions& options) {
  if (max_word_len < 1) throw Error(ErrorCode::InvalidArgument, "max_word_len must be >= 1");
  const std::uint64_t budget = options.budget ? options.budget : default_word_budget();
  const std::uint64_t projected = projected_word_count(static_cast<int>(options.generators.size()), max_word_len);
  if (projected > budget) {
    throw Error(ErrorCode::CapacityExceeded, std::to_string(projected) + " projected words exceed budget " +
                                                 std::to_string(budget));
  }
  Enumerator e{group, max_word_len, length_cutoff, {}, {}, {}, {}, 0};
  for (int k : options.generators) {
    if (k < 0 || k > 3) throw Error(ErrorCode::InvalidArgument, "generator index out of range");
    e.allowed.push_back(2 * k);
    e.allowed.push_back(2 * k + 1);
  }
  std::sort(e.allowed.begin(), e.allowed.end());
  for (int l = 0; l < 8; ++l) {
    const GroupElement& x = group.letters[static_cast<std::size_t>(l)];
    e.mats[static_cast<std::size_t>(l)] = {x.a(), x.b(), x.c(), x.d()};
  }
  for (int l : e.allowed) {
    e.word = {l};
    e.visit(e.mats[static_cast<std::size_t>(l)]);
  }
  std::stable_sort(e.out.begin(), e.out.end(), [](const ConjugacyClass& x, const ConjugacyClass& y) {
    if (x.length_g1 != y.length_g1) return x.length_g1 < y.length_g1;
    return x.cyclic_word < y.cyclic_word;
  });
  return std::move(e.out);
}

// ---------------------------------------------------------------- geometric merge

namespace {

struct LiftSample {
  geom::Geodesic lift;
  int count = 0;
  std::vector<double> times;
  std::vector<Complex> reduced;
};

struct LiftInfo {
  std::vector<LiftSample> lifts;
  std::size_t best = 0;
  geom::FermiFrame frame;
  double length = 0.0;
};

constexpr double kLiftTol = 1e-7;

geom::Geodesic map_geodesic(const Mobius& m, const geom::Geodesic& g) {
  return {std::arg(m(geom::boundary_point(g.repelling))), std::arg(m(geom::boundary_point(g.attracting)))};
}

LiftInfo compute_lifts(const ConjugacyClass& cls, const SurfaceGroup& group, double spacing) {
  LiftInfo info;
  const geom::Geodesic ax = axis(cls.representative);
  info.frame = geom::FermiFrame(ax);
  info.length = cls.length_g1;
  const int n = std::max(16, static_cast<int>(std::ceil(cls.length_g1 / spacing)));
  for (int i = 0; i < n; ++i) {
    const double t = -0.5 * cls.length_g1 + cls.length_g1 * i / n;
    Complex z = info.frame.point(t, 0.0);
    Mobius m;
    if (!reduce_point(z, group, 128, &m)) throw Error(ErrorCode::NotReduced, "axis sample of " + cls.name());
    const geom::Geodesic lift = map_geodesic(m, ax);
    auto it = std::find_if(info.lifts.begin(), info.lifts.end(),
                           [&](const LiftSample& s) { return geom::same_geodesic(s.lift, lift, kLiftTol); });
    if (it == info.lifts.end()) {
      info.lifts.push_back({lift, 0, {}, {}});
      it = info.lifts.end() - 1;
    }
    ++it->count;
    it->times.push_back(t);
    it->reduced.push_back(z);
  }
  for (std::size_t k = 1; k < info.lifts.size(); ++k) {
    if (info.lifts[k].count > info.lifts[info.best].count) info.best = k;
  }
  return info;
}

bool contains_lift(const LiftInfo& info, const geom::Geodesic& g) {
  return std::any_of(info.lifts.begin(), info.lifts.end(),
                     [&](const LiftSample& s) { return geom::same_geodesic(s.lift, g, kLiftTol); });
}

bool geometric_proper_power(const LiftInfo& info, const SurfaceGroup& group) {
  const LiftSample& s = info.lifts[info.best];
  const std::size_t mid = s.times.size() / 2;
  const double t0 = s.times[mid];
  const Complex y0 = s.reduced[mid];
  const int kmax = static_cast<int>(std::floor(info.length / (octagon::systole() - 1e-6)));
  for (int k = 2; k <= kmax; ++k) {
    Complex z = info.frame.point(t0 + info.length / k, 0.0);
    if (!reduce_point(z, group, 128)) continue;
    if (std::abs(z - y0) < 1e-7) return true;
  }
  return false;
}

}  // namespace

std::vector<geom::Geodesic> lifts_meeting_octagon(const ConjugacyClass& cls, const SurfaceGroup& group,
                                                  double sample_spacing) {
  const LiftInfo info = compute_lifts(cls, group, sample_spacing);
  std::vector<geom::Geodesic> out;
  for (const auto& s : info.lifts) out.push_back(s.lift);
  return out;
}

MergeResult merge_conjugate_classes(const std::vector<ConjugacyClass>& classes, const SurfaceGroup& group,
                                    double sample_spacing) {
  const std::size_t n = classes.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return classes[x].length_g1 < classes[y].length_g1; });

  std::vector<long> rep(n, -1);
  std::vector<bool> geometric_power(n, false);
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start + 1;
    while (stop < n) {
      const double a = classes[order[stop - 1]].length_g1;
      const double b = classes[order[stop]].length_g1;
      if (b - a > 1e-9 * std::max(1.0, b)) break;
      ++stop;
    }
    // Within a length bucket, shorter words and then lexicographically
    // smaller words become representatives.
    std::vector<std::size_t> bucket(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(stop));
    std::sort(bucket.begin(), bucket.end(), [&](std::size_t x, std::size_t y) {
      const Word& wx = classes[x].cyclic_word;
      const Word& wy = classes[y].cyclic_word;
      if (wx.size() != wy.size()) return wx.size() < wy.size();
      return wx < wy;
    });
    std::vector<LiftInfo> infos;
    infos.reserve(bucket.size());
    for (std::size_t idx : bucket) infos.push_back(compute_lifts(classes[idx], group, sample_spacing));
    for (std::size_t i = 0; i < bucket.size(); ++i) {
      if (rep[bucket[i]] >= 0) continue;
      rep[bucket[i]] = static_cast<long>(bucket[i]);
      geometric_power[bucket[i]] = geometric_proper_power(infos[i], group);
      for (std::size_t j = i + 1; j < bucket.size(); ++j) {
        if (rep[bucket[j]] >= 0) continue;
        if (contains_lift(infos[i], infos[j].lifts[infos[j].best].lift)) rep[bucket[j]] = static_cast<long>(bucket[i]);
      }
    }
    start = stop;
  }

  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < n; ++i) {
    if (rep[i] == static_cast<long>(i)) reps.push_back(i);
  }
  std::stable_sort(reps.begin(), reps.end(), [&](std::size_t x, std::size_t y) {
    if (classes[x].length_g1 != classes[y].length_g1) return classes[x].length_g1 < classes[y].length_g1;
    return classes[x].cyclic_word < classes[y].cyclic_word;
  });
  MergeResult result;
  std::vector<std::size_t> slot(n, 0);
  for (std::size_t k = 0; k < reps.size(); ++k) {
    slot[reps[k]] = k;
    ConjugacyClass c = classes[reps[k]];
    c.primitive = c.primitive && !geometric_power[reps[k]];
    result.classes.push_back(std::move(c));
  }
  result.representative_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.representative_of[i] = slot[static_cast<std::size_t>(rep[i])];
  return result;
}

SampleGrid octagon_grid(int n_radial, int n_angular) {
  if (n_radial < 1 || n_angular < 8) throw Error(ErrorCode::InvalidArgument, "grid too coarse");
  SampleGrid grid;
  const double rmax = octagon::circumradius();
  grid.points.push_back(Complex{0.0, 0.0});
  for (int k = 1; k <= n_radial; ++k) {
    const double r = rmax * k / n_radial;
    for (int j = 0; j < n_angular; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / n_angular;
      if (r <= octagon::boundary_radius(theta) + 1e-12) grid.points.push_back(geom::polar_point(r, theta));
    }
  }
  grid.spacing = std::max(rmax / n_radial, std::sinh(rmax) * 2.0 * std::numbers::pi / n_angular);
  return grid;
}

std::string classes_csv(const std::vector<ConjugacyClass>& classes) {
  std::ostringstream out;
  out << "cyclic_word,trace,length_g1,primitive\n";
  for (const auto& c : classes) {
    out << c.name() << ',' << io::format_double(c.representative.trace()) << ','
        << io::format_double(c.length_g1) << ',' << (c.primitive ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace stretchlab
