#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stretchlab/geometry.hpp"

namespace stretchlab {

using geom::Complex;

// Letters are 2*k + inv for generator k in {0: a1, 1: b1, 2: a2, 3: b2};
// inv = 1 marks the inverse. This is also the dedup alphabet order.
using Word = std::vector<int>;

inline int inverse_letter(int letter) { return letter ^ 1; }
Word inverse_word(const Word& w);
Word free_reduce(const Word& w);
Word concat(const Word& a, const Word& b);
bool is_cyclically_reduced(const Word& w);
Word cyclic_reduce(const Word& w);
Word minimal_rotation(const Word& w);
// Smallest p such that w is (w[0..p))^(|w|/p).
std::size_t primitive_period(const Word& w);
bool is_proper_power(const Word& w);

// "a1B2" style; uppercase is the inverse.
std::string word_to_string(const Word& w);
Word word_from_string(const std::string& s);

inline constexpr double kHyperbolicTol = 1e-9;

// PSL(2,R) element in the upper half-plane normalization, acting on the disk
// through the Cayley transform.
class GroupElement {
 public:
  GroupElement() = default;
  GroupElement(double a, double b, double c, double d, Word word = {});
  static GroupElement from_mobius(const geom::Mobius& m, Word word = {});

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }
  const Word& word() const { return word_; }

  double trace() const { return a_ + d_; }
  double det() const { return a_ * d_ - b_ * c_; }
  bool is_hyperbolic(double tol = kHyperbolicTol) const;

  // Word parts are concatenated and freely reduced.
  GroupElement operator*(const GroupElement& g) const;
  GroupElement inverse() const;

  geom::Mobius mobius() const;
  Complex apply(Complex z) const { return mobius()(z); }

  double max_entry_diff(const GroupElement& g) const;

 private:
  void renormalize();

  double a_ = 1.0, b_ = 0.0, c_ = 0.0, d_ = 1.0;
  Word word_;
};

GroupElement power(const GroupElement& g, int k);
GroupElement commutator(const GroupElement& x, const GroupElement& y);

double translation_length(const GroupElement& g);
// Fixed points on the unit circle, attracting second.
geom::Geodesic axis(const GroupElement& g);

namespace octagon {
double systole();         // 2 arccosh(1 + sqrt 2)
double inradius();        // distance from the center to a side midpoint
double circumradius();    // distance from the center to a vertex
double area();            // 4 pi
// Octagon boundary distance from the origin in direction theta.
double boundary_radius(double theta);
}  // namespace octagon

struct SurfaceGroup {
  std::array<GroupElement, 4> generators;  // a1, b1, a2, b2
  std::array<GroupElement, 8> letters;     // indexed by letter code
  // side_pairings[j] maps the octagon to its neighbour across side j
  // (side j has its midpoint in direction j*pi/4).
  std::array<GroupElement, 8> side_pairings;
  std::array<geom::Mobius, 8> side_inverse_mobius;
  // Words in the generators that satisfy the product-of-commutators relation.
  std::array<GroupElement, 4> symplectic_basis;
  int genus = 2;

  GroupElement evaluate(const Word& w) const;
  // a1 b1^-1 a2 b2^-1 a1^-1 b1 a2^-1 b2, the boundary word of the octagon.
  GroupElement octagon_relator() const;
  // [alpha1, beta1][alpha2, beta2] over the symplectic basis.
  GroupElement commutator_relator() const;
};

SurfaceGroup build_bolza_group();
const SurfaceGroup& shared_bolza_group();

bool in_octagon(Complex z, double tol = 1e-12);

struct Reduction {
  Complex point;
  GroupElement element;  // element.apply(input) == point
};

Reduction reduce_to_fundamental_domain(Complex z, const SurfaceGroup& group, int search_depth = 64);
// Same reduction without word bookkeeping; returns false if the depth ran out.
bool reduce_point(Complex& z, const SurfaceGroup& group, int search_depth, geom::Mobius* applied = nullptr);

struct ConjugacyClass {
  Word cyclic_word;
  GroupElement representative;
  double length_g1 = 0.0;
  bool primitive = true;

  std::string name() const { return word_to_string(cyclic_word); }
};

struct EnumerateOptions {
  std::uint64_t budget = 0;          // 0: use default_word_budget()
  std::vector<int> generators{0, 1, 2, 3};
};

// STRETCHLAB_BUDGET if set, else 1e7 projected words.
std::uint64_t default_word_budget();
std::uint64_t projected_word_count(int n_generators, int max_word_len);

std::vector<ConjugacyClass> enumerate_classes(const SurfaceGroup& group, int max_word_len,
                                              std::optional<double> length_cutoff = std::nullopt,
                                              const EnumerateOptions& options = {});

ConjugacyClass make_class(const SurfaceGroup& group, const Word& word);

// Collapses free-group classes that are conjugate in the surface group (same
// oriented closed geodesic). Keeps the first class of each orbit in input
// order and clears `primitive` on classes that are geometric proper powers.
struct MergeResult {
  std::vector<ConjugacyClass> classes;
  std::vector<std::size_t> representative_of;  // per input class, index into classes
};
MergeResult merge_conjugate_classes(const std::vector<ConjugacyClass>& classes, const SurfaceGroup& group,
                                    double sample_spacing = 0.02);

// Lifts of the closed geodesic of `cls` that meet the octagon.
std::vector<geom::Geodesic> lifts_meeting_octagon(const ConjugacyClass& cls, const SurfaceGroup& group,
                                                  double sample_spacing = 0.02);

struct SampleGrid {
  std::vector<Complex> points;
  double spacing = 0.0;  // largest hyperbolic gap between neighbouring samples
};
// Polar grid about the octagon center, restricted to the closed octagon.
SampleGrid octagon_grid(int n_radial, int n_angular);

std::string classes_csv(const std::vector<ConjugacyClass>& classes);

}  // namespace stretchlab
