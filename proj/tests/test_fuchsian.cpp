#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <set>

#include "stretchlab/errors.hpp"
#include "stretchlab/fuchsian.hpp"

using namespace stretchlab;

namespace {

const SurfaceGroup& G() { return shared_bolza_group(); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no stretchlab::Error thrown";
  return ErrorCode::InvalidArgument;
}

// Cyclically reduced words over the given letters up to length n, one per
// rotation class. Independent of the library's word utilities.
std::size_t necklace_count(const std::vector<int>& letters, int n) {
  std::set<std::vector<int>> seen;
  std::vector<int> w;
  auto rec = [&](auto&& self, int len) -> void {
    if (static_cast<int>(w.size()) == len) {
      if ((w.front() ^ 1) == w.back() && len > 1) return;
      std::vector<int> best = w;
      for (int k = 1; k < len; ++k) {
        std::vector<int> r(w.begin() + k, w.end());
        r.insert(r.end(), w.begin(), w.begin() + k);
        best = std::min(best, r);
      }
      seen.insert(best);
      return;
    }
    for (int l : letters) {
      if (!w.empty() && (w.back() ^ 1) == l) continue;
      w.push_back(l);
      self(self, len);
      w.pop_back();
    }
  };
  for (int len = 1; len <= n; ++len) rec(rec, len);
  return seen.size();
}

}  // namespace

TEST(Words, ReductionAndRotation) {
  EXPECT_EQ(free_reduce(word_from_string("a1A1b1")), word_from_string("b1"));
  EXPECT_EQ(cyclic_reduce(word_from_string("B1a1b1")), word_from_string("a1"));
  EXPECT_EQ(minimal_rotation(word_from_string("b1a1")), word_from_string("a1b1"));
  EXPECT_EQ(primitive_period(word_from_string("a1b1a1b1")), 2u);
  EXPECT_TRUE(is_proper_power(word_from_string("a1a1a1")));
  EXPECT_FALSE(is_proper_power(word_from_string("a1b1b1")));
  EXPECT_EQ(word_to_string(word_from_string("a1B2b1A2")), "a1B2b1A2");
  EXPECT_EQ(inverse_word(word_from_string("a1b2")), word_from_string("B2A1"));
}

TEST(Bolza, RelationHolds) {
  EXPECT_LE(G().commutator_relator().max_entry_diff(GroupElement()), 1e-9);
  EXPECT_LE(G().octagon_relator().max_entry_diff(GroupElement()), 1e-9);
}

TEST(Bolza, GeneratorTraceAndSystole) {
  const double tr = 2.0 * (1.0 + std::numbers::sqrt2);
  for (const auto& g : G().letters) {
    EXPECT_NEAR(std::abs(g.trace()), tr, 1e-9);
    EXPECT_TRUE(g.is_hyperbolic());
    EXPECT_NEAR(translation_length(g), 2.0 * std::acosh(1.0 + std::numbers::sqrt2), 1e-10);
  }
  EXPECT_NEAR(octagon::systole(), 2.0 * std::acosh(1.0 + std::numbers::sqrt2), 1e-12);
  EXPECT_NEAR(octagon::systole(), 3.0571417, 2e-7);
  EXPECT_NEAR(octagon::area(), 4.0 * std::numbers::pi, 1e-12);
}

TEST(Bolza, TranslationLengthAndAxisOfDiagonal) {
  EXPECT_NEAR(translation_length(GroupElement(std::exp(0.5), 0, 0, std::exp(-0.5))), 1.0, 1e-12);
  // z -> e^2 z in the half-plane pushes towards +1 in the disk.
  const auto ax = axis(GroupElement(std::exp(1.0), 0, 0, std::exp(-1.0)));
  EXPECT_LE(geom::angle_gap(ax.attracting, 0.0), 1e-12);
  EXPECT_LE(geom::angle_gap(ax.repelling, std::numbers::pi), 1e-12);
  EXPECT_EQ(code_of([] { translation_length(GroupElement()); }), ErrorCode::NonHyperbolic);
  EXPECT_EQ(code_of([] { axis(GroupElement()); }), ErrorCode::NonHyperbolic);
}

TEST(Bolza, AxisIsInvariant) {
  for (const char* w : {"a1", "a1b1", "a1B2b1", "b2a2A1"}) {
    const GroupElement g = G().evaluate(word_from_string(w));
    const auto ax = axis(g);
    EXPECT_TRUE(geom::same_geodesic(ax, axis(power(g, 2)), 1e-9)) << w;
    const geom::FermiFrame frame(ax);
    for (double t : {-1.0, 0.0, 2.0}) {
      const Complex p = frame.point(t, 0.0);
      const Complex q = g.apply(p);
      EXPECT_LE(frame.distance(q), 1e-8) << w;
      // Translation by the translation length towards the attracting end.
      EXPECT_NEAR(frame.coordinates(q).first - t, translation_length(g), 1e-8) << w;
    }
  }
}

TEST(Bolza, DeterminantStaysOne) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> letter(0, 7);
  for (int k = 0; k < 200; ++k) {
    Word w;
    const int len = 1 + k % 16;
    for (int i = 0; i < len; ++i) w.push_back(letter(rng));
    const GroupElement g = G().evaluate(w);
    // Entries grow like exp(length / 2), so det is only meaningful relative
    // to the size of the products it cancels.
    const double scale = std::max(1.0, std::abs(g.a() * g.d()) + std::abs(g.b() * g.c()));
    EXPECT_NEAR(g.det(), 1.0, 1e-10 * scale) << word_to_string(w);
    if (len <= 4) EXPECT_NEAR(g.det(), 1.0, 1e-10) << word_to_string(w);
  }
}

TEST(Bolza, ReductionLandsInDirichletDomain) {
  auto dirichlet = [](Complex z) {
    const double d0 = geom::distance(z, 0.0);
    for (const auto& s : G().side_pairings) {
      if (d0 > geom::distance(z, s.apply(0.0)) + 1e-9) return false;
    }
    return true;
  };
  const auto origin = reduce_to_fundamental_domain(0.0, G());
  EXPECT_LE(std::abs(origin.point), 1e-15);
  const auto back = reduce_to_fundamental_domain(G().generators[0].apply(0.0), G());
  EXPECT_LE(std::abs(back.point), 1e-9);
  EXPECT_EQ(word_to_string(back.element.word()), "A1");

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int k = 0; k < 40; ++k) {
    const Complex z = geom::polar_point(5.0, angle(rng));
    const auto r = reduce_to_fundamental_domain(z, G());
    EXPECT_TRUE(in_octagon(r.point, 1e-9));
    EXPECT_TRUE(dirichlet(r.point));
    EXPECT_LE(std::abs(r.element.apply(z) - r.point), 1e-9);
    EXPECT_LE(std::abs(G().evaluate(r.element.word()).apply(z) - r.point), 1e-8);
  }
}

TEST(Enumerate, WordLengthOneGivesEightDistinctClasses) {
  const auto classes = enumerate_classes(G(), 1);
  ASSERT_EQ(classes.size(), 8u);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      EXPECT_FALSE(geom::same_geodesic(axis(classes[i].representative), axis(classes[j].representative), 1e-6));
    }
  }
}

TEST(Enumerate, FreeSubgroupMatchesNecklaceCount) {
  EnumerateOptions opts;
  opts.generators = {0, 1};
  for (int n = 1; n <= 4; ++n) {
    EXPECT_EQ(enumerate_classes(G(), n, std::nullopt, opts).size(), necklace_count({0, 1, 2, 3}, n)) << n;
  }
}

TEST(Enumerate, LengthsAndOrdering) {
  const auto classes = enumerate_classes(G(), 3);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    EXPECT_NEAR(c.length_g1, 2.0 * std::acosh(std::abs(c.representative.trace()) / 2.0), 1e-10);
    if (i > 0) EXPECT_LE(classes[i - 1].length_g1, c.length_g1 + 1e-12);
    const Word inv = minimal_rotation(cyclic_reduce(inverse_word(c.cyclic_word)));
    const auto it = std::find_if(classes.begin(), classes.end(), [&](const auto& d) { return d.cyclic_word == inv; });
    ASSERT_NE(it, classes.end());
    EXPECT_NEAR(it->length_g1, c.length_g1, 1e-9);
    if (is_proper_power(c.cyclic_word)) {
      EXPECT_FALSE(c.primitive);
      const std::size_t p = primitive_period(c.cyclic_word);
      const Word root(c.cyclic_word.begin(), c.cyclic_word.begin() + static_cast<long>(p));
      EXPECT_NEAR(c.length_g1, static_cast<double>(c.cyclic_word.size() / p) * make_class(G(), root).length_g1, 1e-8);
    }
  }
}

TEST(Enumerate, BudgetIsEnforced) {
  EnumerateOptions opts;
  opts.budget = 100;
  EXPECT_EQ(code_of([&] { enumerate_classes(G(), 4, std::nullopt, opts); }), ErrorCode::CapacityExceeded);
  ::setenv("STRETCHLAB_BUDGET", "50", 1);
  EXPECT_EQ(default_word_budget(), 50u);
  EXPECT_EQ(code_of([] { enumerate_classes(G(), 3); }), ErrorCode::CapacityExceeded);
  ::unsetenv("STRETCHLAB_BUDGET");
  EXPECT_EQ(default_word_budget(), 10000000u);
}

TEST(Merge, RelatorConjugatesCollapse) {
  // The boundary relation makes these two different cyclic words the same element.
  const auto x = make_class(G(), word_from_string("a1B1a2B2"));
  const auto y = make_class(G(), word_from_string("B2a2B1a1"));
  EXPECT_NE(x.cyclic_word, y.cyclic_word);
  EXPECT_NEAR(x.length_g1, y.length_g1, 1e-9);
  const auto merged = merge_conjugate_classes({x, y, make_class(G(), word_from_string("a1"))}, G());
  EXPECT_EQ(merged.classes.size(), 2u);
  EXPECT_EQ(merged.representative_of[0], merged.representative_of[1]);
  EXPECT_NE(merged.representative_of[0], merged.representative_of[2]);
}

TEST(Merge, InverseOrientationsStayDistinct) {
  const auto merged = merge_conjugate_classes(enumerate_classes(G(), 1), G());
  EXPECT_EQ(merged.classes.size(), 8u);
}

TEST(Enumerate, PrimitiveGrowthFollowsPrimeGeodesicCount) {
  // N(T) ~ Ei(T). The short spectrum has large multiplicities, so log N(T) / T
  // approaches the asymptotic curve from above on [5, 8]; log(T N(T)) / T
  // decreases towards 1.
  const auto merged = merge_conjugate_classes(enumerate_classes(G(), 8, 8.0), G()).classes;
  double previous = 2.0;
  for (double T : {5.0, 6.0, 7.0, 8.0}) {
    const auto count = std::count_if(merged.begin(), merged.end(),
                                     [&](const auto& c) { return c.primitive && c.length_g1 <= T; });
    ASSERT_GT(count, 0);
    const double rate = std::log(static_cast<double>(count)) / T;
    EXPECT_NEAR(rate, std::log(std::expint(T)) / T, 0.15) << T;
    const double normalized = std::log(T * static_cast<double>(count)) / T;
    EXPECT_LT(normalized, previous) << T;
    EXPECT_GT(normalized, 1.0) << T;
    previous = normalized;
  }
  EXPECT_LT(previous, 1.05);
}

TEST(Octagon, GridIsInside) {
  const auto grid = octagon_grid(10, 32);
  EXPECT_GT(grid.points.size(), 100u);
  for (Complex z : grid.points) EXPECT_TRUE(in_octagon(z, 1e-9));
  EXPECT_GT(grid.spacing, 0.0);
  EXPECT_NEAR(octagon::boundary_radius(0.0), octagon::inradius(), 1e-12);
  EXPECT_NEAR(octagon::boundary_radius(std::numbers::pi / 8.0), octagon::circumradius(), 1e-12);
}
