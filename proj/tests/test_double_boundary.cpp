#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "fgb/double_boundary.hpp"

using namespace fgb;

namespace {

ReducedWord w(const std::string& text) { return ReducedWord::parse(text, 2); }
Cylinder cyl(const std::string& text) { return Cylinder::parse(text, 2); }
ProductCylinder rect(const std::string& b, const std::string& c) {
  return ProductCylinder{cyl(b), cyl(c)};
}

}  // namespace

TEST_CASE("double boundary density on separated rectangles") {
  DoubleBoundaryMass m = dbl_measure(2, rect("a", "b"));
  REQUIRE(!m.divergent);
  CHECK(m.value == Rational(1, 12));  // (4/3)(1/4)(1/4)
}

TEST_CASE("the fundamental domain has mass one at every depth") {
  for (int depth = 1; depth <= 3; ++depth) {
    Rational total(0);
    auto words = sphere(2, depth).elements;
    for (const auto& u : words) {
      for (const auto& v : words) {
        if (u.letter(0) == v.letter(0)) continue;  // outside the domain
        auto m = dbl_measure(2, ProductCylinder{Cylinder::from_word(u), Cylinder::from_word(v)});
        REQUIRE(!m.divergent);
        total += m.value;
      }
    }
    CHECK(total == 1);
  }
}

TEST_CASE("equal prefixes carry divergent mass, comparable ones ask to refine") {
  CHECK(dbl_measure(2, rect("ab", "ab")).divergent);
  CHECK_THROWS_AS(dbl_measure(2, rect("a", "ab")), RefineRequest);
}

TEST_CASE("off-diagonal refinement of a diagonal rectangle matches the stratum value") {
  // First stratum of [w] x [w]: pairs splitting immediately after w.
  for (const std::string& base : {std::string("a"), std::string("ba")}) {
    Cylinder c = cyl(base);
    const int m = c.depth();
    Rational stratum(0);
    for (const auto& u : cylinder_extensions(2, c, m + 1)) {
      for (const auto& v : cylinder_extensions(2, c, m + 1)) {
        if (u == v) continue;
        auto mass = dbl_measure(2, ProductCylinder{u, v});
        REQUIRE(!mass.divergent);
        stratum += mass.value;
      }
    }
    Rational nu_w = cylinder_measure(2, c);
    Rational expected = Rational(4) * Rational(2) * nu_w * nu_w * pow_int(Rational(3), 2L * m - 2);
    CHECK(stratum == expected);
  }
}

TEST_CASE("double boundary mass is additive under refinement of both coordinates") {
  // For separated rectangles the density is constant, so the mass must
  // equal the sum over all one-letter refinements of either coordinate.
  for (const auto& pair : {rect("a", "b"), rect("ab", "Ba"), rect("ba", "bA")}) {
    auto whole = dbl_measure(2, pair);
    REQUIRE(!whole.divergent);
    Rational by_b(0), by_c(0), by_both(0);
    auto b_ext = cylinder_extensions(2, pair.b, pair.b.depth() + 1);
    auto c_ext = cylinder_extensions(2, pair.c, pair.c.depth() + 1);
    for (const auto& u : b_ext) by_b += dbl_measure(2, ProductCylinder{u, pair.c}).value;
    for (const auto& v : c_ext) by_c += dbl_measure(2, ProductCylinder{pair.b, v}).value;
    for (const auto& u : b_ext)
      for (const auto& v : c_ext) by_both += dbl_measure(2, ProductCylinder{u, v}).value;
    CHECK(by_b == whole.value);
    CHECK(by_c == whole.value);
    CHECK(by_both == whole.value);
  }
}

TEST_CASE("double boundary measure is invariant at window scale") {
  auto words = sphere(2, 3).elements;
  for (const auto& g : ball(2, 2)) {
    for (const auto& u : words) {
      for (const auto& v : words) {
        ProductCylinder r{Cylinder::from_word(u), Cylinder::from_word(v)};
        ProductCylinder moved = product_action(g, r);
        if (u == v) {
          CHECK(dbl_measure(2, moved).divergent);
          continue;
        }
        CHECK(dbl_measure(2, moved) == dbl_measure(2, r));
      }
    }
  }
}

TEST_CASE("embedding into the two-sided space") {
  TwoSidedCylinder image = to_two_sided(rect("a", "b"));
  CHECK(image.start() == -1);
  CHECK(image.end() == 0);
  CHECK(image.letter(-1) == Generator{1, -1});
  CHECK(image.letter(0) == Generator{2, 1});
  CHECK_THROWS_AS(to_two_sided(rect("a", "ab")), InputError);

  // Longer prefixes embed admissibly whenever b_1 != c_1.
  for (const auto& u : sphere(2, 3).elements) {
    for (const auto& v : sphere(2, 3).elements) {
      if (u.letter(0) == v.letter(0)) continue;
      CHECK_NOTHROW(to_two_sided(ProductCylinder{Cylinder::from_word(u), Cylinder::from_word(v)}));
    }
  }
}

TEST_CASE("markov window measure") {
  TwoSidedCylinder single(0, {Generator{1, 1}});
  CHECK(markov_cylinder_measure(2, single) == Rational(1, 4));
  TwoSidedCylinder pair = TwoSidedCylinder::parse("-1:Ab", 2);
  CHECK(markov_cylinder_measure(2, pair) == Rational(1, 12));
  // Shift invariance: the mass depends only on the width.
  CHECK(markov_cylinder_measure(2, pair.shifted(5)) == markov_cylinder_measure(2, pair));
  CHECK(markov_cylinder_measure(2, TwoSidedCylinder::parse("7:ab", 2)) == Rational(1, 12));
}

TEST_CASE("markov measure refines consistently on both sides to width 6") {
  for (int width = 1; width <= 5; ++width) {
    for (const auto& window : two_sided_windows(2, -2, width)) {
      Rational right(0), left(0);
      for (const auto& s : alphabet(2)) {
        if (may_follow(window.letters().back(), s)) {
          auto extended = window.letters();
          extended.push_back(s);
          right += markov_cylinder_measure(2, TwoSidedCylinder(window.start(), extended));
        }
        if (may_follow(s, window.letters().front())) {
          std::vector<Generator> extended = {s};
          extended.insert(extended.end(), window.letters().begin(), window.letters().end());
          left += markov_cylinder_measure(2, TwoSidedCylinder(window.start() - 1, extended));
        }
      }
      CHECK(right == markov_cylinder_measure(2, window));
      CHECK(left == markov_cylinder_measure(2, window));
    }
  }
}

TEST_CASE("total markov mass is one at each width") {
  for (int width = 1; width <= 6; ++width) {
    Rational total(0);
    for (const auto& window : two_sided_windows(2, 0, width))
      total += markov_cylinder_measure(2, window);
    CHECK(total == 1);
  }
}

TEST_CASE("shift cocycle values") {
  TwoSidedCylinder window = TwoSidedCylinder::parse("-2:abab", 2);
  CHECK(shift_cocycle(0, window).is_identity());
  CHECK(shift_cocycle(1, window) == w("A"));   // inverse of xi_0 = a
  CHECK(shift_cocycle(2, window) == w("BA"));  // inverse of xi_0 xi_1
  CHECK(shift_cocycle(-1, window) == w("b"));  // xi_{-1}
  CHECK(shift_cocycle(-2, window) == w("ab"));
  CHECK_THROWS_AS(shift_cocycle(3, window), PreconditionError);
}

TEST_CASE("shift cocycle satisfies the cocycle law") {
  for (const auto& window : two_sided_windows(2, -3, 7)) {
    for (int m = -3; m <= 3; ++m) {
      for (int n = -3; n <= 3; ++n) {
        if (std::abs(m + n) > 3) continue;
        TwoSidedCylinder shifted = window.shifted(n);
        bool covered = (m == 0 || (m > 0 ? shifted.covers(0, m - 1) : shifted.covers(m, -1))) &&
                       (n == 0 || (n > 0 ? window.covers(0, n - 1) : window.covers(n, -1))) &&
                       (m + n == 0 || (m + n > 0 ? window.covers(0, m + n - 1)
                                                 : window.covers(m + n, -1)));
        if (!covered) continue;
        CHECK(shift_cocycle(m + n, window) ==
              shift_cocycle(m, shifted) * shift_cocycle(n, window));
      }
    }
  }
}

TEST_CASE("domain dichotomy: returns to the domain are shift powers") {
  // For |g| <= 3 and depth-5 rectangles inside the domain, whenever
  // g.(b,c) lands back in the domain, g is an inverse prefix of b or of c
  // and the embedding moves by exactly that shift power.
  auto words = sphere(2, 5).elements;
  int checked = 0;
  for (const auto& g : ball(2, 3)) {
    if (g.is_identity()) continue;
    for (const auto& u : words) {
      for (const auto& v : words) {
        if (u.letter(0) == v.letter(0)) continue;
        ProductCylinder r{Cylinder::from_word(u), Cylinder::from_word(v)};
        ProductCylinder moved = product_action(g, r);
        if (moved.b.letter(1) == moved.c.letter(1)) continue;  // left the domain

        const int n = static_cast<int>(g.length());
        bool inverse_of_b = g == r.b.truncated(n).word().inverse();
        bool inverse_of_c = g == r.c.truncated(n).word().inverse();
        CHECK((inverse_of_b || inverse_of_c));

        TwoSidedCylinder before = to_two_sided(r);
        TwoSidedCylinder after = to_two_sided(moved);
        TwoSidedCylinder expected = before.shifted(inverse_of_c ? n : -n);
        int lo = std::max(after.start(), expected.start());
        int hi = std::min(after.end(), expected.end());
        REQUIRE(lo <= hi);
        CHECK(after.restricted(lo, hi) == expected.restricted(lo, hi));
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}
