#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fgb/boundary.hpp"
#include "fgb/errors.hpp"
#include "fgb/free_group.hpp"
#include "fgb/rational.hpp"

namespace fgb {

// A rectangle in the double boundary: rays starting with b times rays
// starting with c.
struct ProductCylinder {
  Cylinder b;
  Cylinder c;
};

struct DoubleBoundaryMass {
  bool divergent = false;
  Rational value = 0;  // meaningful only when !divergent
};

inline bool operator==(const DoubleBoundaryMass& x, const DoubleBoundaryMass& y) {
  return x.divergent == y.divergent && (x.divergent || x.value == y.value);
}

namespace detail {

// Longest common prefix of the two cylinder prefixes.
inline int common_prefix_length(const ProductCylinder& pc) {
  int d = 0;
  while (d < pc.b.depth() && d < pc.c.depth() && pc.b.letter(d + 1) == pc.c.letter(d + 1)) ++d;
  return d;
}

}  // namespace detail

/// Mass of a rectangle under the invariant double-boundary measure, whose
/// density against nu x nu is (2r)(2r-1)^{2d-1} where d is the length of
/// the common prefix of the two rays.
///
/// If the prefixes disagree at some index, d is constant on the rectangle
/// and the mass is a single density term. If they are equal so far, the
/// mass stratifies over the exact agreement depth d >= current depth; each
/// stratum contributes (2r)(2r-2) nu(w)^2 (2r-1)^{d + depth - 2}, a
/// geometric series with ratio 2r-1 > 1, so such rectangles carry infinite
/// mass and are reported as divergent. If one prefix strictly extends the
/// other, d is genuinely undetermined at this resolution and the caller is
/// asked to refine.
inline DoubleBoundaryMass dbl_measure(int rank, const ProductCylinder& pc) {
  validate_rank(rank);
  int d = detail::common_prefix_length(pc);
  const bool b_exhausted = d == pc.b.depth();
  const bool c_exhausted = d == pc.c.depth();
  if (b_exhausted && c_exhausted) return DoubleBoundaryMass{true, 0};
  if (b_exhausted || c_exhausted)
    throw RefineRequest("rectangle does not determine the common prefix depth; refine");
  Rational nu_b = pc.b.depth() == 0 ? Rational(1) : cylinder_measure(rank, pc.b);
  Rational nu_c = pc.c.depth() == 0 ? Rational(1) : cylinder_measure(rank, pc.c);
  Rational density = Rational(2 * rank) * pow_int(Rational(2 * rank - 1), 2L * d - 1);
  return DoubleBoundaryMass{false, density * nu_b * nu_c};
}

// g acting diagonally on a rectangle; both coordinates must be deep enough.
inline ProductCylinder product_action(const ReducedWord& g, const ProductCylinder& pc) {
  return ProductCylinder{cylinder_action(g, pc.b).image, cylinder_action(g, pc.c).image};
}

/// An admissible window xi_m, ..., xi_n of the two-sided shift space:
/// xi_i != xi_{i+1}^{-1} throughout. Serializes as "m:word".
class TwoSidedCylinder {
 public:
  TwoSidedCylinder(int start, std::vector<Generator> letters)
      : start_(start), letters_(std::move(letters)) {
    if (letters_.empty()) throw InputError("two-sided window must be nonempty");
    for (std::size_t i = 0; i + 1 < letters_.size(); ++i) {
      if (!may_follow(letters_[i], letters_[i + 1]))
        throw InputError("two-sided window is not admissible");
    }
  }

  int start() const { return start_; }
  int end() const { return start_ + static_cast<int>(letters_.size()) - 1; }
  int width() const { return static_cast<int>(letters_.size()); }
  const std::vector<Generator>& letters() const { return letters_; }

  bool covers(int lo, int hi) const { return start_ <= lo && hi <= end(); }

  Generator letter(int i) const {  // coordinate index, start() <= i <= end()
    if (!covers(i, i)) throw PreconditionError("two-sided window does not cover the index");
    return letters_[static_cast<std::size_t>(i - start_)];
  }

  // Window of the forward-shifted sequence (T xi)_j = xi_{j+1}.
  TwoSidedCylinder shifted(int amount) const {
    return TwoSidedCylinder(start_ - amount, letters_);
  }

  TwoSidedCylinder restricted(int lo, int hi) const {
    if (!covers(lo, hi)) throw PreconditionError("restriction outside the window");
    return TwoSidedCylinder(
        lo, std::vector<Generator>(letters_.begin() + (lo - start_),
                                   letters_.begin() + (hi - start_ + 1)));
  }

  std::string str() const {
    std::string out = std::to_string(start_) + ":";
    for (const auto& s : letters_) out.push_back(letter_to_char(s));
    return out;
  }

  static TwoSidedCylinder parse(const std::string& text, int rank) {
    auto pos = text.find(':');
    if (pos == std::string::npos) throw InputError("two-sided window literal needs 'm:word'");
    int start = std::stoi(text.substr(0, pos));
    return TwoSidedCylinder(start, ReducedWord::parse(text.substr(pos + 1), rank).letters());
  }

  friend bool operator==(const TwoSidedCylinder& a, const TwoSidedCylinder& b) {
    return a.start_ == b.start_ && a.letters_ == b.letters_;
  }

 private:
  int start_;
  std::vector<Generator> letters_;
};

/// Embedding of the fundamental domain {b_1 != c_1} into the two-sided
/// shift space: coordinate i is b_{-i}^{-1} for i < 0 and c_{i+1} for
/// i >= 0. The image window spans [-depth(b), depth(c)-1]; admissibility at
/// the junction is exactly the domain condition and is asserted.
inline TwoSidedCylinder to_two_sided(const ProductCylinder& pc) {
  if (pc.b.depth() < 1 || pc.c.depth() < 1)
    throw PreconditionError("domain embedding needs depth >= 1 on both coordinates");
  if (pc.b.letter(1) == pc.c.letter(1))
    throw InputError("(b, c) is not in the fundamental domain: b_1 == c_1");
  std::vector<Generator> letters;
  letters.reserve(static_cast<std::size_t>(pc.b.depth() + pc.c.depth()));
  for (int i = -pc.b.depth(); i < 0; ++i) letters.push_back(pc.b.letter(-i).inverse());
  for (int i = 0; i < pc.c.depth(); ++i) letters.push_back(pc.c.letter(i + 1));
  return TwoSidedCylinder(-pc.b.depth(), std::move(letters));  // constructor re-checks admissibility
}

// Markov measure of a window [m, n]: (2r)^{-1} (2r-1)^{m-n}; depends only
// on the width.
inline Rational markov_cylinder_measure(int rank, const TwoSidedCylinder& w) {
  validate_rank(rank);
  return Rational(1, 2 * rank) * pow_int(Rational(2 * rank - 1), 1L - w.width());
}

/// The shift cocycle on the two-sided space: the group element carrying xi
/// to its n-fold forward shift. Products of admissible letters are already
/// reduced, so no cancellation occurs.
inline ReducedWord shift_cocycle(int n, const TwoSidedCylinder& xi) {
  if (n == 0) return ReducedWord();
  if (n >= 1) {
    if (!xi.covers(0, n - 1))
      throw PreconditionError("shift_cocycle needs the window to cover [0, n-1]");
    std::vector<Generator> letters;
    letters.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) letters.push_back(xi.letter(i));
    return ReducedWord::from_reduced(std::move(letters)).inverse();
  }
  if (!xi.covers(n, -1))
    throw PreconditionError("shift_cocycle needs the window to cover [n, -1]");
  std::vector<Generator> letters;
  letters.reserve(static_cast<std::size_t>(-n));
  for (int i = n; i <= -1; ++i) letters.push_back(xi.letter(i));
  return ReducedWord::from_reduced(std::move(letters));
}

// All admissible windows on [start, start + width - 1], canonical order.
inline std::vector<TwoSidedCylinder> two_sided_windows(int rank, int start, int width,
                                                       std::size_t cap = kDefaultEnumerationCap) {
  Sphere s = sphere(rank, width, cap);
  std::vector<TwoSidedCylinder> out;
  out.reserve(s.elements.size());
  for (const auto& w : s.elements) out.emplace_back(start, w.letters());
  return out;
}

}  // namespace fgb
