#pragma once

#include <cassert>
#include <compare>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgb/errors.hpp"
#include "fgb/free_group.hpp"
#include "fgb/rational.hpp"

namespace fgb {

/// A cylinder of the boundary: the set of admissible rays with a fixed
/// admissible prefix. Depth 0 is the whole boundary. Admissible prefixes
/// satisfy the same non-backtracking condition as reduced words, so
/// cylinders serialize exactly like words ("ab", "e" for depth 0).
class Cylinder {
 public:
  Cylinder() = default;

  static Cylinder from_letters(std::vector<Generator> prefix) {
    for (std::size_t i = 0; i + 1 < prefix.size(); ++i) {
      if (!may_follow(prefix[i], prefix[i + 1]))
        throw InputError("cylinder prefix is not admissible");
    }
    Cylinder c;
    c.prefix_ = std::move(prefix);
    return c;
  }

  static Cylinder from_word(const ReducedWord& w) {
    Cylinder c;
    c.prefix_ = w.letters();
    return c;
  }

  static Cylinder parse(const std::string& text, int rank) {
    return from_word(ReducedWord::parse(text, rank));
  }

  int depth() const { return static_cast<int>(prefix_.size()); }
  const std::vector<Generator>& prefix() const { return prefix_; }
  const Generator& letter(int i) const { return prefix_[static_cast<std::size_t>(i) - 1]; }  // 1-based

  ReducedWord word() const { return ReducedWord::from_reduced(prefix_); }
  std::string str() const { return word().str(); }

  // [this] subset of [other] iff this prefix extends the other's.
  bool contained_in(const Cylinder& other) const {
    if (other.depth() > depth()) return false;
    return std::equal(other.prefix_.begin(), other.prefix_.end(), prefix_.begin());
  }

  Cylinder truncated(int new_depth) const {
    if (new_depth > depth()) throw PreconditionError("cannot truncate to a larger depth");
    Cylinder c;
    c.prefix_.assign(prefix_.begin(), prefix_.begin() + new_depth);
    return c;
  }

  friend bool operator==(const Cylinder& a, const Cylinder& b) { return a.prefix_ == b.prefix_; }
  friend std::strong_ordering operator<=>(const Cylinder& a, const Cylinder& b) {
    return a.word() <=> b.word();
  }

 private:
  std::vector<Generator> prefix_;
};

// All admissible extensions of c to exactly target_depth, in canonical order.
inline std::vector<Cylinder> cylinder_extensions(int rank, const Cylinder& c, int target_depth,
                                                 std::size_t cap = kDefaultEnumerationCap) {
  if (target_depth < c.depth()) throw PreconditionError("extension depth below cylinder depth");
  std::vector<std::vector<Generator>> frontier = {c.prefix()};
  for (int d = c.depth(); d < target_depth; ++d) {
    std::vector<std::vector<Generator>> next;
    next.reserve(frontier.size() * (2 * static_cast<std::size_t>(rank) - 1));
    for (const auto& p : frontier) {
      for (const auto& s : alphabet(rank)) {
        if (!p.empty() && !may_follow(p.back(), s)) continue;
        auto q = p;
        q.push_back(s);
        next.push_back(std::move(q));
      }
    }
    frontier = std::move(next);
    if (frontier.size() > cap) throw ResourceError("cylinder extension enumeration exceeds cap");
  }
  std::vector<Cylinder> out;
  out.reserve(frontier.size());
  for (auto& p : frontier) out.push_back(Cylinder::from_letters(std::move(p)));
  return out;
}

// nu of a depth-n cylinder: 1/|S_n| = (2r)^{-1} (2r-1)^{-(n-1)}.
inline Rational cylinder_measure(int rank, const Cylinder& c) {
  validate_rank(rank);
  if (c.depth() < 1) throw PreconditionError("cylinder_measure needs depth >= 1");
  return Rational(1) / Rational(sphere_size_formula(rank, c.depth()));
}

/// An eventually periodic boundary ray, stored as preperiod + repeating
/// period and kept in canonical form (primitive period, shortest
/// preperiod), so equality of values is equality of rays.
///
/// Every quantity this library evaluates on the boundary depends on a
/// finite prefix, and eventual periodicity makes each evaluation exact and
/// terminating.
class BoundaryPoint {
 public:
  BoundaryPoint(std::vector<Generator> preperiod, std::vector<Generator> period)
      : preperiod_(std::move(preperiod)), period_(std::move(period)) {
    if (period_.empty()) throw InputError("boundary point needs a nonempty period");
    auto check_chain = [](const std::vector<Generator>& v) {
      for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (!may_follow(v[i], v[i + 1])) throw InputError("inadmissible boundary sequence");
    };
    check_chain(preperiod_);
    check_chain(period_);
    if (!may_follow(period_.back(), period_.front()))
      throw InputError("period is inadmissible at the wraparound");
    if (!preperiod_.empty() && !may_follow(preperiod_.back(), period_.front()))
      throw InputError("preperiod-to-period junction is inadmissible");
    canonicalize();
  }

  static BoundaryPoint parse(const std::string& pre, const std::string& per, int rank) {
    return BoundaryPoint(ReducedWord::parse(pre, rank).letters(),
                         ReducedWord::parse(per, rank).letters());
  }

  const std::vector<Generator>& preperiod() const { return preperiod_; }
  const std::vector<Generator>& period() const { return period_; }

  // 1-based coordinate of the ray.
  Generator letter(long i) const {
    assert(i >= 1);
    long p = static_cast<long>(preperiod_.size());
    if (i <= p) return preperiod_[static_cast<std::size_t>(i - 1)];
    return period_[static_cast<std::size_t>((i - p - 1) % static_cast<long>(period_.size()))];
  }

  Cylinder prefix(int depth) const {
    std::vector<Generator> out;
    out.reserve(static_cast<std::size_t>(depth));
    for (int i = 1; i <= depth; ++i) out.push_back(letter(i));
    return Cylinder::from_letters(std::move(out));
  }

  // Drops the first k coordinates.
  BoundaryPoint shifted(int k) const {
    assert(k >= 0);
    std::size_t p = preperiod_.size();
    if (static_cast<std::size_t>(k) <= p) {
      return BoundaryPoint(
          std::vector<Generator>(preperiod_.begin() + k, preperiod_.end()), period_);
    }
    std::size_t m = (static_cast<std::size_t>(k) - p) % period_.size();
    std::vector<Generator> rotated(period_.begin() + static_cast<std::ptrdiff_t>(m), period_.end());
    rotated.insert(rotated.end(), period_.begin(), period_.begin() + static_cast<std::ptrdiff_t>(m));
    return BoundaryPoint({}, std::move(rotated));
  }

  // Prepends letters (the result must be admissible at the junction).
  BoundaryPoint prefixed(std::span<const Generator> head) const {
    if (head.empty()) return *this;
    std::vector<Generator> pre(head.begin(), head.end());
    Generator next = preperiod_.empty() ? period_.front() : preperiod_.front();
    if (!may_follow(pre.back(), next))
      throw InputError("prefixed: junction would be inadmissible");
    pre.insert(pre.end(), preperiod_.begin(), preperiod_.end());
    return BoundaryPoint(std::move(pre), period_);
  }

  std::string str() const {
    std::string out;
    for (const auto& s : preperiod_) out.push_back(letter_to_char(s));
    out.push_back('(');
    for (const auto& s : period_) out.push_back(letter_to_char(s));
    out.push_back(')');
    return out;
  }

  friend bool operator==(const BoundaryPoint& a, const BoundaryPoint& b) {
    return a.preperiod_ == b.preperiod_ && a.period_ == b.period_;
  }

 private:
  void canonicalize() {
    // Primitive period.
    for (std::size_t d = 1; d <= period_.size() / 2; ++d) {
      if (period_.size() % d != 0) continue;
      bool ok = true;
      for (std::size_t i = d; i < period_.size() && ok; ++i)
        ok = period_[i] == period_[i % d];
      if (ok) {
        period_.resize(d);
        break;
      }
    }
    // Shortest preperiod: absorb a trailing letter that matches the last
    // period letter by rotating the period right.
    while (!preperiod_.empty() && preperiod_.back() == period_.back()) {
      preperiod_.pop_back();
      period_.insert(period_.begin(), period_.back());
      period_.pop_back();
    }
  }

  std::vector<Generator> preperiod_;
  std::vector<Generator> period_;
};

struct BoundaryActionResult {
  BoundaryPoint image;
  int cancelled = 0;  // the k of the action: letters of g absorbed by the ray
};

/// g . xi for g = t_1...t_n reduced: cancel the largest initial segment of
/// xi against the tail of g, then concatenate.
inline BoundaryActionResult boundary_action(const ReducedWord& g, const BoundaryPoint& xi) {
  const int n = static_cast<int>(g.length());
  int k = 0;
  while (k < n && xi.letter(k + 1) == g.letter(static_cast<std::size_t>(n - k - 1)).inverse()) ++k;
  std::span<const Generator> head(g.letters().data(), static_cast<std::size_t>(n - k));
  return BoundaryActionResult{xi.shifted(k).prefixed(head), k};
}

struct CylinderActionResult {
  Cylinder image;
  int cancelled = 0;
};

/// Cylinder-to-cylinder form of the action. The cancellation count must be
/// determined by the prefix: either the matching stops inside it or g is
/// absorbed entirely; otherwise the caller must refine the cylinder.
inline CylinderActionResult cylinder_action(const ReducedWord& g, const Cylinder& c) {
  const int n = static_cast<int>(g.length());
  int k = 0;
  while (k < n && k < c.depth() &&
         c.letter(k + 1) == g.letter(static_cast<std::size_t>(n - k - 1)).inverse())
    ++k;
  if (k < n && k == c.depth())
    throw RefineRequest("cylinder too shallow to determine the cancellation of g");
  std::vector<Generator> out;
  out.reserve(static_cast<std::size_t>(n - k + c.depth() - k));
  out.insert(out.end(), g.letters().begin(), g.letters().end() - k);
  out.insert(out.end(), c.prefix().begin() + k, c.prefix().end());
  return CylinderActionResult{Cylinder::from_letters(std::move(out)), k};
}

// d(nu o g)/d(nu) at xi: (2r-1)^{2k-n}.
inline Rational rn_derivative(int rank, const ReducedWord& g, const BoundaryPoint& xi) {
  auto res = boundary_action(g, xi);
  return pow_int(Rational(2 * rank - 1), 2L * res.cancelled - static_cast<long>(g.length()));
}

inline Rational rn_derivative_on(int rank, const ReducedWord& g, const Cylinder& c) {
  auto res = cylinder_action(g, c);
  return pow_int(Rational(2 * rank - 1), 2L * res.cancelled - static_cast<long>(g.length()));
}

// Fiber displacement of the discrete Maharam extension: log of the RN
// derivative in base lambda = (2r-1)^{-1}, i.e. n - 2k. Independent of rank.
inline long maharam_shift(const ReducedWord& g, const BoundaryPoint& xi) {
  auto res = boundary_action(g, xi);
  return static_cast<long>(g.length()) - 2L * res.cancelled;
}

inline long maharam_shift_on(const ReducedWord& g, const Cylinder& c) {
  auto res = cylinder_action(g, c);
  return static_cast<long>(g.length()) - 2L * res.cancelled;
}

// First letter admissible after prev, in canonical order.
inline Generator continuation_letter(const Generator& prev) {
  return cancels(prev, Generator{1, 1}) ? Generator{1, -1} : Generator{1, 1};
}

// Some eventually periodic ray extending c.
inline BoundaryPoint any_point_in(const Cylinder& c) {
  if (c.depth() == 0) return BoundaryPoint({}, {Generator{1, 1}});
  return BoundaryPoint(c.prefix(), {continuation_letter(c.prefix().back())});
}

/// Busemann value on the tree: |g| minus twice the length of the common
/// prefix of g and xi. Cross-checked against the defining limit
/// d(xi_m, g) - d(xi_m, e) at m = |g|+1 and |g|+2, where it has stabilized.
inline int horofunction(const BoundaryPoint& xi, const ReducedWord& g) {
  const int n = static_cast<int>(g.length());
  int common = 0;
  while (common < n && g.letter(static_cast<std::size_t>(common)) == xi.letter(common + 1))
    ++common;
  const int value = n - 2 * common;
  for (int m = n + 1; m <= n + 2; ++m) {
    ReducedWord prefix_word = xi.prefix(m).word();
    int limit_form = static_cast<int>((prefix_word.inverse() * g).length()) - m;
    if (limit_form != value)
      throw std::logic_error("horofunction: limit form disagrees with prefix formula");
  }
  return value;
}

struct RnRatioReport {
  Rational ratio;  // nu(g.c) / nu(c), equal to the RN derivative on c
};

/// Independent verification of the RN formula: the measure ratio of a deep
/// cylinder against its image must equal the derivative at every ray in c.
inline RnRatioReport rn_derivative_vs_cylinder_ratio(int rank, const ReducedWord& g,
                                                     const Cylinder& c) {
  if (c.depth() < static_cast<int>(g.length()) + 1)
    throw PreconditionError("rn_derivative_vs_cylinder_ratio needs depth >= |g| + 1");
  auto res = cylinder_action(g, c);
  Rational ratio = cylinder_measure(rank, res.image) / cylinder_measure(rank, c);
  Rational derivative = rn_derivative(rank, g, any_point_in(c));
  if (ratio != derivative)
    throw std::logic_error("RN derivative disagrees with the cylinder measure ratio");
  return RnRatioReport{ratio};
}

// Writes the exponent m with value = base^m, if one exists.
inline bool is_integer_power_of(const Rational& value, long base, long* exponent_out) {
  if (value <= 0) return false;
  Rational b(base);
  Rational v = value;
  long m = 0;
  while (v > 1) {
    v /= b;
    ++m;
  }
  while (v < 1) {
    v *= b;
    --m;
  }
  if (v != 1) return false;
  if (exponent_out) *exponent_out = m;
  return true;
}

struct RatioSetQuery {
  Rational target;
  int max_word_length = 4;
  int max_depth = 4;
  // Kept for parity with the epsilon-form of the definition; on this
  // symbolic boundary the derivative is locally constant so witnesses are
  // exact and epsilon plays no role in the search.
  Rational epsilon = 0;
};

struct RatioSetWitness {
  Cylinder subcylinder;  // A' subset of A
  ReducedWord element;   // g != e with g.A' subset of A and RN == target on A'
};

/// Bounded search for a ratio-set witness on a cylinder A. Targets must be
/// integer powers of (2r-1); anything else admits no exact witness and is
/// rejected. A nullopt only means the bounded search failed.
inline std::optional<RatioSetWitness> ratio_set_witness(int rank, const Cylinder& A,
                                                        const RatioSetQuery& query) {
  validate_rank(rank);
  long exponent = 0;
  if (!is_integer_power_of(query.target, 2L * rank - 1, &exponent))
    throw InputError("ratio-set target must be an integer power of 2r-1");
  for (int len = 1; len <= query.max_word_length; ++len) {
    if ((len - exponent) % 2 != 0 || std::abs(exponent) > len) continue;  // 2k - len = exponent
    Sphere s = sphere(rank, len);
    for (const ReducedWord& g : s.elements) {
      for (int depth = std::max(A.depth(), 1); depth <= query.max_depth; ++depth) {
        for (const Cylinder& sub : cylinder_extensions(rank, A, depth)) {
          CylinderActionResult res;
          try {
            res = cylinder_action(g, sub);
          } catch (const RefineRequest&) {
            continue;
          }
          if (2L * res.cancelled - len != exponent) continue;
          if (!res.image.contained_in(A)) continue;
          return RatioSetWitness{sub, g};
        }
      }
    }
  }
  return std::nullopt;
}

// Deterministic sample of eventually periodic rays (fixed seed).
inline std::vector<BoundaryPoint> sample_boundary_points(int rank, int count,
                                                         unsigned seed = 20240817u) {
  std::mt19937 rng(seed);
  auto letters = alphabet(rank);
  std::uniform_int_distribution<std::size_t> pick_letter(0, letters.size() - 1);
  std::uniform_int_distribution<int> pre_len(0, 3);
  std::uniform_int_distribution<int> per_len(1, 4);
  std::vector<BoundaryPoint> out;
  while (static_cast<int>(out.size()) < count) {
    std::vector<Generator> pre, per;
    bool ok = true;
    int np = pre_len(rng), nq = per_len(rng);
    for (int i = 0; i < np && ok; ++i) {
      Generator s = letters[pick_letter(rng)];
      if (!pre.empty() && !may_follow(pre.back(), s)) ok = false;
      pre.push_back(s);
    }
    for (int i = 0; i < nq && ok; ++i) {
      Generator s = letters[pick_letter(rng)];
      if (!per.empty() && !may_follow(per.back(), s)) ok = false;
      per.push_back(s);
    }
    if (!ok || per.empty() || !may_follow(per.back(), per.front())) continue;
    if (!pre.empty() && !may_follow(pre.back(), per.front())) continue;
    out.emplace_back(std::move(pre), std::move(per));
  }
  return out;
}

}  // namespace fgb
