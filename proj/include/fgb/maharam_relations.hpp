#pragma once

#include <algorithm>
#include <cassert>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fgb/boundary.hpp"
#include "fgb/double_boundary.hpp"
#include "fgb/errors.hpp"
#include "fgb/free_group.hpp"
#include "fgb/group_measure.hpp"
#include "fgb/rational.hpp"

namespace fgb {

// A point of the discrete Maharam extension: boundary ray plus integer
// fiber coordinate; the fiber weight of t is lambda^{-t}, lambda = (2r-1)^{-1}.
struct MaharamPoint {
  BoundaryPoint xi;
  long t = 0;
};

inline MaharamPoint maharam_act(const ReducedWord& g, const MaharamPoint& p) {
  auto res = boundary_action(g, p.xi);
  long shift = static_cast<long>(g.length()) - 2L * res.cancelled;
  return MaharamPoint{res.image, p.t + shift};
}

struct MaharamInvarianceReport {
  Rational lhs;  // nu(g.c) * lambda^{-(t + shift)}
  Rational rhs;  // nu(c)   * lambda^{-t}
  bool holds = false;
};

/// Certificate that the extension preserves nu x theta_lambda on a cylinder
/// deep enough for the action to be cylinder-to-cylinder. Equivalent to
/// rn_derivative * lambda^{shift} == 1 on c, which pins the sign of the
/// fiber displacement.
inline MaharamInvarianceReport check_maharam_invariance(int rank, const ReducedWord& g,
                                                        const Cylinder& c, long t) {
  if (c.depth() < static_cast<int>(g.length()) + 1)
    throw PreconditionError("check_maharam_invariance needs depth >= |g| + 1");
  auto res = cylinder_action(g, c);
  long shift = static_cast<long>(g.length()) - 2L * res.cancelled;
  Rational lambda = Rational(1, 2 * rank - 1);
  Rational lhs = cylinder_measure(rank, res.image) * pow_int(lambda, -(t + shift));
  Rational rhs = cylinder_measure(rank, c) * pow_int(lambda, -t);
  return MaharamInvarianceReport{lhs, rhs, lhs == rhs};
}

// ---------------------------------------------------------------------------
// Relation instances and their leafwise weight families.
// ---------------------------------------------------------------------------

// Ground cell of the random-walk relation: a finite coordinate window of
// the step sequence, stored as indices into the support of kappa. Entries
// cover x(start), ..., x(start + size - 1).
struct StepWindow {
  int start = 1;
  std::vector<int> symbols;

  int width() const { return static_cast<int>(symbols.size()); }
  bool covers(int lo, int hi) const {
    return start <= lo && hi <= start + width() - 1;
  }
  int symbol(int i) const { return symbols[static_cast<std::size_t>(i - start)]; }

  StepWindow shifted(int amount) const { return StepWindow{start - amount, symbols}; }

  friend bool operator==(const StepWindow&, const StepWindow&) = default;
};

// A window of actual group elements x(start..): the raw input form of the
// random-walk cocycle.
struct WordWindow {
  int start = 1;
  std::vector<ReducedWord> entries;

  bool covers(int lo, int hi) const {
    return start <= lo && hi <= start + static_cast<int>(entries.size()) - 1;
  }
  const ReducedWord& at(int i) const { return entries[static_cast<std::size_t>(i - start)]; }
};

/// The cocycle of the shift on the step space: products of steps walked
/// forward for n > 0, inverses walked backward for n < 0.
inline ReducedWord random_walk_cocycle(const WordWindow& x, int n) {
  if (n == 0) return ReducedWord();
  std::vector<Generator> acc;
  if (n > 0) {
    if (!x.covers(1, n)) throw PreconditionError("random_walk_cocycle needs window [1, n]");
    ReducedWord out;
    for (int i = 1; i <= n; ++i) out = out * x.at(i);
    return out;
  }
  if (!x.covers(n + 1, 0)) throw PreconditionError("random_walk_cocycle needs window [n+1, 0]");
  ReducedWord out;
  for (int i = 0; i >= n + 1; --i) out = out * x.at(i).inverse();
  return out;
}

// One weighted neighbor of a ground cell: the image cell, the group element
// carrying base to neighbor, and the leaf weight.
template <class CellT>
struct LeafEntryT {
  CellT neighbor;
  ReducedWord cocycle;
  Rational weight;
};

template <class CellT>
struct LeafNeighborhoodT {
  CellT base;
  std::vector<LeafEntryT<CellT>> entries;

  Rational total_weight() const {
    Rational t(0);
    for (const auto& e : entries) t += e.weight;
    return t;
  }
};

using CylinderLeafNeighborhood = LeafNeighborhoodT<Cylinder>;
using WindowLeafNeighborhood = LeafNeighborhoodT<TwoSidedCylinder>;
using StepLeafNeighborhood = LeafNeighborhoodT<StepWindow>;

/// Tail-relation neighbors at index n: all g with |g| = 2n whose RN
/// derivative is 1 at the cell, each carrying weight
/// (2r-2)^{-1}(2r-1)^{-n+1}. Exactly n letters of g cancel, so the last n
/// letters are forced by the cell and the first n range over reduced
/// continuations avoiding the cancellation of one more letter. The cell
/// must have depth >= n+1.
inline CylinderLeafNeighborhood tail_neighborhood(int rank, int n, const Cylinder& cell) {
  validate_rank(rank);
  if (n < 1) throw InputError("tail_neighborhood needs n >= 1");
  if (cell.depth() < n + 1)
    throw PreconditionError("tail_neighborhood needs cylinder depth >= n + 1");
  Rational weight = Rational(1, 2 * rank - 2) * pow_int(Rational(2 * rank - 1), 1L - n);

  // Forced tail of g: t_{n+1} ... t_{2n} = xi_n^{-1} ... xi_1^{-1}.
  std::vector<Generator> forced;
  forced.reserve(static_cast<std::size_t>(n));
  for (int i = n; i >= 1; --i) forced.push_back(cell.letter(i).inverse());

  CylinderLeafNeighborhood out;
  out.base = cell;
  // Free half t_1 ... t_n built right to left: t_n must avoid xi_n (reduced
  // against t_{n+1}) and xi_{n+1}^{-1} (so the cancellation stops at n).
  std::vector<Generator> half(static_cast<std::size_t>(n));
  auto emit = [&]() {
    std::vector<Generator> g_letters = half;
    g_letters.insert(g_letters.end(), forced.begin(), forced.end());
    ReducedWord g = ReducedWord::from_reduced(std::move(g_letters));
    std::vector<Generator> image = half;
    for (int i = n + 1; i <= cell.depth(); ++i) image.push_back(cell.letter(i));
    out.entries.push_back(
        LeafEntryT<Cylinder>{Cylinder::from_letters(std::move(image)), g, weight});
  };
  auto rec = [&](auto&& self, int pos) -> void {  // pos runs n-1 down to 0
    if (pos < 0) {
      emit();
      return;
    }
    for (const auto& s : alphabet(rank)) {
      if (pos == n - 1) {
        if (s == cell.letter(n) || s == cell.letter(n + 1).inverse()) continue;
      } else {
        if (cancels(s, half[static_cast<std::size_t>(pos + 1)])) continue;
      }
      half[static_cast<std::size_t>(pos)] = s;
      self(self, pos - 1);
    }
  };
  rec(rec, n - 1);
  std::sort(out.entries.begin(), out.entries.end(),
            [](const auto& a, const auto& b) { return a.cocycle < b.cocycle; });
  return out;
}

// Point form: neighbors as actual boundary rays g.xi.
inline std::vector<LeafEntryT<BoundaryPoint>> tail_neighborhood_points(int rank, int n,
                                                                       const BoundaryPoint& xi) {
  auto cellwise = tail_neighborhood(rank, n, xi.prefix(n + 1));
  std::vector<LeafEntryT<BoundaryPoint>> out;
  out.reserve(cellwise.entries.size());
  for (const auto& e : cellwise.entries) {
    auto res = boundary_action(e.cocycle, xi);
    assert(res.cancelled == n);
    out.push_back(LeafEntryT<BoundaryPoint>{res.image, e.cocycle, e.weight});
  }
  return out;
}

/// Birkhoff weights on the step shift: neighbors T^i x for 1 <= i <= n,
/// weight 1/n, cocycle x(1)...x(i). The cell must cover [1, n].
inline StepLeafNeighborhood random_walk_neighborhood(const GroupMeasure& kappa, int n,
                                                     const StepWindow& cell) {
  if (n < 1) throw InputError("random_walk_neighborhood needs n >= 1");
  if (!cell.covers(1, n))
    throw PreconditionError("random_walk_neighborhood needs the window to cover [1, n]");
  std::vector<ReducedWord> support;
  support.reserve(kappa.support_size());
  for (const auto& [g, w] : kappa.weights()) support.push_back(g);

  StepLeafNeighborhood out;
  out.base = cell;
  ReducedWord prefix_product;
  for (int i = 1; i <= n; ++i) {
    prefix_product = prefix_product * support[static_cast<std::size_t>(cell.symbol(i))];
    out.entries.push_back(
        LeafEntryT<StepWindow>{cell.shifted(i), prefix_product, Rational(1, n)});
  }
  return out;
}

/// Birkhoff weights on the double-boundary shift: neighbors T^i xi for
/// 0 <= i <= n, weight 1/(n+1), cocycle shift_cocycle(i, xi). The window
/// must cover [0, n-1] (nothing for n = 0).
inline WindowLeafNeighborhood shift_neighborhood(int n, const TwoSidedCylinder& cell) {
  if (n < 0) throw InputError("shift_neighborhood needs n >= 0");
  if (n >= 1 && !cell.covers(0, n - 1))
    throw PreconditionError("shift_neighborhood needs the window to cover [0, n-1]");
  WindowLeafNeighborhood out{cell, {}};
  for (int i = 0; i <= n; ++i) {
    out.entries.push_back(
        LeafEntryT<TwoSidedCylinder>{cell.shifted(i), shift_cocycle(i, cell), Rational(1, n + 1)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uniform instance interface consumed by the averaging engine.
// ---------------------------------------------------------------------------

struct GroundCell {
  std::variant<Cylinder, TwoSidedCylinder, StepWindow> data;
  Rational mass;

  std::string key() const;  // deterministic serialization, defined below
};

struct LeafEntry {
  GroundCell neighbor;
  ReducedWord cocycle;
  Rational weight;
};

struct LeafNeighborhood {
  GroundCell base;
  std::vector<LeafEntry> entries;

  Rational total_weight() const {
    Rational t(0);
    for (const auto& e : entries) t += e.weight;
    return t;
  }
};

/// A named amenable relation with cocycle and leafwise weight family,
/// evaluable exactly at finite cylinder depth:
///
///   TAIL                  tail relation of the boundary, uniform weights on
///                         the RN-trivial sphere moves (the zero fiber of
///                         the discrete Maharam extension);
///   RANDOM_WALK           shift on step sequences drawn from kappa, with
///                         Birkhoff weights over forward shifts;
///   DOUBLE_BOUNDARY_SHIFT shift on the two-sided admissible space carrying
///                         the Markov measure, with Birkhoff weights.
class RelationInstance {
 public:
  enum class Kind { Tail, RandomWalk, DoubleBoundaryShift };

  static RelationInstance tail(int rank) {
    validate_rank(rank);
    return RelationInstance(Kind::Tail, rank, std::nullopt);
  }
  static RelationInstance random_walk(int rank, GroupMeasure kappa) {
    validate_rank(rank);
    for (const auto& [g, w] : kappa.weights()) {
      for (const auto& s : g.letters()) validate_generator(s, rank);
    }
    return RelationInstance(Kind::RandomWalk, rank, std::move(kappa));
  }
  static RelationInstance double_boundary_shift(int rank) {
    validate_rank(rank);
    return RelationInstance(Kind::DoubleBoundaryShift, rank, std::nullopt);
  }

  static RelationInstance from_name(const std::string& name, int rank,
                                    std::optional<GroupMeasure> kappa = std::nullopt) {
    if (name == "TAIL") return tail(rank);
    if (name == "RANDOM_WALK") {
      if (!kappa) throw InputError("RANDOM_WALK needs kappa");
      return random_walk(rank, std::move(*kappa));
    }
    if (name == "DOUBLE_BOUNDARY_SHIFT") return double_boundary_shift(rank);
    throw InputError("unknown relation instance: " + name);
  }

  Kind kind() const { return kind_; }
  int rank() const { return rank_; }
  const GroupMeasure& kappa() const { return *kappa_; }

  std::string name() const {
    switch (kind_) {
      case Kind::Tail: return "TAIL";
      case Kind::RandomWalk: return "RANDOM_WALK";
      case Kind::DoubleBoundaryShift: return "DOUBLE_BOUNDARY_SHIFT";
    }
    return {};
  }

  // Resolution rule: the cell depth at which the index-i weights and
  // cocycles are cylinder-constant.
  int min_depth(int index) const {
    if (index < 1) throw InputError("relation index must be >= 1");
    switch (kind_) {
      case Kind::Tail: return index + 1;
      case Kind::RandomWalk: return index;
      case Kind::DoubleBoundaryShift: return std::max(index, 1);
    }
    return 0;
  }

  // Depth needed so neighborhood images determine the first f_depth
  // coordinates of every neighbor (for cylinder-constant integrands).
  int depth_for(int index, int f_depth) const {
    switch (kind_) {
      case Kind::Tail: return std::max(min_depth(index), f_depth);
      case Kind::RandomWalk: return std::max(min_depth(index), f_depth + index);
      case Kind::DoubleBoundaryShift: return std::max(min_depth(index), f_depth + index);
    }
    return 0;
  }

  // The exact partition of the ground space into cells of the given depth,
  // with masses (nu, kappa-product, or Markov measure respectively).
  std::vector<GroundCell> cells(int depth, std::size_t cap = kDefaultEnumerationCap) const {
    std::vector<GroundCell> out;
    switch (kind_) {
      case Kind::Tail: {
        Sphere s = sphere(rank_, depth, cap);
        Rational mass = Rational(1) / Rational(sphere_size_formula(rank_, depth));
        for (const auto& w : s.elements) out.push_back(GroundCell{Cylinder::from_word(w), mass});
        break;
      }
      case Kind::DoubleBoundaryShift: {
        for (auto& w : two_sided_windows(rank_, 0, depth, cap))
          out.push_back(GroundCell{w, markov_cylinder_measure(rank_, w)});
        break;
      }
      case Kind::RandomWalk: {
        std::vector<Rational> weights;
        for (const auto& [g, w] : kappa_->weights()) weights.push_back(w);
        const int s = static_cast<int>(weights.size());
        std::vector<int> symbols;
        Rational mass(1);
        auto rec = [&](auto&& self) -> void {
          if (static_cast<int>(symbols.size()) == depth) {
            out.push_back(GroundCell{StepWindow{1, symbols}, mass});
            return;
          }
          for (int i = 0; i < s; ++i) {
            symbols.push_back(i);
            Rational saved = mass;
            mass *= weights[static_cast<std::size_t>(i)];
            self(self);
            mass = saved;
            symbols.pop_back();
          }
        };
        rec(rec);
        if (out.size() > cap) throw ResourceError("step window enumeration exceeds cap");
        break;
      }
    }
    return out;
  }

  LeafNeighborhood neighborhood(int index, const GroundCell& cell) const {
    LeafNeighborhood out;
    out.base = cell;
    switch (kind_) {
      case Kind::Tail: {
        const auto& c = std::get<Cylinder>(cell.data);
        auto nb = tail_neighborhood(rank_, index, c);
        for (auto& e : nb.entries) {
          Rational mass = cylinder_measure(rank_, e.neighbor);
          out.entries.push_back(LeafEntry{GroundCell{std::move(e.neighbor), mass},
                                          std::move(e.cocycle), std::move(e.weight)});
        }
        break;
      }
      case Kind::DoubleBoundaryShift: {
        const auto& w = std::get<TwoSidedCylinder>(cell.data);
        auto nb = shift_neighborhood(index, w);
        for (auto& e : nb.entries) {
          Rational mass = markov_cylinder_measure(rank_, e.neighbor);
          out.entries.push_back(LeafEntry{GroundCell{std::move(e.neighbor), mass},
                                          std::move(e.cocycle), std::move(e.weight)});
        }
        break;
      }
      case Kind::RandomWalk: {
        const auto& w = std::get<StepWindow>(cell.data);
        std::vector<Rational> weights;
        for (const auto& [g, wt] : kappa_->weights()) weights.push_back(wt);
        auto nbhd = random_walk_neighborhood(*kappa_, index, w);
        for (auto& e : nbhd.entries) {
          Rational mass(1);
          for (int sym : e.neighbor.symbols) mass *= weights[static_cast<std::size_t>(sym)];
          out.entries.push_back(LeafEntry{GroundCell{std::move(e.neighbor), mass},
                                          std::move(e.cocycle), std::move(e.weight)});
        }
        break;
      }
    }
    return out;
  }

 private:
  RelationInstance(Kind kind, int rank, std::optional<GroupMeasure> kappa)
      : kind_(kind), rank_(rank), kappa_(std::move(kappa)) {}

  Kind kind_;
  int rank_;
  std::optional<GroupMeasure> kappa_;
};

inline std::string GroundCell::key() const {
  if (const auto* c = std::get_if<Cylinder>(&data)) return c->str();
  if (const auto* w = std::get_if<TwoSidedCylinder>(&data)) return w->str();
  const auto& sw = std::get<StepWindow>(data);
  std::string out = std::to_string(sw.start) + ":";
  for (std::size_t i = 0; i < sw.symbols.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(sw.symbols[i]);
  }
  return out;
}

}  // namespace fgb
