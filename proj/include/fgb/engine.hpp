#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fgb/errors.hpp"
#include "fgb/finite_action.hpp"
#include "fgb/free_group.hpp"
#include "fgb/group_measure.hpp"
#include "fgb/maharam_relations.hpp"
#include "fgb/rational.hpp"

namespace fgb {

/// (pi_X(zeta) f)(x) = sum_g zeta(g) f(g^{-1} x), with g^{-1} x computed by
/// composing the generator permutations along the reduced word.
inline Observable apply_measure_operator(const GroupMeasure& zeta, const Observable& f,
                                         const FiniteAction& act) {
  if (f.size() != act.size()) throw InputError("observable size mismatch");
  Observable out(act.size(), Rational(0));
  for (const auto& [g, w] : zeta.weights()) {
    ReducedWord g_inv = g.inverse();
    for (std::size_t x = 0; x < act.size(); ++x)
      out[x] += w * f[static_cast<std::size_t>(act.apply_word(g_inv, static_cast<int>(x)))];
  }
  return out;
}

enum class InvariantTarget { FullGroup, EvenSubgroup };

inline InvariantTarget invariant_target_from_name(const std::string& name) {
  if (name == "F") return InvariantTarget::FullGroup;
  if (name == "F2") return InvariantTarget::EvenSubgroup;
  throw InputError("invariant target must be \"F\" or \"F2\"");
}

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }
  std::size_t component_count() {
    std::size_t c = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i)
      if (find(i) == i) ++c;
    return c;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Orbit partition of X under the subgroup: the full group (all generator
// maps) or the even subgroup (all products of exactly two letters).
inline std::vector<std::size_t> orbit_roots(const FiniteAction& act, InvariantTarget target) {
  UnionFind uf(act.size());
  auto letters = alphabet(act.rank());
  for (std::size_t x = 0; x < act.size(); ++x) {
    if (target == InvariantTarget::FullGroup) {
      for (const auto& s : letters)
        uf.unite(x, static_cast<std::size_t>(act.apply_generator(s, static_cast<int>(x))));
    } else {
      for (const auto& s : letters) {
        for (const auto& t : letters) {
          int y = act.apply_generator(s, act.apply_generator(t, static_cast<int>(x)));
          uf.unite(x, static_cast<std::size_t>(y));
        }
      }
    }
  }
  std::vector<std::size_t> roots(act.size());
  for (std::size_t x = 0; x < act.size(); ++x) roots[x] = uf.find(x);
  return roots;
}

}  // namespace detail

/// Conditional expectation onto the sets invariant under the whole group or
/// under the even-length subgroup: the weighted average of f over each
/// orbit of the corresponding permutation group.
inline Observable conditional_expectation(const Observable& f, const FiniteAction& act,
                                          InvariantTarget target) {
  if (f.size() != act.size()) throw InputError("observable size mismatch");
  auto roots = detail::orbit_roots(act, target);
  std::map<std::size_t, Rational> orbit_mass, orbit_sum;
  for (std::size_t x = 0; x < act.size(); ++x) {
    orbit_mass[roots[x]] += act.weight(static_cast<int>(x));
    orbit_sum[roots[x]] += act.weight(static_cast<int>(x)) * f[x];
  }
  Observable out(act.size());
  for (std::size_t x = 0; x < act.size(); ++x)
    out[x] = orbit_sum[roots[x]] / orbit_mass[roots[x]];
  return out;
}

/// pi_X(sigma_m) f evaluated without materializing the sphere: a transfer
/// recursion over (point, leading letter) pairs counting reduced words of
/// length m by their action. Exact; counts stay within the sphere size.
inline Observable sphere_average_apply(const FiniteAction& act, int radius, const Observable& f) {
  if (f.size() != act.size()) throw InputError("observable size mismatch");
  if (radius < 0) throw InputError("radius must be >= 0");
  if (radius == 0) return f;
  auto letters = alphabet(act.rank());
  const std::size_t L = letters.size();
  const std::size_t n = act.size();
  Observable out(n, Rational(0));
  Rational inv_size = Rational(1) / Rational(sphere_size_formula(act.rank(), radius));
  for (std::size_t x0 = 0; x0 < n; ++x0) {
    // counts[s][y]: reduced words v_j ... v_m with leading letter v_j = s
    // mapping x0 to y.
    std::vector<std::vector<BigInt>> counts(L, std::vector<BigInt>(n, 0));
    for (std::size_t s = 0; s < L; ++s)
      counts[s][static_cast<std::size_t>(act.apply_generator(letters[s], static_cast<int>(x0)))] = 1;
    for (int step = 1; step < radius; ++step) {
      std::vector<std::vector<BigInt>> next(L, std::vector<BigInt>(n, 0));
      for (std::size_t s = 0; s < L; ++s) {
        for (std::size_t y = 0; y < n; ++y) {
          if (counts[s][y] == 0) continue;
          for (std::size_t t = 0; t < L; ++t) {
            if (cancels(letters[t], letters[s])) continue;
            next[t][static_cast<std::size_t>(act.apply_generator(letters[t], static_cast<int>(y)))] +=
                counts[s][y];
          }
        }
      }
      counts = std::move(next);
    }
    Rational acc(0);
    for (std::size_t s = 0; s < L; ++s)
      for (std::size_t y = 0; y < n; ++y)
        if (counts[s][y] != 0) acc += Rational(counts[s][y]) * f[y];
    out[x0] = acc * inv_size;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Push-forward of leafwise families to measures on the group.
// ---------------------------------------------------------------------------

/// A cylinder-constant probability density on the instance's ground space,
/// declared at a fixed cell depth; unlisted cells take the value 1, so the
/// default is the constant density.
struct CylinderDensity {
  int depth = 0;
  std::map<std::string, Rational> values;

  bool trivial() const { return depth == 0 && values.empty(); }
  Rational at(const std::string& cell_key) const {
    auto it = values.find(cell_key);
    return it == values.end() ? Rational(1) : it->second;
  }
};

struct PushforwardSpec {
  RelationInstance instance;
  int truncation = 1;      // produce zeta_1 .. zeta_truncation
  CylinderDensity psi;     // probability density on the ground space
  int cyclic_modulus = 1;  // K = Z/N acting on the Maharam fiber; 1 = trivial K
  std::size_t cap = kDefaultEnumerationCap;
};

namespace detail {

inline GroundCell truncate_cell(const GroundCell& cell, int depth) {
  if (const auto* c = std::get_if<Cylinder>(&cell.data))
    return GroundCell{c->truncated(depth), 0};
  if (const auto* w = std::get_if<TwoSidedCylinder>(&cell.data))
    return GroundCell{w->restricted(0, depth - 1), 0};
  const auto& sw = std::get<StepWindow>(cell.data);
  if (depth > sw.width()) throw PreconditionError("cannot truncate window below requested depth");
  return GroundCell{
      StepWindow{1, std::vector<int>(sw.symbols.begin(), sw.symbols.begin() + depth)}, 0};
}

inline Rational density_value(const CylinderDensity& psi, const GroundCell& cell) {
  if (psi.trivial() || psi.depth == 0) return psi.trivial() ? Rational(1) : psi.at("e");
  return psi.at(truncate_cell(cell, psi.depth).key());
}

inline void validate_density(const RelationInstance& instance, const CylinderDensity& psi,
                             std::size_t cap) {
  if (psi.trivial()) return;
  Rational total(0);
  for (const auto& cell : instance.cells(std::max(psi.depth, 1), cap)) {
    Rational v = density_value(psi, cell);
    if (v < 0) throw InputError("density must be nonnegative");
    total += cell.mass * v;
  }
  if (total != 1) throw InputError("density must integrate to exactly 1");
}

}  // namespace detail

/// The push-forward of the instance's leafwise family: zeta_i(g) integrates
/// the weight that the index-i leaf measure at (a K-translate of) b gives
/// to neighbors reached by cocycle value g, against psi dnu. Computed
/// exactly over the cell partition at the resolution depth.
///
/// With K = Z/N the ground space is extended by the Maharam fiber with
/// normalized weights theta(t) ~ lambda^{-t}, and the Haar integral is the
/// average over fiber rotations. The bundled instances carry
/// fiber-independent leaf weights (TAIL moves have RN derivative 1, the
/// other two relations preserve their measures), so each rotation
/// contributes the same inner sum.
inline std::vector<GroupMeasure> pushforward_family(const PushforwardSpec& spec) {
  if (spec.truncation < 1) throw InputError("truncation must be >= 1");
  if (spec.cyclic_modulus < 1) throw InputError("cyclic modulus must be >= 1");
  detail::validate_density(spec.instance, spec.psi, spec.cap);

  // Normalized fiber weights theta(t) = lambda^{-t} / sum, lambda = (2r-1)^{-1}.
  const int modulus = spec.cyclic_modulus;
  std::vector<Rational> fiber_weight(static_cast<std::size_t>(modulus));
  {
    Rational lambda_inv(2 * spec.instance.rank() - 1);
    Rational total(0);
    for (int t = 0; t < modulus; ++t) {
      fiber_weight[static_cast<std::size_t>(t)] = pow_int(lambda_inv, t);
      total += fiber_weight[static_cast<std::size_t>(t)];
    }
    for (auto& w : fiber_weight) w /= total;
  }

  std::vector<GroupMeasure> family;
  family.reserve(static_cast<std::size_t>(spec.truncation));
  for (int index = 1; index <= spec.truncation; ++index) {
    const int depth = std::max(spec.instance.min_depth(index), spec.psi.depth);
    GroupMeasure::WeightMap acc;
    for (const auto& cell : spec.instance.cells(depth, spec.cap)) {
      Rational factor = cell.mass * detail::density_value(spec.psi, cell);
      if (factor == 0) continue;
      LeafNeighborhood nb = spec.instance.neighborhood(index, cell);
      for (int t = 0; t < modulus; ++t) {
        for (int k = 0; k < modulus; ++k) {
          Rational scale =
              factor * fiber_weight[static_cast<std::size_t>(t)] / Rational(modulus);
          for (const auto& entry : nb.entries) acc[entry.cocycle] += scale * entry.weight;
        }
      }
    }
    family.push_back(GroupMeasure::from_weights(std::move(acc)));  // asserts total mass 1
  }
  return family;
}

// ---------------------------------------------------------------------------
// Leafwise averages at cylinder resolution.
// ---------------------------------------------------------------------------

// A function on (ground space) x X that only reads the first `depth`
// coordinates of its cell argument.
struct CellFunction {
  int depth = 0;
  std::function<Rational(const GroundCell&, int)> eval;
};

// A cylinder-constant observable on (ground space) x X: one value vector
// per cell at the stated depth.
struct CellObservable {
  int depth = 0;
  std::map<std::string, Observable> values;
};

/// The leafwise average of F at index i: for each cell b and point x,
/// sum over neighbors c of w_i(c, b) F(c, alpha(c, b)^{-1} x), evaluated at
/// the depth where both the neighborhood and F are cylinder-constant.
inline CellObservable leafwise_average(const RelationInstance& instance, int index,
                                       const CellFunction& F, const FiniteAction& act,
                                       std::size_t cap = kDefaultEnumerationCap) {
  const int depth = instance.depth_for(index, F.depth);
  CellObservable out;
  out.depth = depth;
  for (const auto& cell : instance.cells(depth, cap)) {
    LeafNeighborhood nb = instance.neighborhood(index, cell);
    Observable values(act.size(), Rational(0));
    for (const auto& entry : nb.entries) {
      ReducedWord inv = entry.cocycle.inverse();
      for (std::size_t x = 0; x < act.size(); ++x)
        values[x] += entry.weight * F.eval(entry.neighbor, act.apply_word(inv, static_cast<int>(x)));
    }
    out.values.emplace(cell.key(), std::move(values));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Maximal functions and their empirical constants.
// ---------------------------------------------------------------------------

struct MaximalReport {
  Rational weak_ratio = 0;        // sup_{t>0} t mu{M >= t} / ||f||_1
  Rational strong_ratio_pow_l2 = 0;  // (||M||_2 / ||f||_2)^2, exact
  Rational strong_ratio_pow_l4 = 0;  // (||M||_4 / ||f||_4)^4, exact
  double strong_ratio_l2 = 0;
  double strong_ratio_l4 = 0;
  double f_llogl_norm = 0;  // sum mu |f| log+ |f|
};

/// Pointwise maximum of pi(zeta_i)|f| over the (truncated) family, with the
/// empirical weak (1,1) and strong L^p ratios of the run.
inline std::pair<Observable, MaximalReport> maximal_function(
    const std::vector<GroupMeasure>& family, const Observable& f, const FiniteAction& act) {
  if (family.empty()) throw InputError("maximal_function needs a nonempty family");
  Observable abs_f(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) abs_f[x] = abs_value(f[x]);
  Observable maximal(act.size(), Rational(0));
  for (const auto& zeta : family) {
    Observable avg = apply_measure_operator(zeta, abs_f, act);
    for (std::size_t x = 0; x < act.size(); ++x) maximal[x] = std::max(maximal[x], avg[x]);
  }

  MaximalReport report;
  Rational f_l1 = lp_norm_pow(act, f, 1);
  if (f_l1 != 0) {
    // The sup over t is attained at a value of M: scan level sets.
    std::map<Rational, Rational> by_value;
    for (std::size_t x = 0; x < act.size(); ++x)
      by_value[maximal[x]] += act.weight(static_cast<int>(x));
    Rational tail_mass(0);
    for (auto it = by_value.rbegin(); it != by_value.rend(); ++it) {
      tail_mass += it->second;
      if (it->first > 0) {
        Rational candidate = it->first * tail_mass / f_l1;
        report.weak_ratio = std::max(report.weak_ratio, candidate);
      }
    }
    Rational f_l2 = lp_norm_pow(act, f, 2), f_l4 = lp_norm_pow(act, f, 4);
    report.strong_ratio_pow_l2 = lp_norm_pow(act, maximal, 2) / f_l2;
    report.strong_ratio_pow_l4 = lp_norm_pow(act, maximal, 4) / f_l4;
    report.strong_ratio_l2 = std::sqrt(rational_to_double(report.strong_ratio_pow_l2));
    report.strong_ratio_l4 = std::pow(rational_to_double(report.strong_ratio_pow_l4), 0.25);
  }
  for (std::size_t x = 0; x < act.size(); ++x) {
    double a = rational_to_double(abs_f[x]);
    if (a > 1.0)
      report.f_llogl_norm += rational_to_double(act.weight(static_cast<int>(x))) * a * std::log(a);
  }
  return {std::move(maximal), report};
}

// ---------------------------------------------------------------------------
// Ergodicity probe for the skew product at cylinder resolution.
// ---------------------------------------------------------------------------

/// Builds the graph on (cylinders of depth 1..depth) x X whose edges are
/// the tail moves realizable at each cylinder (index n needs depth n+1;
/// each move pairs the cylinder map with the cocycle's action on X) and
/// the refinement identifications (c, x) ~ (cs, x), and reports whether it
/// is connected. A necessary finite-resolution certificate for ergodicity
/// of the skew relation, not a proof. Depth 3 is the least resolution at
/// which an index-2 move exists; with index-1 moves alone the quantity
/// x - shift(xi_1) would be conserved and the probe could never succeed.
inline bool skew_ergodicity_check(const FiniteAction& act, int depth,
                                  std::size_t cap = kDefaultEnumerationCap) {
  if (depth < 3) throw PreconditionError("skew_ergodicity_check needs depth >= 3");
  const int rank = act.rank();
  const std::size_t nx = act.size();

  std::vector<Sphere> levels;  // levels[j]: cylinders of depth j+1
  std::vector<std::size_t> offset;
  std::size_t total = 0;
  for (int j = 1; j <= depth; ++j) {
    levels.push_back(sphere(rank, j, cap));
    offset.push_back(total);
    total += levels.back().elements.size() * nx;
  }
  std::vector<std::map<ReducedWord, std::size_t>> position(levels.size());
  for (std::size_t j = 0; j < levels.size(); ++j) {
    for (std::size_t i = 0; i < levels[j].elements.size(); ++i)
      position[j].emplace(levels[j].elements[i], i);
  }
  auto vertex = [&](std::size_t level, std::size_t cell_index, std::size_t x) {
    return offset[level] + cell_index * nx + x;
  };

  detail::UnionFind uf(total);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const int cell_depth = static_cast<int>(j) + 1;
    for (std::size_t i = 0; i < levels[j].elements.size(); ++i) {
      const ReducedWord& cell = levels[j].elements[i];
      const auto& letters = cell.letters();
      // Refinement: identify with every one-letter extension.
      if (j + 1 < levels.size()) {
        for (const auto& s : alphabet(rank)) {
          if (!may_follow(letters.back(), s)) continue;
          auto extended = letters;
          extended.push_back(s);
          std::size_t child = position[j + 1].at(ReducedWord::from_reduced(extended));
          for (std::size_t x = 0; x < nx; ++x)
            uf.unite(vertex(j, i, x), vertex(j + 1, child, x));
        }
      }
      // Tail moves of every index determined at this depth.
      for (int n = 1; n + 1 <= cell_depth; ++n) {
        auto nb = tail_neighborhood(rank, n, Cylinder::from_letters(letters));
        for (const auto& entry : nb.entries) {
          std::size_t image = position[j].at(entry.neighbor.word());
          std::vector<int> perm = act.word_permutation(entry.cocycle);
          for (std::size_t x = 0; x < nx; ++x)
            uf.unite(vertex(j, i, x), vertex(j, image, static_cast<std::size_t>(perm[x])));
        }
      }
    }
  }
  return uf.component_count() == 1;
}

// ---------------------------------------------------------------------------
// Convergence experiments.
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  int index = 0;
  Rational sup_error;
  Rational l1_error;
};

/// pi(zeta_index) f for one family member. The TAIL family with trivial psi
/// and K is evaluated through the sphere transfer recursion (its members
/// are the even-sphere averages; the identity is certified exactly by the
/// push-forward tests), which keeps large indices within reach. Everything
/// else materializes the push-forward measure.
inline Observable apply_family_member(const PushforwardSpec& spec, int index, const Observable& f,
                                      const FiniteAction& act) {
  if (spec.instance.kind() == RelationInstance::Kind::Tail && spec.psi.trivial() &&
      spec.cyclic_modulus == 1) {
    return sphere_average_apply(act, 2 * index, f);
  }
  PushforwardSpec one = spec;
  one.truncation = index;
  return apply_measure_operator(pushforward_family(one).back(), f, act);
}

/// Error table of the family against the conditional expectation; rows are
/// exact, no convergence assertion is made here.
inline std::vector<ConvergenceRow> convergence_experiment(const PushforwardSpec& spec,
                                                          const FiniteAction& act,
                                                          const Observable& f,
                                                          InvariantTarget target) {
  Observable expectation = conditional_expectation(f, act, target);
  std::vector<ConvergenceRow> rows;
  rows.reserve(static_cast<std::size_t>(spec.truncation));
  for (int index = 1; index <= spec.truncation; ++index) {
    Observable averaged = apply_family_member(spec, index, f, act);
    ConvergenceRow row;
    row.index = index;
    row.sup_error = 0;
    row.l1_error = 0;
    for (std::size_t x = 0; x < act.size(); ++x) {
      Rational err = abs_value(averaged[x] - expectation[x]);
      row.sup_error = std::max(row.sup_error, err);
      row.l1_error += act.weight(static_cast<int>(x)) * err;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fgb
