#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fgb/errors.hpp"
#include "fgb/free_group.hpp"
#include "fgb/rational.hpp"

namespace fgb {

// A function on the points of a finite action, with exact values.
using Observable = std::vector<Rational>;

/// A measure-preserving action of F_r on a finite rational probability
/// space: one permutation per generator, each preserving the weights.
class FiniteAction {
 public:
  // maps[i] is the permutation of generator a_{i+1}: x -> maps[i][x].
  FiniteAction(int rank, std::vector<Rational> weights, std::vector<std::vector<int>> maps)
      : rank_(rank), weights_(std::move(weights)), forward_(std::move(maps)) {
    validate_rank(rank_);
    if (static_cast<int>(forward_.size()) != rank_)
      throw InputError("finite action needs one permutation per generator");
    const std::size_t n = weights_.size();
    if (n == 0) throw InputError("finite action needs at least one point");
    Rational total(0);
    for (const auto& w : weights_) {
      if (w <= 0) throw InputError("point weights must be positive");
      total += w;
    }
    if (total != 1) throw InputError("point weights must sum to exactly 1");
    inverse_.assign(forward_.size(), std::vector<int>(n, -1));
    for (std::size_t g = 0; g < forward_.size(); ++g) {
      const auto& perm = forward_[g];
      if (perm.size() != n) throw InputError("permutation size mismatch");
      std::vector<bool> seen(n, false);
      for (std::size_t x = 0; x < n; ++x) {
        int y = perm[x];
        if (y < 0 || static_cast<std::size_t>(y) >= n || seen[static_cast<std::size_t>(y)])
          throw InputError("generator map is not a bijection");
        seen[static_cast<std::size_t>(y)] = true;
        if (weights_[static_cast<std::size_t>(y)] != weights_[x])
          throw InputError("generator map does not preserve the measure");
        inverse_[g][static_cast<std::size_t>(y)] = static_cast<int>(x);
      }
    }
  }

  static FiniteAction uniform(int rank, std::size_t points, std::vector<std::vector<int>> maps) {
    return FiniteAction(rank, std::vector<Rational>(points, Rational(1, static_cast<long>(points))),
                        std::move(maps));
  }

  // Cyclic action x -> x + shift_g mod n for each generator.
  static FiniteAction cyclic(int rank, int points, const std::vector<int>& shifts) {
    if (static_cast<int>(shifts.size()) != rank) throw InputError("one shift per generator");
    std::vector<std::vector<int>> maps(static_cast<std::size_t>(rank));
    for (int g = 0; g < rank; ++g) {
      maps[static_cast<std::size_t>(g)].resize(static_cast<std::size_t>(points));
      for (int x = 0; x < points; ++x)
        maps[static_cast<std::size_t>(g)][static_cast<std::size_t>(x)] =
            ((x + shifts[static_cast<std::size_t>(g)]) % points + points) % points;
    }
    return uniform(rank, static_cast<std::size_t>(points), std::move(maps));
  }

  int rank() const { return rank_; }
  std::size_t size() const { return weights_.size(); }
  const std::vector<Rational>& weights() const { return weights_; }
  Rational weight(int x) const { return weights_[static_cast<std::size_t>(x)]; }

  int apply_generator(const Generator& s, int x) const {
    validate_generator(s, rank_);
    const auto& table = s.sign > 0 ? forward_[static_cast<std::size_t>(s.index - 1)]
                                   : inverse_[static_cast<std::size_t>(s.index - 1)];
    return table[static_cast<std::size_t>(x)];
  }

  // g.x for g = s_1...s_m: apply s_m first.
  int apply_word(const ReducedWord& g, int x) const {
    for (auto it = g.letters().rbegin(); it != g.letters().rend(); ++it)
      x = apply_generator(*it, x);
    return x;
  }

  // The full permutation of g, as a table.
  std::vector<int> word_permutation(const ReducedWord& g) const {
    std::vector<int> out(size());
    for (std::size_t x = 0; x < size(); ++x)
      out[x] = apply_word(g, static_cast<int>(x));
    return out;
  }

 private:
  int rank_;
  std::vector<Rational> weights_;
  std::vector<std::vector<int>> forward_;
  std::vector<std::vector<int>> inverse_;
};

inline Observable indicator(std::size_t points, int at) {
  Observable f(points, Rational(0));
  f[static_cast<std::size_t>(at)] = 1;
  return f;
}

inline Rational integral(const FiniteAction& act, const Observable& f) {
  Rational total(0);
  for (std::size_t x = 0; x < act.size(); ++x) total += act.weight(static_cast<int>(x)) * f[x];
  return total;
}

inline Rational abs_value(const Rational& q) { return q < 0 ? Rational(-q) : q; }

// ||f||_p^p for integer p >= 1.
inline Rational lp_norm_pow(const FiniteAction& act, const Observable& f, int p) {
  Rational total(0);
  for (std::size_t x = 0; x < act.size(); ++x) {
    Rational a = abs_value(f[x]);
    total += act.weight(static_cast<int>(x)) * pow_int(a, p);
  }
  return total;
}

inline Rational sup_norm(const Observable& f) {
  Rational m(0);
  for (const auto& v : f) m = std::max(m, abs_value(v));
  return m;
}

}  // namespace fgb
