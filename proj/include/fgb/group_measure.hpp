#pragma once

#include <map>
#include <string>
#include <utility>

#include "fgb/errors.hpp"
#include "fgb/free_group.hpp"
#include "fgb/rational.hpp"

namespace fgb {

/// A finitely supported rational probability measure on F_r. Weights are
/// exact, strictly positive on the stored support and sum to exactly 1
/// (checked on every construction; zero entries are pruned so equality of
/// measures is equality of maps).
class GroupMeasure {
 public:
  using WeightMap = std::map<ReducedWord, Rational>;

  static GroupMeasure from_weights(WeightMap weights) {
    Rational total(0);
    for (auto it = weights.begin(); it != weights.end();) {
      if (it->second < 0) throw InputError("negative weight in measure");
      if (it->second == 0) {
        it = weights.erase(it);
        continue;
      }
      total += it->second;
      ++it;
    }
    if (total != 1) throw InputError("measure weights must sum to exactly 1");
    GroupMeasure m;
    m.weights_ = std::move(weights);
    return m;
  }

  static GroupMeasure dirac(const ReducedWord& g = ReducedWord()) {
    WeightMap w;
    w[g] = 1;
    return from_weights(std::move(w));
  }

  const WeightMap& weights() const { return weights_; }
  std::size_t support_size() const { return weights_.size(); }

  Rational at(const ReducedWord& g) const {
    auto it = weights_.find(g);
    return it == weights_.end() ? Rational(0) : it->second;
  }

  std::size_t max_support_length() const {
    std::size_t m = 0;
    for (const auto& [g, w] : weights_) m = std::max(m, g.length());
    return m;
  }

  friend bool operator==(const GroupMeasure& a, const GroupMeasure& b) {
    return a.weights_ == b.weights_;
  }

 private:
  GroupMeasure() = default;
  WeightMap weights_;
};

/// Exact convolution: (k1 * k2)(g) = sum_h k1(g h^{-1}) k2(h), accumulated
/// by the double loop over supports.
inline GroupMeasure convolve(const GroupMeasure& k1, const GroupMeasure& k2,
                             std::size_t cap = kDefaultEnumerationCap) {
  GroupMeasure::WeightMap out;
  for (const auto& [g1, w1] : k1.weights()) {
    for (const auto& [g2, w2] : k2.weights()) {
      out[g1 * g2] += w1 * w2;
      if (out.size() > cap) throw ResourceError("convolution support exceeds cap");
    }
  }
  return GroupMeasure::from_weights(std::move(out));
}

inline GroupMeasure convolution_power(const GroupMeasure& kappa, int n,
                                      std::size_t cap = kDefaultEnumerationCap) {
  if (n < 1) throw InputError("convolution power needs n >= 1");
  GroupMeasure acc = kappa;
  for (int i = 2; i <= n; ++i) acc = convolve(acc, kappa, cap);
  return acc;
}

// (1/n) sum_{k=1..n} kappa^{*k}.
inline GroupMeasure cesaro_convolutions(const GroupMeasure& kappa, int n,
                                        std::size_t cap = kDefaultEnumerationCap) {
  if (n < 1) throw InputError("cesaro_convolutions needs n >= 1");
  GroupMeasure::WeightMap out;
  GroupMeasure power = kappa;
  for (int k = 1; k <= n; ++k) {
    if (k > 1) power = convolve(power, kappa, cap);
    for (const auto& [g, w] : power.weights()) out[g] += w / n;
  }
  return GroupMeasure::from_weights(std::move(out));
}

// Uniform measure on the sphere of radius n; sigma_0 is the point mass at e.
inline GroupMeasure sphere_uniform(int rank, int n, std::size_t cap = kDefaultEnumerationCap) {
  if (n < 0) throw InputError("sphere_uniform needs n >= 0");
  Sphere s = sphere(rank, n, cap);
  Rational w = Rational(1) / Rational(sphere_size_formula(rank, n));
  GroupMeasure::WeightMap out;
  for (const auto& g : s.elements) out[g] = w;
  return GroupMeasure::from_weights(std::move(out));
}

// (1/(n+1)) sum_{i=0..n} sigma_i.
inline GroupMeasure cesaro_spheres(int rank, int n, std::size_t cap = kDefaultEnumerationCap) {
  if (n < 0) throw InputError("cesaro_spheres needs n >= 0");
  GroupMeasure::WeightMap out;
  for (int i = 0; i <= n; ++i) {
    GroupMeasure sigma = sphere_uniform(rank, i, cap);
    for (const auto& [g, w] : sigma.weights()) out[g] += w / (n + 1);
  }
  return GroupMeasure::from_weights(std::move(out));
}

}  // namespace fgb
