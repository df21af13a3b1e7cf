#pragma once

#include <algorithm>
#include <cassert>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgb/errors.hpp"
#include "fgb/rational.hpp"

namespace fgb {

constexpr std::size_t kDefaultEnumerationCap = 10'000'000;

/// One letter of the free group F_r: the generator a_index (sign +1) or its
/// inverse (sign -1). Indices are 1-based and bounded by the rank in use.
struct Generator {
  int index = 1;
  int sign = 1;

  Generator inverse() const { return Generator{index, -sign}; }

  // Canonical letter order a_1 < a_1^{-1} < a_2 < a_2^{-1} < ...; it fixes
  // every enumeration and serialization order in the library.
  int key() const { return 2 * index + (sign < 0 ? 1 : 0); }

  friend bool operator==(const Generator& a, const Generator& b) {
    return a.index == b.index && a.sign == b.sign;
  }
  friend std::strong_ordering operator<=>(const Generator& a, const Generator& b) {
    return a.key() <=> b.key();
  }
};

inline bool cancels(const Generator& a, const Generator& b) {
  return a.index == b.index && a.sign != b.sign;
}

// Letter t may follow letter s in an admissible/reduced sequence.
inline bool may_follow(const Generator& s, const Generator& t) { return !cancels(s, t); }

inline void validate_rank(int rank) {
  if (rank < 2) throw InputError("rank must be >= 2");
  if (rank > 26) throw InputError("rank > 26 not supported by the letter alphabet");
}

inline void validate_generator(const Generator& s, int rank) {
  if (s.index < 1 || s.index > rank) throw InputError("generator index out of [1, rank]");
  if (s.sign != 1 && s.sign != -1) throw InputError("generator sign must be +/-1");
}

// All 2r letters in canonical order.
inline std::vector<Generator> alphabet(int rank) {
  validate_rank(rank);
  std::vector<Generator> out;
  out.reserve(2 * static_cast<std::size_t>(rank));
  for (int i = 1; i <= rank; ++i) {
    out.push_back(Generator{i, 1});
    out.push_back(Generator{i, -1});
  }
  return out;
}

inline char letter_to_char(const Generator& s) {
  char base = s.sign > 0 ? 'a' : 'A';
  return static_cast<char>(base + s.index - 1);
}

inline Generator letter_from_char(char c, int rank) {
  Generator s;
  if (c >= 'a' && c <= 'z') {
    s = Generator{c - 'a' + 1, 1};
  } else if (c >= 'A' && c <= 'Z') {
    s = Generator{c - 'A' + 1, -1};
  } else {
    throw InputError(std::string("bad word letter: '") + c + "'");
  }
  validate_generator(s, rank);
  return s;
}

/// An element of F_r in reduced form. The empty word is the identity and
/// serializes as "e"; otherwise words render as strings over {a,A,b,B,...}
/// with uppercase marking inverses.
class ReducedWord {
 public:
  ReducedWord() = default;

  // letters must already satisfy s_{i+1} != s_i^{-1}.
  static ReducedWord from_reduced(std::vector<Generator> letters) {
    for (std::size_t i = 0; i + 1 < letters.size(); ++i) {
      if (cancels(letters[i], letters[i + 1]))
        throw InputError("letter sequence is not reduced");
    }
    ReducedWord w;
    w.letters_ = std::move(letters);
    return w;
  }

  std::size_t length() const { return letters_.size(); }
  bool is_identity() const { return letters_.empty(); }
  const std::vector<Generator>& letters() const { return letters_; }
  const Generator& letter(std::size_t i) const { return letters_[i]; }  // 0-based

  ReducedWord inverse() const {
    std::vector<Generator> out(letters_.rbegin(), letters_.rend());
    for (auto& s : out) s = s.inverse();
    ReducedWord w;
    w.letters_ = std::move(out);
    return w;
  }

  std::string str() const {
    if (letters_.empty()) return "e";
    std::string out;
    out.reserve(letters_.size());
    for (const auto& s : letters_) out.push_back(letter_to_char(s));
    return out;
  }

  static ReducedWord parse(const std::string& text, int rank) {
    if (text == "e" || text.empty()) return ReducedWord();
    std::vector<Generator> letters;
    letters.reserve(text.size());
    for (char c : text) letters.push_back(letter_from_char(c, rank));
    return from_reduced(std::move(letters));
  }

  friend bool operator==(const ReducedWord& a, const ReducedWord& b) {
    return a.letters_ == b.letters_;
  }
  // Shortlex with the canonical letter order.
  friend std::strong_ordering operator<=>(const ReducedWord& a, const ReducedWord& b) {
    if (auto c = a.letters_.size() <=> b.letters_.size(); c != 0) return c;
    for (std::size_t i = 0; i < a.letters_.size(); ++i) {
      if (auto c = a.letters_[i] <=> b.letters_[i]; c != 0) return c;
    }
    return std::strong_ordering::equal;
  }

 private:
  std::vector<Generator> letters_;
};

/// Reduces an arbitrary letter sequence by iterated cancellation of adjacent
/// inverse pairs (single stack pass; reaches the unique fixed point).
inline ReducedWord reduce(std::span<const Generator> letters) {
  std::vector<Generator> stack;
  stack.reserve(letters.size());
  for (const auto& s : letters) {
    if (!stack.empty() && cancels(stack.back(), s)) {
      stack.pop_back();
    } else {
      stack.push_back(s);
    }
  }
  return ReducedWord::from_reduced(std::move(stack));
}

inline ReducedWord reduce(const std::vector<Generator>& letters) {
  return reduce(std::span<const Generator>(letters));
}

/// Reduced product together with the number of cancelled letter pairs.
inline std::pair<ReducedWord, int> multiply(const ReducedWord& u, const ReducedWord& v) {
  std::size_t cancelled = 0;
  const auto& a = u.letters();
  const auto& b = v.letters();
  while (cancelled < a.size() && cancelled < b.size() &&
         cancels(a[a.size() - 1 - cancelled], b[cancelled])) {
    ++cancelled;
  }
  std::vector<Generator> out;
  out.reserve(a.size() + b.size() - 2 * cancelled);
  out.insert(out.end(), a.begin(), a.end() - static_cast<std::ptrdiff_t>(cancelled));
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(cancelled), b.end());
  return {ReducedWord::from_reduced(std::move(out)), static_cast<int>(cancelled)};
}

inline ReducedWord operator*(const ReducedWord& u, const ReducedWord& v) {
  return multiply(u, v).first;
}

struct Sphere {
  int radius = 0;
  std::vector<ReducedWord> elements;
};

inline BigInt sphere_size_formula(int rank, int n) {
  if (n == 0) return 1;
  BigInt size = 2 * rank;
  for (int i = 1; i < n; ++i) size *= 2 * rank - 1;
  return size;
}

namespace detail {

template <class Visit>
void walk_sphere(int rank, int radius, std::vector<Generator>& prefix, Visit&& visit) {
  if (static_cast<int>(prefix.size()) == radius) {
    visit(prefix);
    return;
  }
  for (int i = 1; i <= rank; ++i) {
    for (int sign : {1, -1}) {
      Generator s{i, sign};
      if (!prefix.empty() && !may_follow(prefix.back(), s)) continue;
      prefix.push_back(s);
      walk_sphere(rank, radius, prefix, visit);
      prefix.pop_back();
    }
  }
}

}  // namespace detail

/// Exact enumeration of S_n, in lexicographic order of the canonical letter
/// order (depth first with last-letter exclusion).
inline Sphere sphere(int rank, int radius, std::size_t cap = kDefaultEnumerationCap) {
  validate_rank(rank);
  if (radius < 0) throw InputError("sphere radius must be >= 0");
  if (sphere_size_formula(rank, radius) > BigInt(cap))
    throw ResourceError("sphere of radius " + std::to_string(radius) + " exceeds the cap");
  Sphere out;
  out.radius = radius;
  std::vector<Generator> prefix;
  prefix.reserve(static_cast<std::size_t>(radius));
  detail::walk_sphere(rank, radius, prefix, [&](const std::vector<Generator>& letters) {
    out.elements.push_back(ReducedWord::from_reduced(letters));
  });
  return out;
}

// All reduced words of length <= max_radius, identity first, then by sphere.
inline std::vector<ReducedWord> ball(int rank, int max_radius,
                                     std::size_t cap = kDefaultEnumerationCap) {
  std::vector<ReducedWord> out;
  for (int n = 0; n <= max_radius; ++n) {
    Sphere s = sphere(rank, n, cap);
    out.insert(out.end(), s.elements.begin(), s.elements.end());
    if (out.size() > cap) throw ResourceError("ball enumeration exceeds the cap");
  }
  return out;
}

}  // namespace fgb
