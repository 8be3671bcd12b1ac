#pragma once

// Word calculus for the Weyl group of a root datum, which is in general
// infinite. Elements are ShortLex-minimal reduced words; identity testing and
// descents run in the reflection representation on root-lattice coordinates
// Z^I, which is faithful for every generalized Cartan matrix even when the
// roots are dependent in X. The action on X itself is exposed separately.

#include <algorithm>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kms/error.hpp"
#include "kms/intmat.hpp"
#include "kms/lattice.hpp"
#include "kms/root_datum.hpp"

namespace kms {

struct WeylElement {
  std::vector<std::size_t> word;  // ShortLex-minimal reduced word

  bool operator==(const WeylElement&) const = default;
  bool operator<(const WeylElement& o) const {
    if (word.size() != o.word.size()) return word.size() < o.word.size();
    return word < o.word;
  }

  std::size_t length() const { return word.size(); }
  bool is_identity() const { return word.empty(); }
};

class WeylGroup {
 public:
  explicit WeylGroup(RootDatum d) : datum_(std::move(d)), cartan_(datum_.cartan()) {
    require_valid(datum_);
  }

  const RootDatum& datum() const { return datum_; }
  std::size_t num_gens() const { return datum_.num_gens(); }

  WeylElement identity() const { return {}; }

  WeylElement generator(std::size_t i) const {
    check_gen(i);
    return {{i}};
  }

  // Canonicalize an arbitrary word (not necessarily reduced).
  WeylElement from_word(const std::vector<std::size_t>& letters) const {
    std::vector<std::size_t> w;
    for (std::size_t s : letters) {
      check_gen(s);
      w = append_gen(std::move(w), s);
    }
    return {canonicalize(std::move(w))};
  }

  WeylElement multiply(const WeylElement& a, const WeylElement& b) const {
    std::vector<std::size_t> w = a.word;
    for (std::size_t s : b.word) w = append_gen(std::move(w), s);
    return {canonicalize(std::move(w))};
  }

  WeylElement inverse(const WeylElement& a) const {
    std::vector<std::size_t> rev(a.word.rbegin(), a.word.rend());
    return {canonicalize(std::move(rev))};
  }

  LatticePoint act_weight(const WeylElement& w, LatticePoint x) const {
    for (std::size_t k = w.word.size(); k-- > 0;) x = datum_.reflect_weight(w.word[k], x);
    return x;
  }

  IntMat matrix_x(const WeylElement& w) const {
    IntMat m = IntMat::identity(datum_.rank());
    for (std::size_t s : w.word) m = mul(m, datum_.reflection_on_x(s));
    return m;
  }

  IntMat matrix_q(const WeylElement& w) const {
    const std::size_t n = num_gens();
    IntMat m = IntMat::identity(n);
    for (std::size_t s : w.word) {
      IntMat r = IntMat::identity(n);
      for (std::size_t j = 0; j < n; ++j) r.at(s, j) -= cartan_.at(s, j);
      m = mul(m, r);
    }
    return m;
  }

  // Subword characterization of the Bruhat order, computed by the descent
  // recursion: with s the first letter of w's canonical word, x <= w iff
  // (s x <= s w when s is a left descent of x) or (x <= s w otherwise).
  bool bruhat_leq(const WeylElement& x, const WeylElement& w) const {
    if (x.is_identity()) return true;
    if (x.length() > w.length()) return false;
    const std::size_t s = w.word.front();
    WeylElement sw{canonicalize(left_mult(w.word, s))};
    if (has_left_descent(x.word, s)) {
      WeylElement sx{canonicalize(left_mult(x.word, s))};
      return bruhat_leq(sx, sw);
    }
    return bruhat_leq(x, sw);
  }

  // All elements of length <= max_len, in ShortLex order.
  std::vector<WeylElement> enumerate(std::size_t max_len) const {
    std::vector<WeylElement> all{identity()};
    std::vector<std::vector<std::size_t>> level{{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
      std::set<std::vector<std::size_t>> next;
      for (const auto& w : level)
        for (std::size_t s = 0; s < num_gens(); ++s) {
          std::vector<std::size_t> ws = append_gen(std::vector<std::size_t>(w), s);
          if (ws.size() == len) next.insert(canonicalize(std::move(ws)));
        }
      for (const auto& w : next) all.push_back({w});
      level.assign(next.begin(), next.end());
      if (level.empty()) break;
    }
    std::sort(all.begin(), all.end());
    return all;
  }

  std::vector<std::string> word_names(const WeylElement& w) const {
    std::vector<std::string> out;
    for (std::size_t s : w.word) out.push_back(datum_.gens[s]);
    return out;
  }

 private:
  RootDatum datum_;
  IntMat cartan_;

  void check_gen(std::size_t i) const {
    if (i >= num_gens()) throw KmsError("bad_input", "generator index out of range");
  }

  // s_i on root-lattice coordinates: c_i -= sum_j a_{ij} c_j
  void refl_q(std::size_t i, LatticePoint& c) const {
    mpz_class s = 0;
    for (std::size_t j = 0; j < c.size(); ++j) s += cartan_.at(i, j) * c[j];
    c[i] -= to_int64(s, "refl_q");
  }

  // Real roots have coordinates that are all >= 0 or all <= 0.
  static bool root_is_negative(const LatticePoint& c) {
    bool neg = false;
    for (auto v : c) {
      if (v > 0) return false;
      if (v < 0) neg = true;
    }
    if (!neg) throw std::logic_error("zero vector is not a root");
    return true;
  }

  // image of alpha_s under the element with reduced word `word`
  LatticePoint image_of_simple(const std::vector<std::size_t>& word, std::size_t s) const {
    LatticePoint c = point_zero(num_gens());
    c[s] = 1;
    for (std::size_t k = word.size(); k-- > 0;) refl_q(word[k], c);
    return c;
  }

  // Reduced word of w * s_s from a reduced word of w. Either the word grows
  // by one letter, or (strong exchange) exactly one letter drops out at the
  // position where the tracked root turns simple.
  std::vector<std::size_t> append_gen(std::vector<std::size_t> word, std::size_t s) const {
    if (!root_is_negative(image_of_simple(word, s))) {
      word.push_back(s);
      return word;
    }
    LatticePoint c = point_zero(num_gens());
    c[s] = 1;
    for (std::size_t k = word.size(); k-- > 0;) {
      bool simple = c[word[k]] == 1;
      if (simple)
        for (std::size_t j = 0; j < c.size(); ++j)
          if (j != word[k] && c[j] != 0) simple = false;
      if (simple) {
        word.erase(word.begin() + static_cast<std::ptrdiff_t>(k));
        return word;
      }
      refl_q(word[k], c);
    }
    throw std::logic_error("exchange condition failed on a reduced word");
  }

  // w^{-1}(alpha_i) < 0, i.e. s_i is a left descent of w
  bool has_left_descent(const std::vector<std::size_t>& word, std::size_t i) const {
    LatticePoint c = point_zero(num_gens());
    c[i] = 1;
    for (std::size_t k : word) refl_q(k, c);  // letters of the inverse, right to left
    return root_is_negative(c);
  }

  // reduced word of s_i * w via the inverse: (s_i w)^{-1} = w^{-1} s_i
  std::vector<std::size_t> left_mult(const std::vector<std::size_t>& word, std::size_t i) const {
    std::vector<std::size_t> rev(word.rbegin(), word.rend());
    rev = append_gen(std::move(rev), i);
    return {rev.rbegin(), rev.rend()};
  }

  // ShortLex-minimal reduced word: greedily emit the smallest left descent.
  std::vector<std::size_t> canonicalize(std::vector<std::size_t> reduced) const {
    std::vector<std::size_t> out;
    out.reserve(reduced.size());
    while (!reduced.empty()) {
      std::size_t chosen = num_gens();
      for (std::size_t i = 0; i < num_gens(); ++i)
        if (has_left_descent(reduced, i)) {
          chosen = i;
          break;
        }
      if (chosen == num_gens())
        throw std::logic_error("nonempty reduced word without a left descent");
      out.push_back(chosen);
      reduced = left_mult(reduced, chosen);
    }
    return out;
  }
};

}  // namespace kms
