#pragma once

// K-theory Soergel bimodules over the character ring of a root datum.
// Bott-Samelson objects BS(word) carry an explicit free left basis of rank
// 2^n indexed by bit masks (bit j chooses 1 or e^{w_j} in tensor slot j+1);
// twisted standard objects R_w have rank one with the right action twisted
// through w. Every morphism is a matrix over the ring in these bases and is
// checked to intertwine the right actions when built.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kms/demazure.hpp"
#include "kms/error.hpp"
#include "kms/laurent.hpp"
#include "kms/root_datum.hpp"
#include "kms/weyl.hpp"

namespace kms {

// ---------------------------------------------------------------------------
// matrices over the character ring

struct RMatrix {
  std::size_t rows = 0, cols = 0;
  std::size_t rank = 0;  // lattice rank of the entries
  std::vector<LaurentPoly> data;

  RMatrix() = default;
  RMatrix(std::size_t r, std::size_t c, std::size_t lattice_rank)
      : rows(r), cols(c), rank(lattice_rank), data(r * c, LaurentPoly(lattice_rank)) {}

  static RMatrix identity(std::size_t n, std::size_t lattice_rank) {
    RMatrix m(n, n, lattice_rank);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = LaurentPoly::one(lattice_rank);
    return m;
  }

  LaurentPoly& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const LaurentPoly& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const RMatrix&) const = default;

  bool is_zero() const {
    for (const auto& p : data)
      if (!p.is_zero()) return false;
    return true;
  }

  RMatrix submatrix(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    RMatrix s(nr, nc, rank);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) s.at(i, j) = at(r0 + i, c0 + j);
    return s;
  }

  void set_block(std::size_t r0, std::size_t c0, const RMatrix& b) {
    for (std::size_t i = 0; i < b.rows; ++i)
      for (std::size_t j = 0; j < b.cols; ++j) at(r0 + i, c0 + j) = b.at(i, j);
  }
};

inline RMatrix mul(const RMatrix& a, const RMatrix& b) {
  if (a.cols != b.rows || a.rank != b.rank)
    throw std::invalid_argument("RMatrix size mismatch in mul");
  RMatrix c(a.rows, b.cols, a.rank);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const LaurentPoly& x = a.at(i, k);
      if (x.is_zero()) continue;
      for (std::size_t j = 0; j < b.cols; ++j) {
        if (b.at(k, j).is_zero()) continue;
        c.at(i, j) += x * b.at(k, j);
      }
    }
  return c;
}

inline RMatrix add(const RMatrix& a, const RMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("RMatrix size mismatch in add");
  RMatrix c = a;
  for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] + b.data[i];
  return c;
}

inline RMatrix sub(const RMatrix& a, const RMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("RMatrix size mismatch in sub");
  RMatrix c = a;
  for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = a.data[i] - b.data[i];
  return c;
}

inline RMatrix neg(const RMatrix& a) {
  RMatrix c = a;
  for (auto& p : c.data) p = -p;
  return c;
}

inline RMatrix scale(const LaurentPoly& s, const RMatrix& a) {
  RMatrix c = a;
  for (auto& p : c.data) p = s * p;
  return c;
}

inline RMatrix transpose(const RMatrix& a) {
  RMatrix t(a.cols, a.rows, a.rank);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

// Bareiss fraction-free elimination; valid in any integral domain with exact
// division, which divide_exact provides here.
inline LaurentPoly rdet(RMatrix m) {
  if (m.rows != m.cols) throw std::invalid_argument("rdet of non-square RMatrix");
  const std::size_t n = m.rows;
  if (n == 0) return LaurentPoly::one(m.rank);
  bool flip = false;
  LaurentPoly prev = LaurentPoly::one(m.rank);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m.at(k, k).is_zero()) {
      std::size_t p = k + 1;
      while (p < n && m.at(p, k).is_zero()) ++p;
      if (p == n) return LaurentPoly::zero(m.rank);
      for (std::size_t j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(p, j));
      flip = !flip;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        LaurentPoly t = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
        auto q = divide_exact(t, prev);
        if (!q) throw std::logic_error("Bareiss division failed over an integral domain");
        m.at(i, j) = *q;
      }
    prev = m.at(k, k);
  }
  return flip ? -m.at(n - 1, n - 1) : m.at(n - 1, n - 1);
}

// Inverse over the ring; exists iff the determinant is a unit. Computed from
// the adjugate, then certified by multiplication.
inline std::optional<RMatrix> rinverse(const RMatrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("rinverse of non-square RMatrix");
  const std::size_t n = m.rows;
  LaurentPoly d = rdet(m);
  if (!is_unit(d)) return std::nullopt;
  LaurentPoly dinv = *inverse_of_unit(d);
  RMatrix inv(n, n, m.rank);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      RMatrix minor(n - 1, n - 1, m.rank);
      for (std::size_t r = 0, rr = 0; r < n; ++r) {
        if (r == j) continue;
        for (std::size_t c = 0, cc = 0; c < n; ++c) {
          if (c == i) continue;
          minor.at(rr, cc) = m.at(r, c);
          ++cc;
        }
        ++rr;
      }
      LaurentPoly cof = rdet(minor);
      if ((i + j) % 2 == 1) cof = -cof;
      inv.at(i, j) = dinv * cof;
    }
  if (!(mul(inv, m) == RMatrix::identity(n, m.rank)) ||
      !(mul(m, inv) == RMatrix::identity(n, m.rank)))
    throw std::logic_error("adjugate inverse failed certification");
  return inv;
}

// ---------------------------------------------------------------------------
// objects

struct BimoduleObject {
  enum class Kind { BS, Std };
  Kind kind = Kind::BS;
  std::vector<std::size_t> letters;  // BS word, generator indices
  WeylElement twist;                 // Std twist

  static BimoduleObject bs(std::vector<std::size_t> word) {
    BimoduleObject o;
    o.kind = Kind::BS;
    o.letters = std::move(word);
    return o;
  }

  static BimoduleObject std_twist(WeylElement w) {
    BimoduleObject o;
    o.kind = Kind::Std;
    o.twist = std::move(w);
    return o;
  }

  std::size_t basis_rank() const {
    return kind == Kind::BS ? (std::size_t{1} << letters.size()) : 1;
  }

  bool operator==(const BimoduleObject&) const = default;
  bool operator<(const BimoduleObject& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (kind == Kind::BS) return letters < o.letters;
    return twist < o.twist;
  }
};

struct BimSum {
  std::vector<BimoduleObject> parts;

  BimSum() = default;
  explicit BimSum(BimoduleObject o) : parts{std::move(o)} {}
  explicit BimSum(std::vector<BimoduleObject> p) : parts(std::move(p)) {}

  std::size_t total_rank() const {
    std::size_t r = 0;
    for (const auto& p : parts) r += p.basis_rank();
    return r;
  }

  std::size_t offset(std::size_t part) const {
    std::size_t r = 0;
    for (std::size_t i = 0; i < part; ++i) r += parts[i].basis_rank();
    return r;
  }

  bool operator==(const BimSum&) const = default;
};

// ---------------------------------------------------------------------------
// context: datum + Weyl group + one Demazure context per generator

class SBimContext {
 public:
  explicit SBimContext(RootDatum d) : weyl_(std::move(d)) {
    for (std::size_t i = 0; i < datum().num_gens(); ++i)
      dems_.push_back(make_demazure_context(datum(), i));
  }

  const RootDatum& datum() const { return weyl_.datum(); }
  const WeylGroup& weyl() const { return weyl_; }
  std::size_t rank() const { return datum().rank(); }

  const DemazureContext& dem(std::size_t i) const { return dems_.at(i); }

  // fundamental weight at generator i, required for any BS construction
  const LatticePoint& varpi(std::size_t i) const {
    if (!dems_.at(i).varpi)
      throw KmsError("not_sc_type", "generator " + datum().gens[i] +
                                        " admits no fundamental weight; Bott-Samelson "
                                        "bases need the simply-connected condition");
    return *dems_.at(i).varpi;
  }

  // Left coordinates of the pure tensor slots[0] x slots[1] x ... x slots[n]
  // in BS(word), n = |word|. Reduces from the last slot inward: each slot
  // content splits as a + e^w b with invariant a, b, which migrate left.
  std::vector<LaurentPoly> pure_tensor_coords(const std::vector<std::size_t>& word,
                                              const std::vector<LaurentPoly>& slots) const {
    if (slots.size() != word.size() + 1)
      throw std::invalid_argument("slot count must be word length + 1");
    const std::size_t n = word.size();
    if (n == 0) return {slots[0]};
    auto [a, b] = ps_split(dem(word[n - 1]), slots[n]);
    std::vector<LaurentPoly> out(std::size_t{1} << n, LaurentPoly(rank()));
    std::vector<std::size_t> prefix(word.begin(), word.end() - 1);
    const std::size_t half = std::size_t{1} << (n - 1);
    if (!a.is_zero()) {
      std::vector<LaurentPoly> pre(slots.begin(), slots.begin() + n);
      pre[n - 1] = pre[n - 1] * a;
      auto low = pure_tensor_coords(prefix, pre);
      for (std::size_t i = 0; i < half; ++i) out[i] += low[i];
    }
    if (!b.is_zero()) {
      std::vector<LaurentPoly> pre(slots.begin(), slots.begin() + n);
      pre[n - 1] = pre[n - 1] * b;
      auto high = pure_tensor_coords(prefix, pre);
      for (std::size_t i = 0; i < half; ++i) out[half + i] += high[i];
    }
    return out;
  }

  // basis vector epsilon of BS(word) as explicit slot contents
  std::vector<LaurentPoly> basis_slots(const std::vector<std::size_t>& word,
                                       std::size_t eps) const {
    std::vector<LaurentPoly> slots{LaurentPoly::one(rank())};
    for (std::size_t j = 0; j < word.size(); ++j)
      slots.push_back((eps >> j) & 1u ? LaurentPoly::exponential(varpi(word[j]))
                                      : LaurentPoly::one(rank()));
    return slots;
  }

  // matrix of right multiplication by e^lambda in the left basis
  RMatrix bs_right_action(const std::vector<std::size_t>& word,
                          const LatticePoint& lambda) const {
    const std::size_t n = word.size();
    const std::size_t dim = std::size_t{1} << n;
    RMatrix m(dim, dim, rank());
    for (std::size_t eps = 0; eps < dim; ++eps) {
      std::vector<LaurentPoly> slots = basis_slots(word, eps);
      slots[n] = slots[n] * LaurentPoly::exponential(lambda);
      auto col = pure_tensor_coords(word, slots);
      for (std::size_t r = 0; r < dim; ++r) m.at(r, eps) = col[r];
    }
    return m;
  }

  RMatrix right_action(const BimoduleObject& o, const LatticePoint& lambda) const {
    if (o.kind == BimoduleObject::Kind::BS) return bs_right_action(o.letters, lambda);
    RMatrix m(1, 1, rank());
    m.at(0, 0) = LaurentPoly::exponential(weyl_.act_weight(o.twist, lambda));
    return m;
  }

  RMatrix right_action(const BimSum& s, const LatticePoint& lambda) const {
    RMatrix m(s.total_rank(), s.total_rank(), rank());
    std::size_t off = 0;
    for (const auto& part : s.parts) {
      m.set_block(off, off, right_action(part, lambda));
      off += part.basis_rank();
    }
    return m;
  }

  RMatrix right_action_poly(const BimSum& s, const LaurentPoly& p) const {
    RMatrix m(s.total_rank(), s.total_rank(), rank());
    for (const auto& [e, c] : p.terms) m = add(m, scale(LaurentPoly::monomial(point_zero(rank()), c),
                                                        right_action(s, e)));
    return m;
  }

  std::string object_label(const BimoduleObject& o) const {
    if (o.kind == BimoduleObject::Kind::BS) {
      std::string s = "BS(";
      for (std::size_t j = 0; j < o.letters.size(); ++j) {
        if (j) s += ",";
        s += datum().gens[o.letters[j]];
      }
      return s + ")";
    }
    std::string s = "Std(";
    auto names = weyl_.word_names(o.twist);
    if (names.empty()) s += "e";
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (j) s += ",";
      s += names[j];
    }
    return s + ")";
  }

 private:
  WeylGroup weyl_;
  std::vector<DemazureContext> dems_;
};

// ---------------------------------------------------------------------------
// morphisms

struct BimMorphism {
  BimSum src, tgt;
  RMatrix mat;  // tgt.total_rank() x src.total_rank()
};

inline bool intertwines(const SBimContext& ctx, const BimSum& src, const BimSum& tgt,
                        const RMatrix& m) {
  for (std::size_t k = 0; k < ctx.rank(); ++k) {
    LatticePoint e = point_zero(ctx.rank());
    for (std::int64_t sign : {std::int64_t{1}, std::int64_t{-1}}) {
      e[k] = sign;
      if (!(mul(m, ctx.right_action(src, e)) == mul(ctx.right_action(tgt, e), m)))
        return false;
    }
    e[k] = 0;
  }
  return true;
}

inline BimMorphism make_morphism(const SBimContext& ctx, BimSum src, BimSum tgt, RMatrix m,
                                 bool verify = true) {
  if (m.rows != tgt.total_rank() || m.cols != src.total_rank() || m.rank != ctx.rank())
    throw std::invalid_argument("morphism matrix shape mismatch");
  if (verify && !intertwines(ctx, src, tgt, m))
    throw KmsError("not_a_morphism", "matrix does not intertwine the right actions");
  return {std::move(src), std::move(tgt), std::move(m)};
}

inline BimMorphism compose(const SBimContext& ctx, const BimMorphism& f, const BimMorphism& g) {
  // f after g
  if (!(g.tgt == f.src)) throw std::invalid_argument("composition mismatch");
  return make_morphism(ctx, g.src, f.tgt, mul(f.mat, g.mat), false);
}

inline BimMorphism identity_morphism(const SBimContext& ctx, const BimSum& s) {
  return {s, s, RMatrix::identity(s.total_rank(), ctx.rank())};
}

// ---------------------------------------------------------------------------
// tensor structure

inline BimoduleObject tensor(const BimoduleObject& a, const BimoduleObject& b) {
  if (a.kind != b.kind) throw std::invalid_argument("cannot tensor mixed object kinds");
  if (a.kind == BimoduleObject::Kind::Std)
    throw std::invalid_argument("tensor of standards goes through tensor_std");
  std::vector<std::size_t> word = a.letters;
  word.insert(word.end(), b.letters.begin(), b.letters.end());
  return BimoduleObject::bs(std::move(word));
}

// parts ordered with the left factor outermost; within a part, left-factor
// basis bits are the low bits
inline BimSum tensor(const BimSum& a, const BimSum& b) {
  BimSum out;
  for (const auto& pa : a.parts)
    for (const auto& pb : b.parts) out.parts.push_back(tensor(pa, pb));
  return out;
}

inline WeylElement tensor_std(const WeylGroup& w, const WeylElement& x, const WeylElement& y) {
  return w.multiply(x, y);
}

inline BimMorphism tensor_mor(const SBimContext& ctx, const BimMorphism& f,
                              const BimMorphism& g) {
  BimSum src = tensor(f.src, g.src);
  BimSum tgt = tensor(f.tgt, g.tgt);
  RMatrix m(tgt.total_rank(), src.total_rank(), ctx.rank());
  for (std::size_t ti = 0; ti < f.tgt.parts.size(); ++ti)
    for (std::size_t si = 0; si < f.src.parts.size(); ++si) {
      const auto& At = f.tgt.parts[ti];
      const auto& As = f.src.parts[si];
      RMatrix fblk = f.mat.submatrix(f.tgt.offset(ti), f.src.offset(si), At.basis_rank(),
                                     As.basis_rank());
      for (std::size_t tj = 0; tj < g.tgt.parts.size(); ++tj)
        for (std::size_t sj = 0; sj < g.src.parts.size(); ++sj) {
          const auto& Bt = g.tgt.parts[tj];
          const auto& Bs = g.src.parts[sj];
          RMatrix gblk = g.mat.submatrix(g.tgt.offset(tj), g.src.offset(sj), Bt.basis_rank(),
                                         Bs.basis_rank());
          const std::size_t tpart = ti * g.tgt.parts.size() + tj;
          const std::size_t spart = si * g.src.parts.size() + sj;
          const std::size_t toff = tgt.offset(tpart);
          const std::size_t soff = src.offset(spart);
          // column (eps, delta) gets rho_{At}(g_{phi,delta}) f[:,eps] at
          // row stripe phi: the middle coefficient crosses the left factor
          // through its right action
          for (std::size_t phi = 0; phi < Bt.basis_rank(); ++phi)
            for (std::size_t delta = 0; delta < Bs.basis_rank(); ++delta) {
              const LaurentPoly& coeff = gblk.at(phi, delta);
              if (coeff.is_zero()) continue;
              RMatrix crossed = mul(ctx.right_action_poly(BimSum(At), coeff), fblk);
              for (std::size_t r = 0; r < At.basis_rank(); ++r)
                for (std::size_t c = 0; c < As.basis_rank(); ++c)
                  m.at(toff + phi * At.basis_rank() + r, soff + delta * As.basis_rank() + c) +=
                      crossed.at(r, c);
            }
        }
    }
  return make_morphism(ctx, std::move(src), std::move(tgt), std::move(m), false);
}

// ---------------------------------------------------------------------------
// closed-form morphisms and structural results

struct HomStdResult {
  int module_rank = 0;               // 0 or 1
  bool equal_words = false;          // canonical forms coincide
  bool matrix_x_only = false;        // actions agree though the words differ
};

inline HomStdResult hom_std(const SBimContext& ctx, const WeylElement& w,
                            const WeylElement& v) {
  HomStdResult r;
  r.equal_words = w == v;
  bool same_action = ctx.weyl().matrix_x(w) == ctx.weyl().matrix_x(v);
  r.module_rank = same_action ? 1 : 0;
  r.matrix_x_only = same_action && !r.equal_words;
  return r;
}

// B_s -> R_e + R_s, r x r' -> (r r', r s(r'))
inline BimMorphism gr_map(const SBimContext& ctx, std::size_t s) {
  const LatticePoint& w = ctx.varpi(s);
  BimSum src(BimoduleObject::bs({s}));
  BimSum tgt({BimoduleObject::std_twist(ctx.weyl().identity()),
              BimoduleObject::std_twist(ctx.weyl().generator(s))});
  RMatrix m(2, 2, ctx.rank());
  m.at(0, 0) = LaurentPoly::one(ctx.rank());
  m.at(1, 0) = LaurentPoly::one(ctx.rank());
  m.at(0, 1) = LaurentPoly::exponential(w);
  m.at(1, 1) = LaurentPoly::exponential(ctx.weyl().act_weight(ctx.weyl().generator(s), w));
  return make_morphism(ctx, std::move(src), std::move(tgt), std::move(m));
}

// multiplication map B_s -> R, the counit of the rank-one story
inline BimMorphism mult_map(const SBimContext& ctx, std::size_t s) {
  RMatrix m(1, 2, ctx.rank());
  m.at(0, 0) = LaurentPoly::one(ctx.rank());
  m.at(0, 1) = LaurentPoly::exponential(ctx.varpi(s));
  return make_morphism(ctx, BimSum(BimoduleObject::bs({s})),
                       BimSum(BimoduleObject::bs({})), std::move(m));
}

// central element of B_s as a map R -> B_s, normalized with coefficient 1 on
// the 1 x 1 basis vector; centrality is an exact identity for any datum whose
// fundamental weight exists at s
inline BimMorphism central_element(const SBimContext& ctx, std::size_t s) {
  const LatticePoint& w = ctx.varpi(s);
  LatticePoint alpha = ctx.datum().simple_roots[s];
  RMatrix m(2, 1, ctx.rank());
  m.at(0, 0) = LaurentPoly::one(ctx.rank());
  m.at(1, 0) = -LaurentPoly::exponential(point_sub(alpha, w));
  return make_morphism(ctx, BimSum(BimoduleObject::bs({})),
                       BimSum(BimoduleObject::bs({s})), std::move(m));
}

inline std::map<WeylElement, unsigned long> std_multiplicities(
    const SBimContext& ctx, const std::vector<std::size_t>& word) {
  std::map<WeylElement, unsigned long> counts;
  const std::size_t n = word.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> letters;
    for (std::size_t j = 0; j < n; ++j)
      if ((mask >> j) & 1u) letters.push_back(word[j]);
    counts[ctx.weyl().from_word(letters)]++;
  }
  return counts;
}

// Split of BS(..., s, s, ...) at equal adjacent letters pos, pos+1 into two
// copies of the word with one letter dropped: the middle tensor slot holds
// R = R^s + e^w R^s, and on basis vectors the split is the bit permutation
// (copy index, remaining bits) <- (bit pos, bits with pos removed).
struct SplitPair {
  BimMorphism forward;   // BS(long word) -> copy0 + copy1
  BimMorphism backward;  // inverse
};

inline SplitPair split_adjacent(const SBimContext& ctx, const std::vector<std::size_t>& word,
                                std::size_t pos) {
  if (pos + 1 >= word.size() || word[pos] != word[pos + 1])
    throw std::invalid_argument("split_adjacent needs equal adjacent letters");
  std::vector<std::size_t> shorter = word;
  shorter.erase(shorter.begin() + static_cast<std::ptrdiff_t>(pos));
  BimSum src(BimoduleObject::bs(word));
  BimSum tgt({BimoduleObject::bs(shorter), BimoduleObject::bs(shorter)});
  const std::size_t n = word.size();
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t half = dim / 2;
  RMatrix fwd(dim, dim, ctx.rank());
  for (std::size_t eps = 0; eps < dim; ++eps) {
    const std::size_t copy = (eps >> pos) & 1u;
    const std::size_t low = eps & ((std::size_t{1} << pos) - 1);
    const std::size_t high = eps >> (pos + 1);
    const std::size_t idx = low | (high << pos);
    fwd.at(copy * half + idx, eps) = LaurentPoly::one(ctx.rank());
  }
  RMatrix bwd = transpose(fwd);  // permutation matrix
  SplitPair out{make_morphism(ctx, src, tgt, std::move(fwd)),
                make_morphism(ctx, tgt, src, std::move(bwd))};
  return out;
}

inline SplitPair decompose_bsbs(const SBimContext& ctx, std::size_t s) {
  return split_adjacent(ctx, {s, s}, 0);
}

// ---------------------------------------------------------------------------
// bounded Hom solver

struct HomBasis {
  std::vector<BimMorphism> basis;
  std::int64_t bound = 0;
  bool complete_within_bound = true;  // solutions are exact; the flag records
                                      // that morphisms with larger support
                                      // fall outside the search space
};

namespace detail {
inline std::vector<LatticePoint> exponent_box(std::size_t rank, std::int64_t bound) {
  std::vector<LatticePoint> box;
  LatticePoint cur(rank, -bound);
  if (rank == 0) return {LatticePoint{}};
  for (;;) {
    box.push_back(cur);
    std::size_t i = rank;
    while (i-- > 0) {
      if (cur[i] < bound) {
        ++cur[i];
        for (std::size_t j = i + 1; j < rank; ++j) cur[j] = -bound;
        break;
      }
      if (i == 0) return box;
    }
  }
}
}  // namespace detail

inline HomBasis hom_bounded(const SBimContext& ctx, const BimSum& src, const BimSum& tgt,
                            std::int64_t bound) {
  if (bound <= 0) throw KmsError("bad_input", "support bound must be positive");
  const std::size_t r = ctx.rank();
  const std::vector<LatticePoint> box = detail::exponent_box(r, bound);
  const std::size_t nrows = tgt.total_rank();
  const std::size_t ncols = src.total_rank();
  const std::size_t nunk = nrows * ncols * box.size();

  // constraint rows: for each basis character, each matrix entry, and each
  // exponent appearing, the coefficient of M rho_src(e_k) - rho_tgt(e_k) M
  // must vanish
  std::map<std::tuple<std::size_t, std::size_t, std::size_t, LatticePoint>,
           std::map<std::size_t, mpz_class>>
      rows;
  for (std::size_t k = 0; k < r; ++k) {
    LatticePoint e = point_zero(r);
    e[k] = 1;
    RMatrix A = ctx.right_action(src, e);
    RMatrix B = ctx.right_action(tgt, e);
    for (std::size_t i = 0; i < nrows; ++i)
      for (std::size_t j = 0; j < ncols; ++j) {
        auto& row_group = rows;
        for (std::size_t c = 0; c < ncols; ++c) {
          const LaurentPoly& a = A.at(c, j);
          if (a.is_zero()) continue;
          for (std::size_t l = 0; l < box.size(); ++l) {
            std::size_t unk = (i * ncols + c) * box.size() + l;
            for (const auto& [exp, coef] : a.terms)
              row_group[{k, i, j, point_add(exp, box[l])}][unk] += coef;
          }
        }
        for (std::size_t t = 0; t < nrows; ++t) {
          const LaurentPoly& b = B.at(i, t);
          if (b.is_zero()) continue;
          for (std::size_t l = 0; l < box.size(); ++l) {
            std::size_t unk = (t * ncols + j) * box.size() + l;
            for (const auto& [exp, coef] : b.terms)
              row_group[{k, i, j, point_add(exp, box[l])}][unk] -= coef;
          }
        }
      }
  }
  std::vector<std::map<std::size_t, mpz_class>> eqs;
  for (auto& [key, row] : rows) {
    bool nonzero = false;
    for (const auto& [unk, v] : row)
      if (v != 0) {
        nonzero = true;
        break;
      }
    if (nonzero) eqs.push_back(std::move(row));
  }

  IntMat E(eqs.size(), nunk);
  for (std::size_t i = 0; i < eqs.size(); ++i)
    for (const auto& [unk, v] : eqs[i]) E.at(i, unk) = v;
  IntMat K = kernel_basis(E);
  // canonical basis of the solution lattice
  ColumnHermiteForm hk = column_hermite_form(K);

  HomBasis out;
  out.bound = bound;
  for (std::size_t col = 0; col < hk.pivots.size(); ++col) {
    RMatrix m(nrows, ncols, r);
    for (std::size_t i = 0; i < nrows; ++i)
      for (std::size_t j = 0; j < ncols; ++j) {
        LaurentPoly p(r);
        for (std::size_t l = 0; l < box.size(); ++l) {
          const mpz_class& coef = hk.H.at((i * ncols + j) * box.size() + l, col);
          if (coef != 0) p.add_term(box[l], coef);
        }
        m.at(i, j) = p;
      }
    out.basis.push_back(make_morphism(ctx, src, tgt, std::move(m)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// duality kit: trace form, Gram matrices, slot reversal

// Collapse the last slot with its Demazure operator and fold the invariant
// result into the previous slot; iterating gives the trace BS(word) -> R.
inline RMatrix trace_map(const SBimContext& ctx, const std::vector<std::size_t>& word) {
  std::vector<std::size_t> cur = word;
  RMatrix m = RMatrix::identity(std::size_t{1} << word.size(), ctx.rank());
  while (!cur.empty()) {
    const std::size_t s = cur.back();
    cur.pop_back();
    const std::size_t dim = std::size_t{1} << cur.size();
    RMatrix step(dim, dim * 2, ctx.rank());
    LaurentPoly d1 = demazure(ctx.dem(s), LaurentPoly::one(ctx.rank()));
    LaurentPoly dw = demazure(ctx.dem(s), LaurentPoly::exponential(ctx.varpi(s)));
    // low half: last bit 0, content 1; high half: last bit 1, content e^w
    RMatrix mul_d1 = ctx.right_action_poly(BimSum(BimoduleObject::bs(cur)), d1);
    RMatrix mul_dw = ctx.right_action_poly(BimSum(BimoduleObject::bs(cur)), dw);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t rr = 0; rr < dim; ++rr) {
        step.at(rr, i) = mul_d1.at(rr, i);
        step.at(rr, dim + i) = mul_dw.at(rr, i);
      }
    m = mul(step, m);
  }
  return m;  // 1 x 2^n
}

// Gram matrix of the trace pairing <x, y> = tr(x * y) (slotwise product)
inline RMatrix gram_matrix(const SBimContext& ctx, const std::vector<std::size_t>& word) {
  const std::size_t n = word.size();
  const std::size_t dim = std::size_t{1} << n;
  RMatrix g(dim, dim, ctx.rank());
  RMatrix tr = trace_map(ctx, word);
  for (std::size_t eps = 0; eps < dim; ++eps)
    for (std::size_t del = eps; del < dim; ++del) {
      std::vector<LaurentPoly> se = ctx.basis_slots(word, eps);
      std::vector<LaurentPoly> sd = ctx.basis_slots(word, del);
      std::vector<LaurentPoly> prod(n + 1, LaurentPoly(ctx.rank()));
      for (std::size_t j = 0; j <= n; ++j) prod[j] = se[j] * sd[j];
      auto coords = ctx.pure_tensor_coords(word, prod);
      LaurentPoly val(ctx.rank());
      for (std::size_t c = 0; c < dim; ++c) val += tr.at(0, c) * coords[c];
      g.at(eps, del) = val;
      g.at(del, eps) = val;
    }
  return g;
}

// Slot-reversal isomorphism BS(word) -> BS(reversed word); it swaps the two
// R-actions, so it is additive but not left-linear. The returned matrix lists
// left coordinates of the images of basis vectors.
inline RMatrix slot_reversal(const SBimContext& ctx, const std::vector<std::size_t>& word) {
  std::vector<std::size_t> rev(word.rbegin(), word.rend());
  const std::size_t n = word.size();
  const std::size_t dim = std::size_t{1} << n;
  RMatrix m(dim, dim, ctx.rank());
  for (std::size_t eps = 0; eps < dim; ++eps) {
    std::vector<LaurentPoly> slots = ctx.basis_slots(word, eps);
    std::vector<LaurentPoly> rslots(slots.rbegin(), slots.rend());
    auto col = ctx.pure_tensor_coords(rev, rslots);
    for (std::size_t r = 0; r < dim; ++r) m.at(r, eps) = col[r];
  }
  return m;
}

namespace detail {
inline void require_bs_only(const BimSum& s, const char* what) {
  for (const auto& p : s.parts)
    if (p.kind != BimoduleObject::Kind::BS)
      throw std::invalid_argument(std::string(what) + " handles Bott-Samelson parts only");
}

inline RMatrix blockdiag_gram(const SBimContext& ctx, const BimSum& s) {
  RMatrix g(s.total_rank(), s.total_rank(), ctx.rank());
  std::size_t off = 0;
  for (const auto& p : s.parts) {
    g.set_block(off, off, gram_matrix(ctx, p.letters));
    off += p.basis_rank();
  }
  return g;
}

inline BimSum reverse_words(const BimSum& s) {
  BimSum out;
  for (const auto& p : s.parts)
    out.parts.push_back(
        BimoduleObject::bs(std::vector<std::size_t>(p.letters.rbegin(), p.letters.rend())));
  return out;
}

// apply the (anti-linear) slot reversal to an element given by coordinates:
// the image of sum_g v_g b_g is sum_g rho(v_g) . sigma(b_g)
inline std::vector<LaurentPoly> reversal_apply(const SBimContext& ctx, const BimSum& from,
                                               const std::vector<LaurentPoly>& v) {
  BimSum to = reverse_words(from);
  std::vector<LaurentPoly> out(from.total_rank(), LaurentPoly(ctx.rank()));
  std::size_t off = 0;
  for (std::size_t pi = 0; pi < from.parts.size(); ++pi) {
    const auto& part = from.parts[pi];
    RMatrix sigma = slot_reversal(ctx, part.letters);
    BimSum rev_part(to.parts[pi]);
    for (std::size_t g = 0; g < part.basis_rank(); ++g) {
      if (v[off + g].is_zero()) continue;
      RMatrix rho = ctx.right_action_poly(rev_part, v[off + g]);
      for (std::size_t r = 0; r < part.basis_rank(); ++r) {
        LaurentPoly acc(ctx.rank());
        for (std::size_t c = 0; c < part.basis_rank(); ++c) acc += rho.at(r, c) * sigma.at(c, g);
        out[off + r] += acc;
      }
    }
    off += part.basis_rank();
  }
  return out;
}
}  // namespace detail

// Adjoint of a morphism with respect to the trace pairings: for f : A -> B,
// the unique D(f) : B -> A with <D(f) y, x> = <y, f x>. Contravariant and an
// exact involution; requires unit Gram determinants, which holds for the
// Bott-Samelson objects handled here.
inline BimMorphism trace_adjoint(const SBimContext& ctx, const BimMorphism& f) {
  detail::require_bs_only(f.src, "trace_adjoint");
  detail::require_bs_only(f.tgt, "trace_adjoint");
  RMatrix ga = detail::blockdiag_gram(ctx, f.src);
  RMatrix gb = detail::blockdiag_gram(ctx, f.tgt);
  auto ga_inv = rinverse(ga);
  if (!ga_inv) throw std::logic_error("degenerate trace pairing on morphism source");
  RMatrix m = mul(*ga_inv, mul(transpose(f.mat), gb));
  return make_morphism(ctx, f.tgt, f.src, std::move(m), false);
}

// Duality on morphisms between sums of Bott-Samelson objects: trace adjoint
// composed with slot reversal on both ends. Words reverse and arrows flip;
// applying it twice gives back the original morphism.
inline BimMorphism dual_morphism(const SBimContext& ctx, const BimMorphism& f) {
  BimMorphism adj = trace_adjoint(ctx, f);  // f.tgt -> f.src
  BimSum new_src = detail::reverse_words(f.tgt);
  BimSum new_tgt = detail::reverse_words(f.src);
  RMatrix m(new_tgt.total_rank(), new_src.total_rank(), ctx.rank());
  for (std::size_t pi = 0, off = 0; pi < new_src.parts.size(); ++pi) {
    const auto& part = new_src.parts[pi];
    // sigma^{-1} on BS(reversed word) is the reversal back to the original
    RMatrix back = slot_reversal(ctx, part.letters);
    for (std::size_t e = 0; e < part.basis_rank(); ++e) {
      std::vector<LaurentPoly> u(adj.src.total_rank(), LaurentPoly(ctx.rank()));
      for (std::size_t r = 0; r < part.basis_rank(); ++r) u[off + r] = back.at(r, e);
      std::vector<LaurentPoly> v(adj.tgt.total_rank(), LaurentPoly(ctx.rank()));
      for (std::size_t r = 0; r < adj.tgt.total_rank(); ++r) {
        LaurentPoly acc(ctx.rank());
        for (std::size_t c = 0; c < adj.src.total_rank(); ++c)
          acc += adj.mat.at(r, c) * u[c];
        v[r] = acc;
      }
      std::vector<LaurentPoly> w = detail::reversal_apply(ctx, adj.tgt, v);
      for (std::size_t r = 0; r < new_tgt.total_rank(); ++r) m.at(r, off + e) = w[r];
    }
    off += part.basis_rank();
  }
  return make_morphism(ctx, std::move(new_src), std::move(new_tgt), std::move(m));
}

}  // namespace kms
