#pragma once

// The character ring Z[X] of a finite-rank lattice: Laurent polynomials with
// arbitrary-precision integer coefficients, exponents being lattice points.
// Terms live in an ordered map keyed lexicographically, which gives a
// deterministic serialization order and a monomial well-order for division.

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>

#include "kms/intmat.hpp"
#include "kms/lattice.hpp"

namespace kms {

struct LaurentPoly {
  std::size_t rank = 0;
  std::map<LatticePoint, mpz_class> terms;  // never stores a zero coefficient

  LaurentPoly() = default;
  explicit LaurentPoly(std::size_t r) : rank(r) {}

  static LaurentPoly zero(std::size_t rank) { return LaurentPoly(rank); }

  static LaurentPoly one(std::size_t rank) {
    LaurentPoly p(rank);
    p.terms.emplace(point_zero(rank), 1);
    return p;
  }

  static LaurentPoly monomial(LatticePoint exp, mpz_class coeff) {
    LaurentPoly p(exp.size());
    if (coeff != 0) p.terms.emplace(std::move(exp), std::move(coeff));
    return p;
  }

  // e^exp with coefficient 1
  static LaurentPoly exponential(LatticePoint exp) { return monomial(std::move(exp), 1); }

  bool is_zero() const { return terms.empty(); }

  bool operator==(const LaurentPoly&) const = default;

  void add_term(const LatticePoint& exp, const mpz_class& coeff) {
    if (coeff == 0) return;
    check_rank(exp, rank, "add_term");
    auto it = terms.find(exp);
    if (it == terms.end()) {
      terms.emplace(exp, coeff);
    } else {
      it->second += coeff;
      if (it->second == 0) terms.erase(it);
    }
  }
};

inline void check_same_ring(const LaurentPoly& a, const LaurentPoly& b, const char* what) {
  if (a.rank != b.rank) throw std::invalid_argument(std::string("lattice mismatch in ") + what);
}

inline LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b) {
  check_same_ring(a, b, "addition");
  LaurentPoly c = a;
  for (const auto& [e, v] : b.terms) c.add_term(e, v);
  return c;
}

inline LaurentPoly operator-(const LaurentPoly& a) {
  LaurentPoly c(a.rank);
  for (const auto& [e, v] : a.terms) c.terms.emplace(e, -v);
  return c;
}

inline LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b) {
  check_same_ring(a, b, "subtraction");
  LaurentPoly c = a;
  for (const auto& [e, v] : b.terms) c.add_term(e, -v);
  return c;
}

inline LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
  check_same_ring(a, b, "multiplication");
  LaurentPoly c(a.rank);
  for (const auto& [ea, va] : a.terms)
    for (const auto& [eb, vb] : b.terms) c.add_term(point_add(ea, eb), va * vb);
  return c;
}

inline LaurentPoly operator*(const mpz_class& k, const LaurentPoly& p) {
  LaurentPoly c(p.rank);
  if (k == 0) return c;
  for (const auto& [e, v] : p.terms) c.terms.emplace(e, k * v);
  return c;
}

inline LaurentPoly& operator+=(LaurentPoly& a, const LaurentPoly& b) { return a = a + b; }
inline LaurentPoly& operator-=(LaurentPoly& a, const LaurentPoly& b) { return a = a - b; }
inline LaurentPoly& operator*=(LaurentPoly& a, const LaurentPoly& b) { return a = a * b; }

// The units of Z[X] are exactly the signed exponentials.
inline bool is_unit(const LaurentPoly& p) {
  if (p.terms.size() != 1) return false;
  const mpz_class& c = p.terms.begin()->second;
  return c == 1 || c == -1;
}

inline std::optional<LaurentPoly> inverse_of_unit(const LaurentPoly& p) {
  if (!is_unit(p)) return std::nullopt;
  const auto& [e, c] = *p.terms.begin();
  return LaurentPoly::monomial(point_neg(e), c);
}

// Ring homomorphism e^x -> e^{f(x)} for an integer matrix f; the target rank
// is the matrix's row count.
inline LaurentPoly substitute(const LaurentPoly& p, const IntMat& f) {
  if (f.cols != p.rank) throw std::invalid_argument("dimension mismatch in substitute");
  LaurentPoly q(f.rows);
  for (const auto& [e, v] : p.terms) q.add_term(map_point(f, e), v);
  return q;
}

// Exact division in Z[X]. Strategy: shift both operands into genuinely
// polynomial position (minimal exponent 0 in every coordinate), run lex
// monomial-ordered long division over Z, unshift, and certify the quotient by
// re-multiplication. For true divisors the shifted quotient is again a
// genuine polynomial with matching leading terms, so the greedy division
// cannot misfire; any failure means NotDivisible.
inline std::optional<LaurentPoly> divide_exact(const LaurentPoly& p, const LaurentPoly& q) {
  check_same_ring(p, q, "division");
  if (q.is_zero()) throw std::domain_error("division by zero LaurentPoly");
  if (p.is_zero()) return LaurentPoly::zero(p.rank);

  const std::size_t r = p.rank;
  auto min_exponents = [r](const LaurentPoly& f) {
    LatticePoint m = f.terms.begin()->first;
    for (const auto& [e, v] : f.terms)
      for (std::size_t i = 0; i < r; ++i) m[i] = std::min(m[i], e[i]);
    return m;
  };
  LatticePoint sp = min_exponents(p);
  LatticePoint sq = min_exponents(q);

  LaurentPoly num = LaurentPoly::exponential(point_neg(sp)) * p;
  const LaurentPoly den = LaurentPoly::exponential(point_neg(sq)) * q;

  LaurentPoly quot(r);
  const auto& [eden, cden] = *den.terms.rbegin();
  while (!num.is_zero()) {
    const auto& [enum_, cnum] = *num.terms.rbegin();
    LatticePoint d = point_sub(enum_, eden);
    bool ok = true;
    for (std::size_t i = 0; i < r; ++i)
      if (d[i] < 0) {
        ok = false;
        break;
      }
    if (!ok || cnum % cden != 0) return std::nullopt;
    LaurentPoly t = LaurentPoly::monomial(d, cnum / cden);
    quot += t;
    num -= t * den;
  }
  LaurentPoly result = LaurentPoly::monomial(point_sub(sp, sq), 1) * quot;
  if (result * q != p) return std::nullopt;  // self-certification
  return result;
}

struct QuotientInfo {
  // structure of the exponent lattice X / Z*lambda as Z/torsion + Z^free_rank;
  // the quotient ring Z[X]/(1 - e^lambda) is the group ring of that quotient
  // group, which has no nilpotents
  bool reduced = true;
  mpz_class torsion;
  std::size_t free_rank = 0;
};

inline QuotientInfo quotient_is_reduced(std::size_t rank, const LatticePoint& lambda) {
  check_rank(lambda, rank, "quotient_is_reduced");
  QuotientInfo info;
  if (point_is_zero(lambda)) {
    info.torsion = 0;
    info.free_rank = rank;
    return info;
  }
  IntMat a(1, rank);
  for (std::size_t j = 0; j < rank; ++j) a.at(0, j) = lambda[j];
  SmithForm s = smith_normal_form(a);
  info.torsion = s.D.at(0, 0);
  info.free_rank = rank - 1;
  return info;
}

}  // namespace kms
