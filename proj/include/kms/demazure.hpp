#pragma once

// Demazure operators on the character ring and the rank-one splitting
// R = R^s + e^w R^s (w the chosen fundamental weight at s) that gives
// Bott-Samelson bimodules their explicit left bases.

#include <optional>
#include <utility>

#include "kms/error.hpp"
#include "kms/laurent.hpp"
#include "kms/root_datum.hpp"

namespace kms {

struct DemazureContext {
  RootDatum datum;
  std::size_t gen = 0;
  LatticePoint alpha, alpha_vee;
  std::optional<LatticePoint> varpi;  // pairs to 1 with alpha_vee when present
  IntMat s_matrix;                    // reflection on X
  LaurentPoly one_minus_e_neg_alpha, one_minus_e_alpha;
};

inline DemazureContext make_demazure_context(const RootDatum& d, std::size_t i) {
  require_valid(d);
  if (i >= d.num_gens()) throw KmsError("bad_input", "generator index out of range");
  DemazureContext ctx;
  ctx.datum = d;
  ctx.gen = i;
  ctx.alpha = d.simple_roots[i];
  ctx.alpha_vee = d.simple_coroots[i];
  ctx.varpi = find_fundamental_weight(d, i);
  ctx.s_matrix = d.reflection_on_x(i);
  LaurentPoly one = LaurentPoly::one(d.rank());
  ctx.one_minus_e_neg_alpha = one - LaurentPoly::exponential(point_neg(ctx.alpha));
  ctx.one_minus_e_alpha = one - LaurentPoly::exponential(ctx.alpha);
  return ctx;
}

inline LaurentPoly s_apply(const DemazureContext& ctx, const LaurentPoly& p) {
  return substitute(p, ctx.s_matrix);
}

inline bool is_invariant(const DemazureContext& ctx, const LaurentPoly& p) {
  return s_apply(ctx, p) == p;
}

// (p - e^{-alpha} s(p)) / (1 - e^{-alpha}); exact by construction
inline LaurentPoly demazure(const DemazureContext& ctx, const LaurentPoly& p) {
  LaurentPoly num = p - LaurentPoly::exponential(point_neg(ctx.alpha)) * s_apply(ctx, p);
  auto q = divide_exact(num, ctx.one_minus_e_neg_alpha);
  if (!q) throw std::logic_error("demazure numerator not divisible; corrupted datum");
  return *q;
}

// p - demazure(p), cross-checked against the closed form (p - s(p))/(1 - e^alpha)
inline LaurentPoly demazure_minus(const DemazureContext& ctx, const LaurentPoly& p) {
  LaurentPoly by_difference = p - demazure(ctx, p);
  auto direct = divide_exact(p - s_apply(ctx, p), ctx.one_minus_e_alpha);
  if (!direct || !(*direct == by_difference))
    throw std::logic_error("the two closed forms of the complementary operator disagree");
  return by_difference;
}

// p = a + e^w b with both components s-invariant. Uses the direct quotient
// formula b = e^{-w} (p - s(p)) / (1 - e^{-alpha}); the (D_s, D_s^-) route
// differs from this by the unit -e^{-s(w)} on b, which tests pin down.
inline std::pair<LaurentPoly, LaurentPoly> ps_split(const DemazureContext& ctx,
                                                    const LaurentPoly& p) {
  if (!ctx.varpi)
    throw KmsError("not_sc_type",
                   "no fundamental weight at generator " + ctx.datum.gens[ctx.gen] +
                       "; the splitting needs the simply-connected condition");
  auto q = divide_exact(p - s_apply(ctx, p), ctx.one_minus_e_neg_alpha);
  if (!q) throw std::logic_error("splitting numerator not divisible; corrupted datum");
  LaurentPoly b = LaurentPoly::exponential(point_neg(*ctx.varpi)) * *q;
  LaurentPoly a = p - LaurentPoly::exponential(*ctx.varpi) * b;
  if (!(a + LaurentPoly::exponential(*ctx.varpi) * b == p) || !is_invariant(ctx, a) ||
      !is_invariant(ctx, b))
    throw std::logic_error("splitting roundtrip failed");
  return {std::move(a), std::move(b)};
}

}  // namespace kms
