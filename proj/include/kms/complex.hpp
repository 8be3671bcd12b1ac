#pragma once

// Bounded cochain complexes of Bott-Samelson sums with differentials of
// degree +1, Rouquier-type two-term complexes for each simple reflection,
// convolution (tensor) products with Koszul signs, and an exact Gaussian
// elimination that minimizes a complex while producing a homotopy
// certificate that is verified rather than trusted.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "kms/bimodule.hpp"

namespace kms {

struct ChainComplex {
  std::map<int, BimSum> objects;
  std::map<int, BimMorphism> diffs;  // keyed by source degree

  bool empty() const { return objects.empty(); }
  int min_degree() const { return objects.begin()->first; }
  int max_degree() const { return objects.rbegin()->first; }

  const BimSum* at(int k) const {
    auto it = objects.find(k);
    return it == objects.end() ? nullptr : &it->second;
  }
  const BimMorphism* diff(int k) const {
    auto it = diffs.find(k);
    return it == diffs.end() ? nullptr : &it->second;
  }
};

inline BimMorphism zero_morphism(const SBimContext& ctx, BimSum src, BimSum tgt) {
  RMatrix m(tgt.total_rank(), src.total_rank(), ctx.rank());
  return {std::move(src), std::move(tgt), std::move(m)};
}

// drop empty degrees and degenerate differentials
inline void normalize_complex(ChainComplex& c) {
  for (auto it = c.objects.begin(); it != c.objects.end();)
    it = it->second.parts.empty() ? c.objects.erase(it) : std::next(it);
  for (auto it = c.diffs.begin(); it != c.diffs.end();)
    it = (!c.at(it->first) || !c.at(it->first + 1)) ? c.diffs.erase(it) : std::next(it);
}

inline ChainComplex make_complex(const SBimContext& ctx, std::map<int, BimSum> objects,
                                 std::map<int, BimMorphism> diffs, bool verify = true) {
  ChainComplex c{std::move(objects), std::move(diffs)};
  normalize_complex(c);
  if (verify) {
    for (const auto& [k, d] : c.diffs) {
      if (!(d.src == *c.at(k)) || !(d.tgt == *c.at(k + 1)))
        throw std::invalid_argument("differential endpoints disagree with objects");
      if (const BimMorphism* next = c.diff(k + 1); next && !mul(next->mat, d.mat).is_zero())
        throw std::logic_error("differential does not square to zero");
    }
  }
  return c;
}

inline ChainComplex unit_complex(const SBimContext& ctx) {
  std::map<int, BimSum> objs;
  objs[0] = BimSum(BimoduleObject::bs({}));
  return make_complex(ctx, std::move(objs), {});
}

// [ R(-1) --central--> B_s(0) ]
inline ChainComplex rouquier_delta(const SBimContext& ctx, std::size_t s) {
  std::map<int, BimSum> objs;
  objs[-1] = BimSum(BimoduleObject::bs({}));
  objs[0] = BimSum(BimoduleObject::bs({s}));
  std::map<int, BimMorphism> d;
  d[-1] = central_element(ctx, s);
  return make_complex(ctx, std::move(objs), std::move(d));
}

// [ B_s(0) --mult--> R(1) ]
inline ChainComplex rouquier_nabla(const SBimContext& ctx, std::size_t s) {
  std::map<int, BimSum> objs;
  objs[0] = BimSum(BimoduleObject::bs({s}));
  objs[1] = BimSum(BimoduleObject::bs({}));
  std::map<int, BimMorphism> d;
  d[0] = mult_map(ctx, s);
  return make_complex(ctx, std::move(objs), std::move(d));
}

// convolution: degree n collects C_p (x) D_q over p + q = n with p ascending;
// the second-factor differential picks up the sign (-1)^p
inline ChainComplex tensor_complex(const SBimContext& ctx, const ChainComplex& c,
                                   const ChainComplex& d) {
  if (c.empty() || d.empty()) return {};
  struct Group {
    int p, q;
    BimSum sum;
    std::size_t offset;
  };
  std::map<int, std::vector<Group>> groups;
  for (const auto& [p, cp] : c.objects)
    for (const auto& [q, dq] : d.objects) groups[p + q].push_back({p, q, tensor(cp, dq), 0});
  std::map<int, BimSum> objects;
  for (auto& [n, gs] : groups) {
    std::size_t off = 0;
    BimSum total;
    for (auto& g : gs) {
      g.offset = off;
      off += g.sum.total_rank();
      total.parts.insert(total.parts.end(), g.sum.parts.begin(), g.sum.parts.end());
    }
    objects[n] = std::move(total);
  }
  auto find_group = [&](int n, int p, int q) -> const Group* {
    auto it = groups.find(n);
    if (it == groups.end()) return nullptr;
    for (const auto& g : it->second)
      if (g.p == p && g.q == q) return &g;
    return nullptr;
  };
  std::map<int, BimMorphism> diffs;
  for (const auto& [n, gs] : groups) {
    auto tgt_it = groups.find(n + 1);
    if (tgt_it == groups.end()) continue;
    RMatrix m(objects.at(n + 1).total_rank(), objects.at(n).total_rank(), ctx.rank());
    bool any = false;
    for (const auto& g : gs) {
      if (const BimMorphism* dc = c.diff(g.p)) {
        if (const Group* tg = find_group(n + 1, g.p + 1, g.q)) {
          BimMorphism blk = tensor_mor(ctx, *dc, identity_morphism(ctx, d.objects.at(g.q)));
          m.set_block(tg->offset, g.offset, blk.mat);
          any = true;
        }
      }
      if (const BimMorphism* dd = d.diff(g.q)) {
        if (const Group* tg = find_group(n + 1, g.p, g.q + 1)) {
          BimMorphism blk = tensor_mor(ctx, identity_morphism(ctx, c.objects.at(g.p)), *dd);
          m.set_block(tg->offset, g.offset, g.p % 2 == 0 ? blk.mat : neg(blk.mat));
          any = true;
        }
      }
    }
    if (any) diffs[n] = make_morphism(ctx, objects.at(n), objects.at(n + 1), std::move(m), false);
  }
  return make_complex(ctx, std::move(objects), std::move(diffs));
}

inline ChainComplex rouquier_deltas(const SBimContext& ctx,
                                    const std::vector<std::size_t>& word) {
  ChainComplex c = unit_complex(ctx);
  for (std::size_t s : word) c = tensor_complex(ctx, c, rouquier_delta(ctx, s));
  return c;
}

inline ChainComplex rouquier_nablas(const SBimContext& ctx,
                                    const std::vector<std::size_t>& word) {
  ChainComplex c = unit_complex(ctx);
  for (std::size_t s : word) c = tensor_complex(ctx, c, rouquier_nabla(ctx, s));
  return c;
}

// ---------------------------------------------------------------------------
// minimization by exact Gaussian elimination

// f : original -> minimized, g : minimized -> original, h : degree -1 on the
// original, satisfying f g = id and g f = id + d h + h d, all exactly.
struct HomotopyCertificate {
  std::map<int, BimMorphism> to_min;
  std::map<int, BimMorphism> from_min;
  std::map<int, BimMorphism> homotopy;  // h_k : C_k -> C_{k-1}
};

struct MinimizationResult {
  ChainComplex minimized;
  HomotopyCertificate cert;
};

namespace detail {

inline BimSum drop_part(const BimSum& s, std::size_t idx) {
  BimSum out;
  for (std::size_t i = 0; i < s.parts.size(); ++i)
    if (i != idx) out.parts.push_back(s.parts[i]);
  return out;
}

inline RMatrix drop_rows(const RMatrix& m, std::size_t r0, std::size_t n) {
  RMatrix out(m.rows - n, m.cols, m.rank);
  for (std::size_t i = 0, oi = 0; i < m.rows; ++i) {
    if (i >= r0 && i < r0 + n) continue;
    for (std::size_t j = 0; j < m.cols; ++j) out.at(oi, j) = m.at(i, j);
    ++oi;
  }
  return out;
}

inline RMatrix drop_cols(const RMatrix& m, std::size_t c0, std::size_t n) {
  RMatrix out(m.rows, m.cols - n, m.rank);
  for (std::size_t j = 0, oj = 0; j < m.cols; ++j) {
    if (j >= c0 && j < c0 + n) continue;
    for (std::size_t i = 0; i < m.rows; ++i) out.at(i, oj) = m.at(i, j);
    ++oj;
  }
  return out;
}

}  // namespace detail

class Minimizer {
 public:
  Minimizer(const SBimContext& ctx, ChainComplex c) : ctx_(ctx), orig_(c), cur_(std::move(c)) {
    for (const auto& [k, s] : cur_.objects) {
      f_[k] = identity_morphism(ctx_, s);
      g_[k] = identity_morphism(ctx_, s);
    }
  }

  MinimizationResult run() {
    for (;;) {
      if (split_once()) continue;
      if (cancel_once()) continue;
      break;
    }
    ChainComplex min = cur_;
    normalize_complex(min);
    HomotopyCertificate cert{std::move(f_), std::move(g_), std::move(h_)};
    return {std::move(min), std::move(cert)};
  }

 private:
  // one splitting step: replace the first part containing equal adjacent
  // letters by two copies of the shortened word (an exact isomorphism)
  bool split_once() {
    for (const auto& [k, sum] : cur_.objects) {
      for (std::size_t p = 0; p < sum.parts.size(); ++p) {
        const auto& part = sum.parts[p];
        if (part.kind != BimoduleObject::Kind::BS) continue;
        for (std::size_t pos = 0; pos + 1 < part.letters.size(); ++pos) {
          if (part.letters[pos] != part.letters[pos + 1]) continue;
          apply_split(k, p, pos);
          return true;
        }
      }
    }
    return false;
  }

  void apply_split(int k, std::size_t p, std::size_t pos) {
    const BimSum& old_sum = cur_.objects.at(k);
    SplitPair sp = split_adjacent(ctx_, old_sum.parts[p].letters, pos);
    BimSum new_sum;
    for (std::size_t i = 0; i < old_sum.parts.size(); ++i) {
      if (i == p) {
        new_sum.parts.push_back(sp.forward.tgt.parts[0]);
        new_sum.parts.push_back(sp.forward.tgt.parts[1]);
      } else {
        new_sum.parts.push_back(old_sum.parts[i]);
      }
    }
    const std::size_t n = old_sum.total_rank();
    const std::size_t off = old_sum.offset(p);
    const std::size_t pr = old_sum.parts[p].basis_rank();
    RMatrix phi(n, n, ctx_.rank());
    RMatrix phi_inv(n, n, ctx_.rank());
    for (std::size_t i = 0; i < off; ++i) {
      phi.at(i, i) = LaurentPoly::one(ctx_.rank());
      phi_inv.at(i, i) = LaurentPoly::one(ctx_.rank());
    }
    phi.set_block(off, off, sp.forward.mat);
    phi_inv.set_block(off, off, sp.backward.mat);
    for (std::size_t i = off + pr; i < n; ++i) {
      phi.at(i, i) = LaurentPoly::one(ctx_.rank());
      phi_inv.at(i, i) = LaurentPoly::one(ctx_.rank());
    }
    BimMorphism stepf = make_morphism(ctx_, old_sum, new_sum, phi, false);
    BimMorphism stepg = make_morphism(ctx_, new_sum, old_sum, phi_inv, false);

    cur_.objects[k] = new_sum;
    if (auto it = cur_.diffs.find(k); it != cur_.diffs.end())
      it->second = make_morphism(ctx_, new_sum, it->second.tgt,
                                 mul(it->second.mat, stepg.mat), false);
    if (auto it = cur_.diffs.find(k - 1); it != cur_.diffs.end())
      it->second = make_morphism(ctx_, it->second.src, new_sum,
                                 mul(stepf.mat, it->second.mat), false);
    f_[k] = make_morphism(ctx_, f_[k].src, new_sum, mul(stepf.mat, f_[k].mat), false);
    g_[k] = make_morphism(ctx_, new_sum, g_[k].tgt, mul(g_[k].mat, stepg.mat), false);
  }

  // one cancellation: the first square block with unit determinant, scanning
  // degrees, then source parts, then target parts in index order
  bool cancel_once() {
    for (const auto& [k, d] : cur_.diffs) {
      const BimSum& src = d.src;
      const BimSum& tgt = d.tgt;
      for (std::size_t i = 0; i < src.parts.size(); ++i)
        for (std::size_t j = 0; j < tgt.parts.size(); ++j) {
          if (src.parts[i].basis_rank() != tgt.parts[j].basis_rank()) continue;
          RMatrix blk = d.mat.submatrix(tgt.offset(j), src.offset(i),
                                        tgt.parts[j].basis_rank(), src.parts[i].basis_rank());
          if (blk.is_zero() || !is_unit(rdet(blk))) continue;
          apply_cancel(k, i, j, blk);
          return true;
        }
    }
    return false;
  }

  void apply_cancel(int k, std::size_t i, std::size_t j, const RMatrix& alpha) {
    const BimSum src = cur_.objects.at(k);
    const BimSum tgt = cur_.objects.at(k + 1);
    const std::size_t soff = src.offset(i), sr = src.parts[i].basis_rank();
    const std::size_t toff = tgt.offset(j), tr = tgt.parts[j].basis_rank();
    RMatrix alpha_inv = *rinverse(alpha);
    const RMatrix& d = cur_.diffs.at(k).mat;

    // beta: other source columns into the canceled target row
    RMatrix beta = detail::drop_cols(d.submatrix(toff, 0, tr, d.cols), soff, sr);
    // gamma: canceled source column into the other target rows
    RMatrix gamma = detail::drop_rows(d.submatrix(0, soff, d.rows, sr), toff, tr);
    RMatrix delta = detail::drop_cols(detail::drop_rows(d, toff, tr), soff, sr);

    BimSum new_src = detail::drop_part(src, i);
    BimSum new_tgt = detail::drop_part(tgt, j);

    // step maps of the elimination
    RMatrix fk(new_src.total_rank(), src.total_rank(), ctx_.rank());
    for (std::size_t c = 0, oc = 0; c < src.total_rank(); ++c) {
      if (c >= soff && c < soff + sr) continue;
      fk.at(oc, c) = LaurentPoly::one(ctx_.rank());
      ++oc;
    }
    RMatrix fk1(new_tgt.total_rank(), tgt.total_rank(), ctx_.rank());
    {
      RMatrix corr = neg(mul(gamma, alpha_inv));
      for (std::size_t r = 0, orr = 0; r < tgt.total_rank(); ++r) {
        if (r >= toff && r < toff + tr) continue;
        fk1.at(orr, r) = LaurentPoly::one(ctx_.rank());
        ++orr;
      }
      for (std::size_t r = 0; r < corr.rows; ++r)
        for (std::size_t c = 0; c < tr; ++c) fk1.at(r, toff + c) = corr.at(r, c);
    }
    RMatrix gk(src.total_rank(), new_src.total_rank(), ctx_.rank());
    {
      RMatrix corr = neg(mul(alpha_inv, beta));
      for (std::size_t c = 0, oc = 0; c < src.total_rank(); ++c) {
        if (c >= soff && c < soff + sr) continue;
        gk.at(c, oc) = LaurentPoly::one(ctx_.rank());
        ++oc;
      }
      for (std::size_t r = 0; r < sr; ++r)
        for (std::size_t c = 0; c < corr.cols; ++c) gk.at(soff + r, c) = corr.at(r, c);
    }
    RMatrix gk1(tgt.total_rank(), new_tgt.total_rank(), ctx_.rank());
    for (std::size_t r = 0, orr = 0; r < tgt.total_rank(); ++r) {
      if (r >= toff && r < toff + tr) continue;
      gk1.at(r, orr) = LaurentPoly::one(ctx_.rank());
      ++orr;
    }
    RMatrix hk1(src.total_rank(), tgt.total_rank(), ctx_.rank());
    {
      RMatrix na = neg(alpha_inv);
      for (std::size_t r = 0; r < sr; ++r)
        for (std::size_t c = 0; c < tr; ++c) hk1.at(soff + r, toff + c) = na.at(r, c);
    }

    // update the complex
    RMatrix dnew = sub(delta, mul(gamma, mul(alpha_inv, beta)));
    cur_.objects[k] = new_src;
    cur_.objects[k + 1] = new_tgt;
    cur_.diffs.erase(k);
    if (new_src.total_rank() > 0 && new_tgt.total_rank() > 0)
      cur_.diffs[k] = make_morphism(ctx_, new_src, new_tgt, std::move(dnew), false);
    if (auto it = cur_.diffs.find(k - 1); it != cur_.diffs.end()) {
      RMatrix m = detail::drop_rows(it->second.mat, soff, sr);
      if (new_src.total_rank() == 0)
        cur_.diffs.erase(it);
      else
        it->second = make_morphism(ctx_, it->second.src, new_src, std::move(m), false);
    }
    if (auto it = cur_.diffs.find(k + 1); it != cur_.diffs.end()) {
      RMatrix m = detail::drop_cols(it->second.mat, toff, tr);
      if (new_tgt.total_rank() == 0)
        cur_.diffs.erase(it);
      else
        it->second = make_morphism(ctx_, new_tgt, it->second.tgt, std::move(m), false);
    }

    // fold the step into the accumulated certificate:
    //   f = f2 f1, g = g1 g2, h = h1 + g1 h2 f1
    BimMorphism f1k = f_.at(k), f1k1 = f_.at(k + 1);
    BimMorphism g1k = g_.at(k), g1k1 = g_.at(k + 1);
    f_[k] = make_morphism(ctx_, f1k.src, new_src, mul(fk, f1k.mat), false);
    f_[k + 1] = make_morphism(ctx_, f1k1.src, new_tgt, mul(fk1, f1k1.mat), false);
    g_[k] = make_morphism(ctx_, new_src, g1k.tgt, mul(g1k.mat, gk), false);
    g_[k + 1] = make_morphism(ctx_, new_tgt, g1k1.tgt, mul(g1k1.mat, gk1), false);
    BimMorphism extra = make_morphism(
        ctx_, f1k1.src, g1k.tgt, mul(g1k.mat, mul(hk1, f1k1.mat)), false);
    if (auto it = h_.find(k + 1); it != h_.end())
      it->second = make_morphism(ctx_, extra.src, extra.tgt,
                                 add(it->second.mat, extra.mat), false);
    else
      h_[k + 1] = std::move(extra);
  }

  const SBimContext& ctx_;
  ChainComplex orig_;
  ChainComplex cur_;
  std::map<int, BimMorphism> f_, g_, h_;
};

inline MinimizationResult gaussian_eliminate(const SBimContext& ctx, ChainComplex c) {
  return Minimizer(ctx, std::move(c)).run();
}

// exact check of the certificate identities: both maps are chain maps,
// f g = id on the minimized side, and g f - id = d h + h d on the original
inline bool verify_certificate(const SBimContext& ctx, const ChainComplex& orig,
                               const ChainComplex& minimized,
                               const HomotopyCertificate& cert) {
  auto f_at = [&](int k) -> const BimMorphism* {
    auto it = cert.to_min.find(k);
    return it == cert.to_min.end() ? nullptr : &it->second;
  };
  auto g_at = [&](int k) -> const BimMorphism* {
    auto it = cert.from_min.find(k);
    return it == cert.from_min.end() ? nullptr : &it->second;
  };
  auto h_at = [&](int k) -> const BimMorphism* {
    auto it = cert.homotopy.find(k);
    return it == cert.homotopy.end() ? nullptr : &it->second;
  };
  for (const auto& [k, obj] : orig.objects) {
    const BimMorphism* f = f_at(k);
    const BimMorphism* g = g_at(k);
    if (!f || !g) return false;
    if (!(f->src == obj) || !(g->tgt == obj)) return false;
    if (!intertwines(ctx, f->src, f->tgt, f->mat)) return false;
    if (!intertwines(ctx, g->src, g->tgt, g->mat)) return false;

    // chain-map identities where a differential leaves degree k
    if (const BimMorphism* d = orig.diff(k)) {
      const BimMorphism* fn = f_at(k + 1);
      if (!fn) return false;
      RMatrix lhs = mul(fn->mat, d->mat);
      RMatrix rhs(fn->tgt.total_rank(), obj.total_rank(), ctx.rank());
      if (const BimMorphism* dm = minimized.diff(k)) rhs = mul(dm->mat, f->mat);
      if (!(lhs == rhs)) return false;
    }
    if (const BimMorphism* dm = minimized.diff(k)) {
      const BimMorphism* gn = g_at(k + 1);
      if (!gn) return false;
      RMatrix lhs = mul(gn->mat, dm->mat);
      RMatrix rhs(obj.total_rank(), dm->src.total_rank(), ctx.rank());
      if (const BimMorphism* d = orig.diff(k)) rhs = mul(d->mat, g->mat);
      if (!(lhs == rhs)) return false;
    }

    // f g = id on the minimized side
    RMatrix fg = mul(f->mat, g->mat);
    if (!(fg == RMatrix::identity(f->tgt.total_rank(), ctx.rank()))) return false;

    // g f = id + d h + h d on the original
    RMatrix gf = mul(g->mat, f->mat);
    RMatrix expect = RMatrix::identity(obj.total_rank(), ctx.rank());
    if (const BimMorphism* h = h_at(k + 1); h && orig.diff(k))
      expect = add(expect, mul(h->mat, orig.diff(k)->mat));
    if (const BimMorphism* h = h_at(k); h && orig.diff(k - 1))
      expect = add(expect, mul(orig.diff(k - 1)->mat, h->mat));
    if (!(gf == expect)) return false;
  }
  // minimized degrees must all be covered by f/g endpoints checked above
  for (const auto& [k, obj] : minimized.objects) {
    const BimMorphism* f = f_at(k);
    if (!f || !(f->tgt == obj)) return false;
  }
  return true;
}

inline bool is_unit_complex(const SBimContext& ctx, const ChainComplex& c) {
  MinimizationResult r = gaussian_eliminate(ctx, c);
  if (!verify_certificate(ctx, c, r.minimized, r.cert))
    throw std::logic_error("minimization certificate failed verification");
  if (r.minimized.objects.size() != 1) return false;
  auto it = r.minimized.objects.begin();
  return it->first == 0 && it->second.parts.size() == 1 &&
         it->second.parts[0] == BimoduleObject::bs({});
}

// ---------------------------------------------------------------------------
// duality

// degree k of the dual is the slot-reversed object of degree -k, and the
// differential at k is the dual of the differential into degree -k
inline ChainComplex dualize_complex(const SBimContext& ctx, const ChainComplex& c) {
  std::map<int, BimSum> objects;
  for (const auto& [k, s] : c.objects) objects[-k] = detail::reverse_words(s);
  std::map<int, BimMorphism> diffs;
  for (const auto& [k, d] : c.diffs) diffs[-(k + 1)] = dual_morphism(ctx, d);
  return make_complex(ctx, std::move(objects), std::move(diffs));
}

// ---------------------------------------------------------------------------
// hom complexes and their homology within a support bound

struct HomComplexReport {
  std::map<int, long> homology_rank;
  std::int64_t bound = 0;
  bool complete_within_bound = true;
};

namespace detail {

inline std::int64_t support_radius(const RMatrix& m) {
  std::int64_t r = 0;
  for (const auto& p : m.data)
    for (const auto& [e, c] : p.terms)
      for (std::int64_t x : e) r = std::max(r, x < 0 ? -x : x);
  return r;
}

inline mpq_class specialize_poly(const LaurentPoly& p, const std::vector<long>& point) {
  mpq_class v = 0;
  for (const auto& [e, c] : p.terms) {
    mpq_class term(c);
    for (std::size_t i = 0; i < e.size(); ++i) {
      mpz_class pw;
      unsigned long a = static_cast<unsigned long>(e[i] < 0 ? -e[i] : e[i]);
      mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(point[i]), a);
      if (e[i] >= 0)
        term *= pw;
      else
        term /= pw;
    }
    v += term;
  }
  return v;
}

inline std::size_t mpq_rank(std::vector<std::vector<mpq_class>> m) {
  std::size_t rank = 0;
  const std::size_t rows = m.size();
  if (rows == 0) return 0;
  const std::size_t cols = m[0].size();
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && m[piv][c] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[rank], m[piv]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (m[r][c] == 0) continue;
      mpq_class t = m[r][c] / m[rank][c];
      for (std::size_t cc = c; cc < cols; ++cc) m[r][cc] -= t * m[rank][cc];
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

// Graded maps C -> D of each degree n are sums of bimodule maps C_k -> D_{k+n}
// with entries supported in the given box; the hom differential is
// (Df)_k = d_D f_k - (-1)^n f_{k+1} d_C. Homology ranks are generic ranks,
// computed exactly at fixed specializations of the lattice characters.
class HomComplex {
 public:
  HomComplex(const SBimContext& ctx, const ChainComplex& c, const ChainComplex& d,
             std::int64_t bound)
      : ctx_(ctx), c_(c), d_(d), bound_(bound) {
    std::int64_t radius = 0;
    for (const auto& [k, dm] : c_.diffs) radius = std::max(radius, detail::support_radius(dm.mat));
    for (const auto& [k, dm] : d_.diffs) radius = std::max(radius, detail::support_radius(dm.mat));
    big_bound_ = bound + radius;
  }

  HomComplexReport run() {
    HomComplexReport rep;
    rep.bound = bound_;
    rep.complete_within_bound = true;
    if (c_.empty() || d_.empty()) return rep;
    const int nmin = d_.min_degree() - c_.max_degree();
    const int nmax = d_.max_degree() - c_.min_degree();
    for (int n = nmin; n <= nmax; ++n) {
      basis_[n] = graded_basis(n, bound_);
      big_basis_[n] = graded_basis(n, big_bound_);
    }
    big_basis_[nmax + 1] = {};
    for (int n = nmin; n <= nmax; ++n) {
      // integer matrix of the hom differential in the enlarged target basis
      IntMat dmat = differential_matrix(n);
      IntMat cycles = kernel_basis(dmat);
      long rank = 0;
      for (int trial = 0; trial < 3; ++trial) {
        std::vector<long> point = specialization_point(trial);
        auto zrows = specialize_combos(n, cycles, point);
        std::vector<std::vector<mpq_class>> brows;
        if (auto it = basis_.find(n - 1); it != basis_.end()) {
          for (const auto& f : it->second) {
            auto img = apply_differential(n - 1, f);
            brows.push_back(flatten(n, img, point));
          }
        }
        std::size_t rb = detail::mpq_rank(brows);
        std::vector<std::vector<mpq_class>> all = brows;
        all.insert(all.end(), zrows.begin(), zrows.end());
        std::size_t rzb = detail::mpq_rank(all);
        rank = std::max(rank, static_cast<long>(rzb - rb));
      }
      rep.homology_rank[n] = rank;
    }
    rep.complete_within_bound = complete_;
    return rep;
  }

 private:
  struct GradedPiece {
    int k;  // source degree in C
    BimMorphism mor;
  };
  using GradedMap = std::vector<GradedPiece>;

  std::vector<GradedMap> graded_basis(int n, std::int64_t bound) {
    std::vector<GradedMap> out;
    for (const auto& [k, ck] : c_.objects) {
      const BimSum* dk = d_.at(k + n);
      if (!dk) continue;
      HomBasis hb = hom_bounded(ctx_, ck, *dk, bound);
      complete_ = complete_ && hb.complete_within_bound;
      for (auto& m : hb.basis) out.push_back({{k, std::move(m)}});
    }
    return out;
  }

  std::vector<long> specialization_point(int trial) const {
    static const long primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                  43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};
    std::vector<long> p(ctx_.rank());
    if (p.size() + 3 > sizeof(primes) / sizeof(primes[0]))
      throw KmsError("bad_input", "lattice rank too large for generic specialization");
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = primes[trial + i];
    return p;
  }

  // (Df) for a single-piece graded map
  GradedMap apply_differential(int n, const GradedMap& f) {
    GradedMap out;
    const bool even = ((n % 2) + 2) % 2 == 0;
    for (const auto& piece : f) {
      if (const BimMorphism* dd = d_.diff(piece.k + n)) {
        RMatrix m = mul(dd->mat, piece.mor.mat);
        out.push_back({piece.k, make_morphism(ctx_, piece.mor.src, dd->tgt, std::move(m), false)});
      }
      if (const BimMorphism* dc = c_.diff(piece.k - 1)) {
        RMatrix m = mul(piece.mor.mat, dc->mat);
        if (even) m = neg(m);
        out.push_back({piece.k - 1,
                       make_morphism(ctx_, dc->src, piece.mor.tgt, std::move(m), false)});
      }
    }
    return out;
  }

  // coordinates of a graded map in the coefficient space of degree n maps
  // within a box, as used by the enlarged bases
  std::vector<std::pair<std::size_t, mpz_class>> coordinates(int n, const GradedMap& f,
                                                             std::int64_t bound) {
    const std::vector<LatticePoint> box = detail::exponent_box(ctx_.rank(), bound);
    std::map<LatticePoint, std::size_t> box_index;
    for (std::size_t i = 0; i < box.size(); ++i) box_index[box[i]] = i;
    // global offsets per source degree k
    std::map<int, std::size_t> offset;
    std::size_t total = 0;
    for (const auto& [k, ck] : c_.objects) {
      const BimSum* dk = d_.at(k + n);
      if (!dk) continue;
      offset[k] = total;
      total += ck.total_rank() * dk->total_rank() * box.size();
    }
    std::vector<std::pair<std::size_t, mpz_class>> coords;
    for (const auto& piece : f) {
      auto it = offset.find(piece.k);
      if (it == offset.end()) {
        if (!piece.mor.mat.is_zero())
          throw std::logic_error("graded map component outside the hom lattice");
        continue;
      }
      const std::size_t ncols = piece.mor.mat.cols;
      for (std::size_t r = 0; r < piece.mor.mat.rows; ++r)
        for (std::size_t c = 0; c < ncols; ++c)
          for (const auto& [e, coef] : piece.mor.mat.at(r, c).terms) {
            auto bit = box_index.find(e);
            if (bit == box_index.end())
              throw std::logic_error("hom entry escapes the enlarged box");
            coords.emplace_back(it->second + (r * ncols + c) * box.size() + bit->second, coef);
          }
    }
    return coords;
  }

  IntMat differential_matrix(int n) {
    const auto& src = basis_.at(n);
    const auto& tgt = big_basis_.at(n + 1);
    // target basis as integer columns in the coefficient space
    std::vector<std::vector<std::pair<std::size_t, mpz_class>>> tcols;
    std::size_t space_dim = 0;
    {
      const std::vector<LatticePoint> box = detail::exponent_box(ctx_.rank(), big_bound_);
      for (const auto& [k, ck] : c_.objects) {
        const BimSum* dk = d_.at(k + n + 1);
        if (!dk) continue;
        space_dim += ck.total_rank() * dk->total_rank() * box.size();
      }
    }
    IntMat K(space_dim, tgt.size());
    for (std::size_t j = 0; j < tgt.size(); ++j)
      for (const auto& [idx, v] : coordinates(n + 1, tgt[j], big_bound_)) K.at(idx, j) = v;
    ColumnHermiteForm hk = column_hermite_form(K);
    IntMat out(tgt.size(), src.size());
    for (std::size_t j = 0; j < src.size(); ++j) {
      GradedMap img = apply_differential(n, src[j]);
      IntMat b(space_dim, 1);
      for (const auto& [idx, v] : coordinates(n + 1, img, big_bound_)) b.at(idx, 0) += v;
      auto sol = solve_from_hermite(hk, b);
      if (!sol) throw std::logic_error("hom differential image escapes the enlarged basis");
      for (std::size_t i = 0; i < tgt.size(); ++i) out.at(i, j) = (*sol)[i];
    }
    return out;
  }

  // solve K x = b given a precomputed column Hermite form of K
  std::optional<std::vector<mpz_class>> solve_from_hermite(const ColumnHermiteForm& hf,
                                                           const IntMat& b) {
    std::vector<mpz_class> y(hf.H.cols, 0);
    std::vector<mpz_class> resid(b.rows);
    for (std::size_t i = 0; i < b.rows; ++i) resid[i] = b.at(i, 0);
    for (const auto& [prow, pcol] : hf.pivots) {
      mpz_class q, r;
      mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), resid[prow].get_mpz_t(),
                  hf.H.at(prow, pcol).get_mpz_t());
      if (r != 0) return std::nullopt;
      if (q != 0) {
        y[pcol] = q;
        for (std::size_t i = 0; i < b.rows; ++i) resid[i] -= q * hf.H.at(i, pcol);
      }
    }
    for (const auto& v : resid)
      if (v != 0) return std::nullopt;
    std::vector<mpz_class> x(hf.V.rows, 0);
    for (std::size_t i = 0; i < hf.V.rows; ++i) {
      mpz_class acc = 0;
      for (std::size_t j = 0; j < hf.V.cols; ++j) acc += hf.V.at(i, j) * y[j];
      x[i] = acc;
    }
    return x;
  }

  // specialize integer combinations of the degree-n basis
  std::vector<std::vector<mpq_class>> specialize_combos(int n, const IntMat& combos,
                                                        const std::vector<long>& point) {
    const auto& base = basis_.at(n);
    std::vector<std::vector<mpq_class>> brows;
    for (std::size_t j = 0; j < combos.cols; ++j) {
      GradedMap g;
      for (std::size_t i = 0; i < base.size(); ++i) {
        if (combos.at(i, j) == 0) continue;
        for (const auto& piece : base[i]) {
          RMatrix m = scale(LaurentPoly::monomial(point_zero(ctx_.rank()), combos.at(i, j)),
                            piece.mor.mat);
          g.push_back({piece.k, make_morphism(ctx_, piece.mor.src, piece.mor.tgt,
                                              std::move(m), false)});
        }
      }
      brows.push_back(flatten(n, g, point));
    }
    return brows;
  }

  // flatten a graded map into a vector of specialized rational entries over
  // the full component layout of degree n
  std::vector<mpq_class> flatten(int n, const GradedMap& f, const std::vector<long>& point) {
    std::map<int, std::size_t> offset;
    std::size_t total = 0;
    for (const auto& [k, ck] : c_.objects) {
      const BimSum* dk = d_.at(k + n);
      if (!dk) continue;
      offset[k] = total;
      total += ck.total_rank() * dk->total_rank();
    }
    std::vector<mpq_class> v(total, 0);
    for (const auto& piece : f) {
      auto it = offset.find(piece.k);
      if (it == offset.end()) {
        if (!piece.mor.mat.is_zero())
          throw std::logic_error("graded map component outside the layout");
        continue;
      }
      for (std::size_t r = 0; r < piece.mor.mat.rows; ++r)
        for (std::size_t c = 0; c < piece.mor.mat.cols; ++c)
          v[it->second + r * piece.mor.mat.cols + c] +=
              detail::specialize_poly(piece.mor.mat.at(r, c), point);
    }
    return v;
  }

  const SBimContext& ctx_;
  const ChainComplex& c_;
  const ChainComplex& d_;
  std::int64_t bound_;
  std::int64_t big_bound_ = 0;
  bool complete_ = true;
  std::map<int, std::vector<GradedMap>> basis_;
  std::map<int, std::vector<GradedMap>> big_basis_;
};

inline HomComplexReport hom_complex(const SBimContext& ctx, const ChainComplex& c,
                                    const ChainComplex& d, std::int64_t bound) {
  return HomComplex(ctx, c, d, bound).run();
}

// ---------------------------------------------------------------------------
// homotopy equivalence certificates
//
// Summand-level elimination cannot always contract a contractible complex:
// a cancellation may only become visible after a base change mixing equal
// summands. For statements of the form "C and D are homotopy equivalent"
// we therefore search directly for chain maps phi : C -> D and psi : D -> C
// together with homotopies witnessing psi phi = id + d h + h d and
// phi psi = id + d h' + h' d. The search solves one integer linear system
// per candidate phi and verifies every returned certificate exactly.

struct HomotopyEquivalence {
  std::map<int, BimMorphism> fwd;    // phi : C -> D
  std::map<int, BimMorphism> bwd;    // psi : D -> C
  std::map<int, BimMorphism> h_src;  // h_k : C_k -> C_{k-1}
  std::map<int, BimMorphism> h_tgt;  // h'_k : D_k -> D_{k-1}
};

namespace detail {

// coefficient layout for graded maps a -> b of a fixed degree: one block of
// integer coordinates per source degree k, each entry x exponent in a box
struct GradedLayout {
  std::vector<LatticePoint> box;
  std::map<LatticePoint, std::size_t> box_index;
  std::map<int, std::size_t> offset;
  std::map<int, std::pair<std::size_t, std::size_t>> shape;  // rows x cols at k
  std::size_t total = 0;
};

inline GradedLayout graded_layout(const ChainComplex& a, const ChainComplex& b, int n,
                                  std::size_t lattice_rank, std::int64_t bound) {
  GradedLayout l;
  l.box = exponent_box(lattice_rank, bound);
  for (std::size_t i = 0; i < l.box.size(); ++i) l.box_index[l.box[i]] = i;
  for (const auto& [k, ak] : a.objects) {
    const BimSum* bk = b.at(k + n);
    if (!bk) continue;
    l.offset[k] = l.total;
    l.shape[k] = {bk->total_rank(), ak.total_rank()};
    l.total += bk->total_rank() * ak.total_rank() * l.box.size();
  }
  return l;
}

using SparseVec = std::vector<std::pair<std::size_t, mpz_class>>;

inline void add_block_coords(const GradedLayout& l, int k, const RMatrix& m, int sign,
                             SparseVec& out) {
  if (m.is_zero()) return;
  auto it = l.offset.find(k);
  if (it == l.offset.end()) throw std::logic_error("graded block outside the layout");
  const auto [rows, cols] = l.shape.at(k);
  if (m.rows != rows || m.cols != cols) throw std::logic_error("graded block shape mismatch");
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c)
      for (const auto& [e, coef] : m.at(r, c).terms) {
        auto bit = l.box_index.find(e);
        if (bit == l.box_index.end()) throw std::logic_error("graded entry escapes the box");
        out.emplace_back(it->second + (r * cols + c) * l.box.size() + bit->second,
                         sign > 0 ? coef : mpz_class(-coef));
      }
}

// basis of degree-n graded maps a -> b with entries in the box, as
// (source degree, morphism) pieces
inline std::vector<std::pair<int, BimMorphism>> graded_hom_basis(const SBimContext& ctx,
                                                                 const ChainComplex& a,
                                                                 const ChainComplex& b, int n,
                                                                 std::int64_t bound) {
  std::vector<std::pair<int, BimMorphism>> out;
  for (const auto& [k, ak] : a.objects) {
    const BimSum* bk = b.at(k + n);
    if (!bk) continue;
    HomBasis hb = hom_bounded(ctx, ak, *bk, bound);
    for (auto& m : hb.basis) out.emplace_back(k, std::move(m));
  }
  return out;
}

inline std::int64_t complex_radius(const ChainComplex& c) {
  std::int64_t r = 0;
  for (const auto& [k, d] : c.diffs) r = std::max(r, support_radius(d.mat));
  return r;
}

inline std::size_t mpq_matrix_rank(const std::vector<std::vector<mpq_class>>& rows) {
  return mpq_rank(rows);
}

// numeric mirror of a complex at one specialization point
inline std::map<int, std::vector<std::vector<mpq_class>>> specialize_complex(
    const ChainComplex& c, const std::vector<long>& point) {
  std::map<int, std::vector<std::vector<mpq_class>>> out;
  for (const auto& [k, d] : c.diffs) {
    std::vector<std::vector<mpq_class>> m(d.mat.rows, std::vector<mpq_class>(d.mat.cols, 0));
    for (std::size_t i = 0; i < d.mat.rows; ++i)
      for (std::size_t j = 0; j < d.mat.cols; ++j)
        m[i][j] = specialize_poly(d.mat.at(i, j), point);
    out[k] = std::move(m);
  }
  return out;
}

}  // namespace detail

inline bool verify_homotopy_equivalence(const SBimContext& ctx, const ChainComplex& c,
                                        const ChainComplex& d, const HomotopyEquivalence& he) {
  bool shape_ok = true;
  auto mat_at = [&](const std::map<int, BimMorphism>& m, int k, std::size_t rows,
                    std::size_t cols) {
    auto it = m.find(k);
    if (it != m.end() && it->second.mat.rows == rows && it->second.mat.cols == cols)
      return it->second.mat;
    if (it != m.end()) shape_ok = false;
    return RMatrix(rows, cols, ctx.rank());
  };
  auto rank_of = [](const ChainComplex& x, int k) {
    const BimSum* s = x.at(k);
    return s ? s->total_rank() : std::size_t{0};
  };
  const std::set<int> degrees = [&] {
    std::set<int> out;
    for (const auto& [k, s] : c.objects) out.insert(k);
    for (const auto& [k, s] : d.objects) out.insert(k);
    return out;
  }();
  auto dmat = [&](const ChainComplex& x, int k, std::size_t rows, std::size_t cols) {
    const BimMorphism* dd = x.diff(k);
    return dd ? dd->mat : RMatrix(rows, cols, ctx.rank());
  };
  for (int k : degrees) {
    const std::size_t ck = rank_of(c, k), ck1 = rank_of(c, k + 1), ckm = rank_of(c, k - 1);
    const std::size_t dk = rank_of(d, k), dk1 = rank_of(d, k + 1), dkm = rank_of(d, k - 1);
    RMatrix phi = mat_at(he.fwd, k, dk, ck);
    RMatrix phi1 = mat_at(he.fwd, k + 1, dk1, ck1);
    RMatrix psi = mat_at(he.bwd, k, ck, dk);
    RMatrix psi1 = mat_at(he.bwd, k + 1, ck1, dk1);
    if (!shape_ok) return false;
    // chain conditions
    if (!(mul(dmat(d, k, dk1, dk), phi) == mul(phi1, dmat(c, k, ck1, ck)))) return false;
    if (!(mul(dmat(c, k, ck1, ck), psi) == mul(psi1, dmat(d, k, dk1, dk)))) return false;
    // psi phi = id + d h + h d on c
    {
      RMatrix lhs = mul(psi, phi);
      RMatrix expect = RMatrix::identity(ck, ctx.rank());
      RMatrix hk = mat_at(he.h_src, k, ckm, ck);
      RMatrix hk1 = mat_at(he.h_src, k + 1, ck, ck1);
      expect = sub(expect, mul(dmat(c, k - 1, ck, ckm), hk));
      expect = sub(expect, mul(hk1, dmat(c, k, ck1, ck)));
      if (!(lhs == expect)) return false;
    }
    // phi psi = id + d h' + h' d on d
    {
      RMatrix lhs = mul(phi, psi);
      RMatrix expect = RMatrix::identity(dk, ctx.rank());
      RMatrix hk = mat_at(he.h_tgt, k, dkm, dk);
      RMatrix hk1 = mat_at(he.h_tgt, k + 1, dk, dk1);
      expect = sub(expect, mul(dmat(d, k - 1, dk, dkm), hk));
      expect = sub(expect, mul(hk1, dmat(d, k, dk1, dk)));
      if (!(lhs == expect)) return false;
    }
    // every stored piece must be an honest bimodule map
    for (const auto* coll : {&he.fwd, &he.bwd, &he.h_src, &he.h_tgt}) {
      auto it = coll->find(k);
      if (it != coll->end() && !intertwines(ctx, it->second.src, it->second.tgt, it->second.mat))
        return false;
    }
    if (!shape_ok) return false;
  }
  return true;
}

class EquivalenceSearch {
 public:
  EquivalenceSearch(const SBimContext& ctx, const ChainComplex& c, const ChainComplex& d,
                    std::int64_t bound)
      : ctx_(ctx), c_(c), d_(d), bound_(bound) {
    radius_ = std::max(detail::complex_radius(c_), detail::complex_radius(d_));
  }

  std::optional<HomotopyEquivalence> run() {
    if (c_.empty() && d_.empty()) return HomotopyEquivalence{};
    for (std::map<int, RMatrix>& phi : candidates()) {
      if (!cone_exact_at_points(phi)) continue;
      auto he = try_candidate(phi);
      if (he) {
        if (!verify_homotopy_equivalence(ctx_, c_, d_, *he))
          throw std::logic_error("homotopy equivalence certificate failed verification");
        return he;
      }
    }
    return std::nullopt;
  }

 private:
  using Pieces = std::vector<std::pair<int, BimMorphism>>;

  // chain maps c -> d assembled from integer kernel combinations of the
  // bounded graded basis; singles first, then pairwise sums and differences
  std::vector<std::map<int, RMatrix>> candidates() {
    Pieces basis = detail::graded_hom_basis(ctx_, c_, d_, 0, bound_);
    detail::GradedLayout l =
        detail::graded_layout(c_, d_, 1, ctx_.rank(), bound_ + radius_);
    std::vector<detail::SparseVec> cols(basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const auto& [k, m] = basis[j];
      if (const BimMorphism* dd = d_.diff(k + 0))
        detail::add_block_coords(l, k, mul(dd->mat, m.mat), +1, cols[j]);
      if (const BimMorphism* dc = c_.diff(k - 1))
        detail::add_block_coords(l, k - 1, mul(m.mat, dc->mat), -1, cols[j]);
    }
    IntMat constraint = densify(cols, nullptr);
    IntMat kernel = kernel_basis(constraint);
    auto assemble = [&](const std::vector<mpz_class>& combo) {
      std::map<int, RMatrix> phi;
      for (const auto& [k, s] : c_.objects) {
        const BimSum* dk = d_.at(k);
        if (dk) phi[k] = RMatrix(dk->total_rank(), s.total_rank(), ctx_.rank());
      }
      for (std::size_t i = 0; i < basis.size(); ++i) {
        if (combo[i] == 0) continue;
        const auto& [k, m] = basis[i];
        LaurentPoly coef = LaurentPoly::monomial(point_zero(ctx_.rank()), combo[i]);
        phi[k] = add(phi[k], scale(coef, m.mat));
      }
      return phi;
    };
    std::vector<std::map<int, RMatrix>> out;
    std::vector<std::vector<mpz_class>> combos;
    for (std::size_t j = 0; j < kernel.cols; ++j) {
      std::vector<mpz_class> combo(basis.size());
      for (std::size_t i = 0; i < basis.size(); ++i) combo[i] = kernel.at(i, j);
      combos.push_back(std::move(combo));
    }
    const std::size_t npair = std::min<std::size_t>(kernel.cols, 12);
    for (const auto& combo : combos) out.push_back(assemble(combo));
    for (std::size_t i = 0; i < npair; ++i)
      for (std::size_t j = i + 1; j < npair; ++j)
        for (int sgn : {+1, -1}) {
          std::vector<mpz_class> combo(basis.size());
          for (std::size_t t = 0; t < basis.size(); ++t)
            combo[t] = combos[i][t] + sgn * combos[j][t];
          out.push_back(assemble(combo));
        }
    return out;
  }

  // quick necessary check over Q: the cone of phi must be exact at every
  // specialization point
  bool cone_exact_at_points(const std::map<int, RMatrix>& phi) {
    static const long primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23};
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<long> point(ctx_.rank());
      for (std::size_t i = 0; i < point.size(); ++i) point[i] = primes[trial + i];
      auto dc = detail::specialize_complex(c_, point);
      auto dd = detail::specialize_complex(d_, point);
      auto rank_of = [](const ChainComplex& x, int k) {
        const BimSum* s = x.at(k);
        return s ? s->total_rank() : std::size_t{0};
      };
      std::set<int> degrees;
      for (const auto& [k, s] : c_.objects) degrees.insert(k - 1);
      for (const auto& [k, s] : d_.objects) degrees.insert(k);
      int kmin = *degrees.begin(), kmax = *degrees.rbegin();
      std::map<int, std::size_t> dim;
      for (int k = kmin; k <= kmax; ++k) dim[k] = rank_of(c_, k + 1) + rank_of(d_, k);
      std::map<int, std::size_t> drank;
      for (int k = kmin; k <= kmax; ++k) {
        const std::size_t rows = (k + 1 <= kmax ? dim[k + 1] : 0);
        if (rows == 0) {
          drank[k] = 0;
          continue;
        }
        // cone differential [[ -d_C, 0 ], [ phi, d_D ]]
        std::vector<std::vector<mpq_class>> m(rows, std::vector<mpq_class>(dim[k], 0));
        const std::size_t c_src = rank_of(c_, k + 1);
        const std::size_t c_tgt = rank_of(c_, k + 2);
        if (dc.count(k + 1))
          for (std::size_t i = 0; i < c_tgt; ++i)
            for (std::size_t j = 0; j < c_src; ++j) m[i][j] = -dc.at(k + 1)[i][j];
        auto pit = phi.find(k + 1);
        if (pit != phi.end() && !pit->second.is_zero()) {
          std::vector<long> pt = point;
          for (std::size_t i = 0; i < pit->second.rows; ++i)
            for (std::size_t j = 0; j < pit->second.cols; ++j)
              m[c_tgt + i][j] = detail::specialize_poly(pit->second.at(i, j), pt);
        }
        if (dd.count(k))
          for (std::size_t i = 0; i < dd.at(k).size(); ++i)
            for (std::size_t j = 0; j < dd.at(k)[i].size(); ++j)
              m[c_tgt + i][c_src + j] = dd.at(k)[i][j];
        // transpose into row vectors per column for the rank helper
        std::vector<std::vector<mpq_class>> rowsv;
        rowsv.reserve(dim[k]);
        for (std::size_t j = 0; j < dim[k]; ++j) {
          std::vector<mpq_class> r(rows);
          for (std::size_t i = 0; i < rows; ++i) r[i] = m[i][j];
          rowsv.push_back(std::move(r));
        }
        drank[k] = detail::mpq_matrix_rank(rowsv);
      }
      for (int k = kmin; k <= kmax; ++k) {
        std::size_t prev = (k - 1 >= kmin ? drank[k - 1] : 0);
        if (prev + drank[k] != dim[k]) return false;
      }
    }
    return true;
  }

  // the joint linear system: unknowns psi, h, h' with
  //   d psi - psi d = 0,   psi phi + d h + h d = id_C,   phi psi + d h' + h' d = id_D
  std::optional<HomotopyEquivalence> try_candidate(const std::map<int, RMatrix>& phi) {
    Pieces psis = detail::graded_hom_basis(ctx_, d_, c_, 0, bound_);
    Pieces hcs = detail::graded_hom_basis(ctx_, c_, c_, -1, bound_);
    Pieces hds = detail::graded_hom_basis(ctx_, d_, d_, -1, bound_);
    const std::int64_t b2 = bound_ + std::max(radius_, bound_);
    detail::GradedLayout l1 = detail::graded_layout(d_, c_, 1, ctx_.rank(), bound_ + radius_);
    detail::GradedLayout l2 = detail::graded_layout(c_, c_, 0, ctx_.rank(), b2);
    detail::GradedLayout l3 = detail::graded_layout(d_, d_, 0, ctx_.rank(), b2);
    const std::size_t off2 = l1.total;
    const std::size_t off3 = l1.total + l2.total;

    std::vector<detail::SparseVec> cols;
    cols.reserve(psis.size() + hcs.size() + hds.size());
    for (const auto& [k, m] : psis) {
      detail::SparseVec v;
      if (const BimMorphism* dcm = c_.diff(k))
        detail::add_block_coords(l1, k, mul(dcm->mat, m.mat), +1, v);
      if (const BimMorphism* ddm = d_.diff(k - 1)) {
        detail::SparseVec w;
        detail::add_block_coords(l1, k - 1, mul(m.mat, ddm->mat), -1, w);
        v.insert(v.end(), w.begin(), w.end());
      }
      auto pit = phi.find(k);
      if (pit != phi.end() && !pit->second.is_zero()) {
        detail::SparseVec w;
        detail::add_block_coords(l2, k, mul(m.mat, pit->second), +1, w);
        for (auto& [i, x] : w) v.emplace_back(i + off2, x);
        detail::SparseVec w3;
        detail::add_block_coords(l3, k, mul(pit->second, m.mat), +1, w3);
        for (auto& [i, x] : w3) v.emplace_back(i + off3, x);
      }
      cols.push_back(std::move(v));
    }
    for (const auto& [k, m] : hcs) {
      detail::SparseVec v;
      if (const BimMorphism* dm = c_.diff(k - 1)) {
        detail::SparseVec w;
        detail::add_block_coords(l2, k, mul(dm->mat, m.mat), +1, w);
        for (auto& [i, x] : w) v.emplace_back(i + off2, x);
        detail::SparseVec w2;
        detail::add_block_coords(l2, k - 1, mul(m.mat, dm->mat), +1, w2);
        for (auto& [i, x] : w2) v.emplace_back(i + off2, x);
      }
      cols.push_back(std::move(v));
    }
    for (const auto& [k, m] : hds) {
      detail::SparseVec v;
      if (const BimMorphism* dm = d_.diff(k - 1)) {
        detail::SparseVec w;
        detail::add_block_coords(l3, k, mul(dm->mat, m.mat), +1, w);
        for (auto& [i, x] : w) v.emplace_back(i + off3, x);
        detail::SparseVec w2;
        detail::add_block_coords(l3, k - 1, mul(m.mat, dm->mat), +1, w2);
        for (auto& [i, x] : w2) v.emplace_back(i + off3, x);
      }
      cols.push_back(std::move(v));
    }

    // right-hand side: identity on every degree of both complexes
    detail::SparseVec rhs;
    for (const auto& [k, s] : c_.objects) {
      detail::SparseVec w;
      detail::add_block_coords(l2, k, RMatrix::identity(s.total_rank(), ctx_.rank()), +1, w);
      for (auto& [i, x] : w) rhs.emplace_back(i + off2, x);
    }
    for (const auto& [k, s] : d_.objects) {
      detail::SparseVec w;
      detail::add_block_coords(l3, k, RMatrix::identity(s.total_rank(), ctx_.rank()), +1, w);
      for (auto& [i, x] : w) rhs.emplace_back(i + off3, x);
    }

    IntMat system = densify(cols, &rhs);
    // the last column of `system` is the rhs; split it off
    std::vector<mpz_class> b(system.rows);
    for (std::size_t i = 0; i < system.rows; ++i) b[i] = system.at(i, system.cols - 1);
    IntMat a(system.rows, system.cols - 1);
    for (std::size_t i = 0; i < system.rows; ++i)
      for (std::size_t j = 0; j + 1 < system.cols; ++j) a.at(i, j) = system.at(i, j);
    auto sol = solve(a, b);
    if (!sol) return std::nullopt;

    HomotopyEquivalence he;
    auto build = [&](const Pieces& basis, std::size_t first, const ChainComplex& from,
                     const ChainComplex& to, int n) {
      std::map<int, BimMorphism> out;
      for (const auto& [k, fs] : from.objects) {
        const BimSum* ts = to.at(k + n);
        if (!ts) continue;
        RMatrix m(ts->total_rank(), fs.total_rank(), ctx_.rank());
        bool any = false;
        for (std::size_t i = 0; i < basis.size(); ++i) {
          if ((*sol)[first + i] == 0 || basis[i].first != k) continue;
          LaurentPoly coef = LaurentPoly::monomial(point_zero(ctx_.rank()), (*sol)[first + i]);
          m = add(m, scale(coef, basis[i].second.mat));
          any = true;
        }
        if (any || n == 0) out[k] = make_morphism(ctx_, fs, *ts, std::move(m), true);
      }
      return out;
    };
    he.bwd = build(psis, 0, d_, c_, 0);
    he.h_src = build(hcs, psis.size(), c_, c_, -1);
    he.h_tgt = build(hds, psis.size() + hcs.size(), d_, d_, -1);
    for (const auto& [k, pm] : phi) {
      const BimSum* cs = c_.at(k);
      const BimSum* ds = d_.at(k);
      if (cs && ds) he.fwd[k] = make_morphism(ctx_, *cs, *ds, pm, true);
    }
    return he;
  }

  // stack sparse columns (plus an optional rhs as the final column) into a
  // dense matrix over the rows that are touched by anything
  IntMat densify(const std::vector<detail::SparseVec>& cols, const detail::SparseVec* rhs) {
    std::set<std::size_t> used;
    for (const auto& col : cols)
      for (const auto& [i, x] : col) used.insert(i);
    if (rhs)
      for (const auto& [i, x] : *rhs) used.insert(i);
    std::map<std::size_t, std::size_t> remap;
    std::size_t next = 0;
    for (std::size_t i : used) remap[i] = next++;
    IntMat out(next, cols.size() + (rhs ? 1 : 0));
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (const auto& [i, x] : cols[j]) out.at(remap[i], j) += x;
    if (rhs)
      for (const auto& [i, x] : *rhs) out.at(remap[i], cols.size()) += x;
    return out;
  }

  const SBimContext& ctx_;
  const ChainComplex& c_;
  const ChainComplex& d_;
  std::int64_t bound_;
  std::int64_t radius_ = 0;
};

inline std::optional<HomotopyEquivalence> homotopy_equivalent(const SBimContext& ctx,
                                                              const ChainComplex& c,
                                                              const ChainComplex& d,
                                                              std::int64_t bound) {
  return EquivalenceSearch(ctx, c, d, bound).run();
}

// ---------------------------------------------------------------------------
// chain isomorphism search with one monomial unit per matched part

namespace detail {

struct IsoNode {
  int degree;
  std::size_t part;
  bool operator<(const IsoNode& o) const {
    return degree != o.degree ? degree < o.degree : part < o.part;
  }
  bool operator==(const IsoNode& o) const { return degree == o.degree && part == o.part; }
};

}  // namespace detail

// Searches for a degreewise isomorphism U with U d = d' U whose blocks are
// unit monomial multiples of identity permutation blocks. Parts are matched
// within each degree in index order among equal objects; unit scalars are
// propagated along nonzero differential blocks and verified exactly.
inline std::optional<std::map<int, BimMorphism>> find_chain_isomorphism(
    const SBimContext& ctx, const ChainComplex& c, const ChainComplex& d) {
  if (c.objects.size() != d.objects.size()) return std::nullopt;
  // match parts degree by degree: equal objects, greedy by index
  std::map<int, std::vector<std::size_t>> match;  // c part index -> d part index
  for (const auto& [k, cs] : c.objects) {
    const BimSum* ds = d.at(k);
    if (!ds || cs.parts.size() != ds->parts.size()) return std::nullopt;
    std::vector<bool> used(ds->parts.size(), false);
    std::vector<std::size_t> m(cs.parts.size());
    for (std::size_t i = 0; i < cs.parts.size(); ++i) {
      bool found = false;
      for (std::size_t j = 0; j < ds->parts.size(); ++j) {
        if (used[j] || !(cs.parts[i] == ds->parts[j])) continue;
        m[i] = j;
        used[j] = true;
        found = true;
        break;
      }
      if (!found) return std::nullopt;
    }
    match[k] = std::move(m);
  }

  // propagate unit scalars x with x_tgt d_blk = d'_blk x_src along nonzero blocks
  std::map<detail::IsoNode, LaurentPoly> unit;
  auto assign = [&](const detail::IsoNode& node, const LaurentPoly& v) -> bool {
    auto it = unit.find(node);
    if (it == unit.end()) {
      unit[node] = v;
      return true;
    }
    return it->second == v;
  };
  // seed each connected component lazily: scan nodes in order; BFS via blocks
  std::vector<std::pair<detail::IsoNode, detail::IsoNode>> edges;
  std::map<std::pair<detail::IsoNode, detail::IsoNode>, LaurentPoly> ratio;  // x_t = r x_s
  for (const auto& [k, dc] : c.diffs) {
    const BimMorphism* dd = d.diff(k);
    const BimSum& cs = *c.at(k);
    const BimSum& ct = *c.at(k + 1);
    const BimSum& dsrc = *d.at(k);
    const BimSum& dtgt = *d.at(k + 1);
    for (std::size_t i = 0; i < cs.parts.size(); ++i)
      for (std::size_t j = 0; j < ct.parts.size(); ++j) {
        RMatrix cb = dc.mat.submatrix(ct.offset(j), cs.offset(i), ct.parts[j].basis_rank(),
                                      cs.parts[i].basis_rank());
        RMatrix db(0, 0, ctx.rank());
        if (dd)
          db = dd->mat.submatrix(dtgt.offset(match.at(k + 1)[j]), dsrc.offset(match.at(k)[i]),
                                 ct.parts[j].basis_rank(), cs.parts[i].basis_rank());
        const bool cz = cb.is_zero();
        const bool dz = !dd || db.is_zero();
        if (cz != dz) return std::nullopt;
        if (cz) continue;
        // need db = r cb with r a monomial unit
        LaurentPoly r(ctx.rank());
        bool have = false;
        for (std::size_t t = 0; t < cb.data.size() && !have; ++t) {
          if (cb.data[t].is_zero()) continue;
          auto q = divide_exact(db.data[t], cb.data[t]);
          if (!q || !is_unit(*q)) return std::nullopt;
          r = *q;
          have = true;
        }
        if (!(db == scale(r, cb))) return std::nullopt;
        detail::IsoNode a{k, i}, b{k + 1, j};
        edges.push_back({a, b});
        ratio[{a, b}] = r;
      }
  }
  // BFS over the constraint graph
  for (const auto& [k, cs] : c.objects)
    for (std::size_t i = 0; i < cs.parts.size(); ++i) {
      detail::IsoNode start{k, i};
      if (unit.count(start)) continue;
      unit[start] = LaurentPoly::one(ctx.rank());
      std::vector<detail::IsoNode> queue{start};
      while (!queue.empty()) {
        detail::IsoNode cur = queue.back();
        queue.pop_back();
        for (const auto& [a, b] : edges) {
          if (a == cur || b == cur) {
            const LaurentPoly& r = ratio.at({a, b});
            if (a == cur) {
              LaurentPoly want = r * unit.at(a);
              if (!unit.count(b)) {
                unit[b] = want;
                queue.push_back(b);
              } else if (!(unit.at(b) == want)) {
                return std::nullopt;
              }
            } else {
              LaurentPoly want = *inverse_of_unit(r) * unit.at(b);
              if (!unit.count(a)) {
                unit[a] = want;
                queue.push_back(a);
              } else if (!(unit.at(a) == want)) {
                return std::nullopt;
              }
            }
          }
        }
      }
    }

  // assemble and verify
  std::map<int, BimMorphism> iso;
  for (const auto& [k, cs] : c.objects) {
    const BimSum& ds = *d.at(k);
    RMatrix u(ds.total_rank(), cs.total_rank(), ctx.rank());
    for (std::size_t i = 0; i < cs.parts.size(); ++i) {
      const LaurentPoly& x = unit.at({k, i});
      const std::size_t roff = ds.offset(match.at(k)[i]);
      const std::size_t coff = cs.offset(i);
      for (std::size_t t = 0; t < cs.parts[i].basis_rank(); ++t) u.at(roff + t, coff + t) = x;
    }
    iso[k] = make_morphism(ctx, cs, ds, std::move(u));
  }
  for (const auto& [k, dc] : c.diffs) {
    const BimMorphism* dd = d.diff(k);
    RMatrix lhs = dd ? mul(dd->mat, iso.at(k).mat)
                     : RMatrix(d.at(k + 1)->total_rank(), c.at(k)->total_rank(), ctx.rank());
    RMatrix rhs = mul(iso.at(k + 1).mat, dc.mat);
    if (!(lhs == rhs)) return std::nullopt;
  }
  for (const auto& [k, dd] : d.diffs)
    if (!c.diff(k) && !mul(dd.mat, iso.at(k).mat).is_zero()) return std::nullopt;
  return iso;
}

}  // namespace kms
