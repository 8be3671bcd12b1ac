#pragma once

// Kac-Moody root data: a lattice X with chosen simple roots and coroots whose
// pairing matrix is a generalized Cartan matrix. Validation, classification
// (free / cofree / simply-connected / adjoint), Langlands duality, highest
// roots of finite-type data, affinization, and fundamental-weight witnesses.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kms/error.hpp"
#include "kms/intmat.hpp"
#include "kms/lattice.hpp"

namespace kms {

struct RootDatum {
  Lattice lattice;                           // X; coroots live in the dual basis
  std::vector<std::string> gens;             // generator names, index set I
  std::vector<LatticePoint> simple_roots;    // alpha_i in X
  std::vector<LatticePoint> simple_coroots;  // alpha_i^ in X dual

  RootDatum() = default;
  RootDatum(Lattice x, std::vector<std::string> names, std::vector<LatticePoint> roots,
            std::vector<LatticePoint> coroots)
      : lattice(std::move(x)),
        gens(std::move(names)),
        simple_roots(std::move(roots)),
        simple_coroots(std::move(coroots)) {
    if (gens.size() != simple_roots.size() || gens.size() != simple_coroots.size())
      throw KmsError("invalid_datum", "generator, root, and coroot counts differ");
    std::set<std::string> seen(gens.begin(), gens.end());
    if (seen.size() != gens.size())
      throw KmsError("invalid_datum", "duplicate generator names");
    for (const auto& r : simple_roots)
      if (r.size() != lattice.rank) throw KmsError("invalid_datum", "root rank mismatch");
    for (const auto& c : simple_coroots)
      if (c.size() != lattice.rank) throw KmsError("invalid_datum", "coroot rank mismatch");
  }

  std::size_t rank() const { return lattice.rank; }
  std::size_t num_gens() const { return gens.size(); }

  std::size_t gen_index(const std::string& name) const {
    for (std::size_t i = 0; i < gens.size(); ++i)
      if (gens[i] == name) return i;
    throw KmsError("bad_input", "unknown generator '" + name + "'");
  }

  // a_ij = <alpha_j, alpha_i^>
  IntMat cartan() const {
    const std::size_t n = num_gens();
    IntMat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a.at(i, j) = pairing(simple_roots[j], simple_coroots[i]);
    return a;
  }

  // matrix of s_i on X: x -> x - <x, alpha_i^> alpha_i
  IntMat reflection_on_x(std::size_t i) const {
    IntMat m = IntMat::identity(rank());
    for (std::size_t r = 0; r < rank(); ++r)
      for (std::size_t c = 0; c < rank(); ++c)
        m.at(r, c) -= mpz_class(simple_roots[i][r]) * simple_coroots[i][c];
    return m;
  }

  LatticePoint reflect_weight(std::size_t i, const LatticePoint& x) const {
    mpz_class k = pairing(x, simple_coroots[i]);
    LatticePoint y = x;
    for (std::size_t c = 0; c < rank(); ++c)
      y[c] -= to_int64(k * simple_roots[i][c], "reflect_weight");
    return y;
  }

  bool operator==(const RootDatum&) const = default;
};

inline std::vector<std::string> validate(const RootDatum& d) {
  std::vector<std::string> bad;
  IntMat a = d.cartan();
  const std::size_t n = d.num_gens();
  for (std::size_t i = 0; i < n; ++i)
    if (a.at(i, i) != 2)
      bad.push_back("a_ii != 2 at " + d.gens[i] + " (got " + a.at(i, i).get_str() + ")");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (a.at(i, j) > 0)
        bad.push_back("positive off-diagonal entry at (" + d.gens[i] + "," + d.gens[j] + ")");
      if (i < j && (a.at(i, j) == 0) != (a.at(j, i) == 0))
        bad.push_back("asymmetric vanishing at (" + d.gens[i] + "," + d.gens[j] + ")");
    }
  return bad;
}

inline void require_valid(const RootDatum& d) {
  std::vector<std::string> bad = validate(d);
  if (bad.empty()) return;
  std::string msg = "invalid root datum:";
  for (const auto& b : bad) msg += " " + b + ";";
  throw KmsError("invalid_datum", msg);
}

struct DatumClassification {
  bool free = false;          // simple roots linearly independent
  bool cofree = false;        // simple coroots linearly independent
  bool sc_type = false;       // every <-, alpha_i^> : X -> Z surjective
  bool adjoint_type = false;  // every <alpha_i, -> surjective
  std::vector<bool> sc_at, adjoint_at;  // per-index refinement
};

namespace detail {
inline bool independent(const std::vector<LatticePoint>& vecs, std::size_t rank) {
  IntMat m(rank, vecs.size());
  for (std::size_t j = 0; j < vecs.size(); ++j)
    for (std::size_t i = 0; i < rank; ++i) m.at(i, j) = vecs[j][i];
  return column_hermite_form(m).pivots.size() == vecs.size();
}

inline bool coords_gcd_is_one(const LatticePoint& v) {
  mpz_class g = 0;
  for (auto x : v) g = gcd(g, mpz_class(x));
  return g == 1;
}
}  // namespace detail

inline DatumClassification classify(const RootDatum& d) {
  require_valid(d);
  DatumClassification c;
  c.free = detail::independent(d.simple_roots, d.rank());
  c.cofree = detail::independent(d.simple_coroots, d.rank());
  c.sc_type = c.adjoint_type = true;
  for (std::size_t i = 0; i < d.num_gens(); ++i) {
    c.sc_at.push_back(detail::coords_gcd_is_one(d.simple_coroots[i]));
    c.adjoint_at.push_back(detail::coords_gcd_is_one(d.simple_roots[i]));
    c.sc_type = c.sc_type && c.sc_at.back();
    c.adjoint_type = c.adjoint_type && c.adjoint_at.back();
  }
  return c;
}

inline RootDatum langlands_dual(const RootDatum& d) {
  require_valid(d);
  return RootDatum(d.lattice, d.gens, d.simple_coroots, d.simple_roots);
}

// Weight with <w, alpha_i^> = 1, canonical representative: the Hermite-form
// particular solution reduced modulo the pairing kernel so each coordinate at
// a kernel pivot row lies in [0, pivot). Empty when the simply-connected
// condition fails at i.
inline std::optional<LatticePoint> find_fundamental_weight(const RootDatum& d, std::size_t i) {
  IntMat row(1, d.rank());
  for (std::size_t j = 0; j < d.rank(); ++j) row.at(0, j) = d.simple_coroots[i][j];
  auto sol = solve(row, {mpz_class(1)});
  if (!sol) return std::nullopt;
  IntMat k = kernel_basis(row);
  if (k.cols > 0) *sol = reduce_mod_columns(*sol, column_hermite_form(k));
  return to_point(*sol, "find_fundamental_weight");
}

// A root and its coroot, both as coordinate vectors over the simple
// roots/coroots (the X-free bookkeeping that stays correct on non-free data).
struct RootPair {
  LatticePoint root_q;    // root = sum root_q[i] * alpha_i
  LatticePoint coroot_q;  // coroot = sum coroot_q[i] * alpha_i^
};

// Closure of the simple pairs under all simple reflections, capped. Reflection
// acts on root coordinates by c -> c - (sum_j a_{ij} c_j) e_i and on coroot
// coordinates by the transposed rule.
inline std::vector<RootPair> enumerate_roots(const RootDatum& d, std::size_t cap = 10000) {
  require_valid(d);
  IntMat a = d.cartan();
  const std::size_t n = d.num_gens();
  std::set<std::pair<LatticePoint, LatticePoint>> seen;
  std::vector<RootPair> out, frontier;
  auto push = [&](RootPair p) {
    if (!seen.emplace(p.root_q, p.coroot_q).second) return;
    out.push_back(p);
    frontier.push_back(std::move(p));
  };
  for (std::size_t i = 0; i < n; ++i) {
    RootPair p{point_zero(n), point_zero(n)};
    p.root_q[i] = 1;
    p.coroot_q[i] = 1;
    push(std::move(p));
  }
  while (!frontier.empty()) {
    if (out.size() > cap)
      throw KmsError("enumeration_cap",
                     "root closure exceeded " + std::to_string(cap) +
                         " elements; datum is not of finite type");
    std::vector<RootPair> next;
    std::swap(next, frontier);
    for (const RootPair& p : next)
      for (std::size_t i = 0; i < n; ++i) {
        RootPair q = p;
        mpz_class pr = 0, pc = 0;
        for (std::size_t j = 0; j < n; ++j) {
          pr += a.at(i, j) * p.root_q[j];
          pc += a.at(j, i) * p.coroot_q[j];
        }
        q.root_q[i] -= to_int64(pr, "enumerate_roots");
        q.coroot_q[i] -= to_int64(pc, "enumerate_roots");
        push(std::move(q));
      }
  }
  return out;
}

struct HighestRoot {
  LatticePoint theta_q, theta_vee_q;  // coordinates over simples
  LatticePoint theta_x, theta_vee_x;  // embedded in X and its dual
};

inline HighestRoot highest_root(const RootDatum& d, std::size_t cap = 10000) {
  std::vector<RootPair> roots = enumerate_roots(d, cap);
  const std::size_t n = d.num_gens();
  auto positive = [](const LatticePoint& c) {
    bool nonzero = false;
    for (auto v : c) {
      if (v < 0) return false;
      if (v > 0) nonzero = true;
    }
    return nonzero;
  };
  auto dominates = [n](const LatticePoint& a, const LatticePoint& b) {
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] < b[i]) return false;
    return true;
  };
  std::vector<const RootPair*> maximal;
  for (const RootPair& p : roots) {
    if (!positive(p.root_q)) continue;
    bool topped = false;
    for (const RootPair& q : roots)
      if (positive(q.root_q) && q.root_q != p.root_q && dominates(q.root_q, p.root_q)) {
        topped = true;
        break;
      }
    if (!topped) maximal.push_back(&p);
  }
  if (maximal.size() != 1)
    throw KmsError("not_irreducible",
                   "expected a unique dominance-maximal positive root, found " +
                       std::to_string(maximal.size()));
  HighestRoot h;
  h.theta_q = maximal[0]->root_q;
  h.theta_vee_q = maximal[0]->coroot_q;
  h.theta_x = point_zero(d.rank());
  h.theta_vee_x = point_zero(d.rank());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d.rank(); ++c) {
      h.theta_x[c] += h.theta_q[i] * d.simple_roots[i][c];
      h.theta_vee_x[c] += h.theta_vee_q[i] * d.simple_coroots[i][c];
    }
  return h;
}

enum class AffinizeMode { loop, loop_rotation, central_extension };

inline AffinizeMode affinize_mode_from_string(const std::string& s) {
  if (s == "loop") return AffinizeMode::loop;
  if (s == "loop_rotation") return AffinizeMode::loop_rotation;
  if (s == "central_extension") return AffinizeMode::central_extension;
  throw KmsError("bad_input", "unknown affinization mode '" + s + "'");
}

// Adds the affine node at index 0. In loop mode the lattice is unchanged and
// the new root/coroot are -theta, -theta^ (never free). loop_rotation appends
// a rotation coordinate delta to X so the new root -theta + delta keeps the
// roots independent; central_extension appends the central coordinate to the
// dual side instead.
inline RootDatum affinize(const RootDatum& d, AffinizeMode mode, std::size_t cap = 10000) {
  HighestRoot h = highest_root(d, cap);
  std::string zero_name = "s0";
  if (std::find(d.gens.begin(), d.gens.end(), zero_name) != d.gens.end()) zero_name = "a0";
  std::vector<std::string> gens;
  gens.push_back(zero_name);
  gens.insert(gens.end(), d.gens.begin(), d.gens.end());

  const bool extend = mode != AffinizeMode::loop;
  const std::size_t rank = d.rank() + (extend ? 1 : 0);
  auto lift = [&](const LatticePoint& p, std::int64_t last) {
    LatticePoint q = p;
    if (extend) q.push_back(last);
    return q;
  };

  std::vector<LatticePoint> roots, coroots;
  switch (mode) {
    case AffinizeMode::loop:
      roots.push_back(point_neg(h.theta_x));
      coroots.push_back(point_neg(h.theta_vee_x));
      break;
    case AffinizeMode::loop_rotation:
      roots.push_back(lift(point_neg(h.theta_x), 1));
      coroots.push_back(lift(point_neg(h.theta_vee_x), 0));
      break;
    case AffinizeMode::central_extension:
      roots.push_back(lift(point_neg(h.theta_x), 0));
      coroots.push_back(lift(point_neg(h.theta_vee_x), 1));
      break;
  }
  for (std::size_t i = 0; i < d.num_gens(); ++i) {
    roots.push_back(lift(d.simple_roots[i], 0));
    coroots.push_back(lift(d.simple_coroots[i], 0));
  }
  RootDatum out(Lattice(rank), std::move(gens), std::move(roots), std::move(coroots));
  require_valid(out);  // affinization of a valid finite-type datum stays valid
  return out;
}

}  // namespace kms
