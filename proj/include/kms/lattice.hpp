#pragma once

// Finite-rank lattices and their points. Points are plain integer vectors;
// all linear algebra on them goes through IntMat so growth is checked.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kms/intmat.hpp"

namespace kms {

using LatticePoint = std::vector<std::int64_t>;

struct Lattice {
  std::size_t rank = 0;
  std::vector<std::string> labels;  // one per coordinate, unique

  Lattice() = default;
  explicit Lattice(std::size_t r) : rank(r) {
    labels.reserve(r);
    for (std::size_t i = 0; i < r; ++i) labels.push_back("e" + std::to_string(i + 1));
  }
  Lattice(std::size_t r, std::vector<std::string> ls) : rank(r), labels(std::move(ls)) {
    if (labels.size() != rank) throw std::invalid_argument("lattice label count != rank");
  }

  bool operator==(const Lattice&) const = default;
};

inline LatticePoint point_zero(std::size_t rank) { return LatticePoint(rank, 0); }

inline void check_rank(const LatticePoint& p, std::size_t rank, const char* what) {
  if (p.size() != rank) throw std::invalid_argument(std::string("lattice rank mismatch in ") + what);
}

inline LatticePoint point_add(const LatticePoint& a, const LatticePoint& b) {
  check_rank(b, a.size(), "point_add");
  LatticePoint c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline LatticePoint point_sub(const LatticePoint& a, const LatticePoint& b) {
  check_rank(b, a.size(), "point_sub");
  LatticePoint c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

inline LatticePoint point_neg(const LatticePoint& a) {
  LatticePoint c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = -a[i];
  return c;
}

inline bool point_is_zero(const LatticePoint& a) {
  for (auto v : a)
    if (v != 0) return false;
  return true;
}

// Pairing of a weight with a coweight (dot product in coordinates).
inline mpz_class pairing(const LatticePoint& a, const LatticePoint& b) {
  check_rank(b, a.size(), "pairing");
  mpz_class s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += mpz_class(a[i]) * b[i];
  return s;
}

inline std::int64_t to_int64(const mpz_class& v, const char* what) {
  if (!v.fits_slong_p()) throw std::overflow_error(std::string("coordinate overflow in ") + what);
  return static_cast<std::int64_t>(v.get_si());
}

inline std::vector<mpz_class> to_mpz(const LatticePoint& p) {
  return std::vector<mpz_class>(p.begin(), p.end());
}

inline LatticePoint to_point(const std::vector<mpz_class>& v, const char* what) {
  LatticePoint p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = to_int64(v[i], what);
  return p;
}

// Image of a point under an integer matrix (target rank may differ).
inline LatticePoint map_point(const IntMat& m, const LatticePoint& x) {
  check_rank(x, m.cols, "map_point");
  return to_point(mat_apply(m, to_mpz(x)), "map_point");
}

}  // namespace kms
