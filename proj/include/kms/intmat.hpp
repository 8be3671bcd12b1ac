#pragma once

// Exact integer matrices over GMP integers, plus the normal forms the lattice
// layer needs: Smith normal form with unimodular transforms on both sides, a
// column-style Hermite form used for kernels and canonical coset
// representatives, and exact linear solving.

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kms {

struct IntMat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<mpz_class> data;  // row major

  IntMat() = default;
  IntMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  IntMat(std::initializer_list<std::initializer_list<long>> init) {
    rows = init.size();
    cols = rows ? init.begin()->size() : 0;
    data.reserve(rows * cols);
    for (const auto& row : init) {
      if (row.size() != cols) throw std::invalid_argument("ragged IntMat initializer");
      for (long v : row) data.emplace_back(v);
    }
  }

  static IntMat identity(std::size_t n) {
    IntMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  mpz_class& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const mpz_class& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const IntMat&) const = default;

  bool is_zero() const {
    return std::all_of(data.begin(), data.end(),
                       [](const mpz_class& v) { return v == 0; });
  }
};

inline IntMat mul(const IntMat& a, const IntMat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("IntMat size mismatch in mul");
  IntMat c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const mpz_class& x = a.at(i, k);
      if (x == 0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c.at(i, j) += x * b.at(k, j);
    }
  return c;
}

inline IntMat transpose(const IntMat& a) {
  IntMat t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

inline std::vector<mpz_class> mat_apply(const IntMat& a, const std::vector<mpz_class>& x) {
  if (a.cols != x.size()) throw std::invalid_argument("IntMat size mismatch in apply");
  std::vector<mpz_class> y(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) y[i] += a.at(i, j) * x[j];
  return y;
}

// Floor quotient; operator/ on mpz_class truncates toward zero, which is the
// wrong thing for canonical residue reduction.
inline mpz_class fdiv(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

// Bareiss fraction-free elimination, exact over Z.
inline mpz_class determinant(IntMat m) {
  if (m.rows != m.cols) throw std::invalid_argument("determinant of non-square IntMat");
  const std::size_t n = m.rows;
  if (n == 0) return 1;
  int sign = 1;
  mpz_class prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m.at(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && m.at(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        mpz_class t = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
        mpz_divexact(m.at(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
    prev = m.at(k, k);
  }
  return sign > 0 ? m.at(n - 1, n - 1) : mpz_class(-m.at(n - 1, n - 1));
}

struct SmithForm {
  // U * A * V = D with U, V unimodular and D diagonal, entries nonnegative,
  // each dividing the next.
  IntMat U, D, V;
};

inline SmithForm smith_normal_form(const IntMat& a) {
  SmithForm s{IntMat::identity(a.rows), a, IntMat::identity(a.cols)};
  IntMat& U = s.U;
  IntMat& D = s.D;
  IntMat& V = s.V;

  auto row_sub = [&](std::size_t dst, std::size_t src, const mpz_class& q) {
    for (std::size_t j = 0; j < D.cols; ++j) D.at(dst, j) -= q * D.at(src, j);
    for (std::size_t j = 0; j < U.cols; ++j) U.at(dst, j) -= q * U.at(src, j);
  };
  auto col_sub = [&](std::size_t dst, std::size_t src, const mpz_class& q) {
    for (std::size_t i = 0; i < D.rows; ++i) D.at(i, dst) -= q * D.at(i, src);
    for (std::size_t i = 0; i < V.rows; ++i) V.at(i, dst) -= q * V.at(i, src);
  };
  auto row_swap = [&](std::size_t x, std::size_t y) {
    if (x == y) return;
    for (std::size_t j = 0; j < D.cols; ++j) std::swap(D.at(x, j), D.at(y, j));
    for (std::size_t j = 0; j < U.cols; ++j) std::swap(U.at(x, j), U.at(y, j));
  };
  auto col_swap = [&](std::size_t x, std::size_t y) {
    if (x == y) return;
    for (std::size_t i = 0; i < D.rows; ++i) std::swap(D.at(i, x), D.at(i, y));
    for (std::size_t i = 0; i < V.rows; ++i) std::swap(V.at(i, x), V.at(i, y));
  };

  const std::size_t n = std::min(D.rows, D.cols);
  for (std::size_t t = 0; t < n; ++t) {
    // move the entry of smallest nonzero magnitude in the trailing block to
    // the pivot slot
    std::size_t pi = t, pj = t;
    bool found = false;
    mpz_class best;
    for (std::size_t i = t; i < D.rows; ++i)
      for (std::size_t j = t; j < D.cols; ++j) {
        if (D.at(i, j) == 0) continue;
        mpz_class m = abs(D.at(i, j));
        if (!found || m < best) {
          found = true;
          best = m;
          pi = i;
          pj = j;
        }
      }
    if (!found) break;
    row_swap(t, pi);
    col_swap(t, pj);

    for (;;) {
      // clear the pivot's row and column; any nonzero remainder is strictly
      // smaller than the pivot and gets swapped in, so this terminates
      bool swapped = false;
      for (std::size_t i = t + 1; i < D.rows; ++i) {
        if (D.at(i, t) == 0) continue;
        row_sub(i, t, D.at(i, t) / D.at(t, t));
        if (D.at(i, t) != 0) {
          row_swap(t, i);
          swapped = true;
        }
      }
      for (std::size_t j = t + 1; j < D.cols; ++j) {
        if (D.at(t, j) == 0) continue;
        col_sub(j, t, D.at(t, j) / D.at(t, t));
        if (D.at(t, j) != 0) {
          col_swap(t, j);
          swapped = true;
        }
      }
      if (swapped) continue;

      // enforce divisibility: fold a bad row into the pivot row and redo
      bool ok = true;
      for (std::size_t i = t + 1; i < D.rows && ok; ++i)
        for (std::size_t j = t + 1; j < D.cols && ok; ++j)
          if (D.at(i, j) % D.at(t, t) != 0) {
            for (std::size_t k = 0; k < D.cols; ++k) D.at(t, k) += D.at(i, k);
            for (std::size_t k = 0; k < U.cols; ++k) U.at(t, k) += U.at(i, k);
            ok = false;
          }
      if (ok) break;
    }
  }

  for (std::size_t t = 0; t < n; ++t)
    if (D.at(t, t) < 0) {
      for (std::size_t j = 0; j < D.cols; ++j) D.at(t, j) = -D.at(t, j);
      for (std::size_t j = 0; j < U.cols; ++j) U.at(t, j) = -U.at(t, j);
    }
  return s;
}

struct ColumnHermiteForm {
  // A * V = H with V unimodular. H is in column echelon form: pivot rows
  // strictly increase left to right, pivots are positive, entries of a pivot
  // row left of the pivot lie in [0, pivot), and columns past the last pivot
  // are zero.
  IntMat H, V;
  std::vector<std::pair<std::size_t, std::size_t>> pivots;  // (row, col)
};

inline ColumnHermiteForm column_hermite_form(const IntMat& a) {
  ColumnHermiteForm h{a, IntMat::identity(a.cols), {}};
  IntMat& H = h.H;
  IntMat& V = h.V;

  auto col_sub = [&](std::size_t dst, std::size_t src, const mpz_class& q) {
    for (std::size_t i = 0; i < H.rows; ++i) H.at(i, dst) -= q * H.at(i, src);
    for (std::size_t i = 0; i < V.rows; ++i) V.at(i, dst) -= q * V.at(i, src);
  };
  auto col_swap = [&](std::size_t x, std::size_t y) {
    if (x == y) return;
    for (std::size_t i = 0; i < H.rows; ++i) std::swap(H.at(i, x), H.at(i, y));
    for (std::size_t i = 0; i < V.rows; ++i) std::swap(V.at(i, x), V.at(i, y));
  };
  auto col_neg = [&](std::size_t x) {
    for (std::size_t i = 0; i < H.rows; ++i) H.at(i, x) = -H.at(i, x);
    for (std::size_t i = 0; i < V.rows; ++i) V.at(i, x) = -V.at(i, x);
  };

  std::size_t c = 0;
  for (std::size_t r = 0; r < H.rows && c < H.cols; ++r) {
    for (;;) {
      std::size_t pj = c;
      bool found = false;
      mpz_class best;
      for (std::size_t j = c; j < H.cols; ++j) {
        if (H.at(r, j) == 0) continue;
        mpz_class m = abs(H.at(r, j));
        if (!found || m < best) {
          found = true;
          best = m;
          pj = j;
        }
      }
      if (!found) break;
      col_swap(c, pj);
      bool clear = true;
      for (std::size_t j = c + 1; j < H.cols; ++j) {
        if (H.at(r, j) == 0) continue;
        col_sub(j, c, H.at(r, j) / H.at(r, c));
        if (H.at(r, j) != 0) clear = false;
      }
      if (clear) break;
    }
    if (H.at(r, c) == 0) continue;
    if (H.at(r, c) < 0) col_neg(c);
    for (std::size_t k = 0; k < c; ++k) {
      mpz_class q = fdiv(H.at(r, k), H.at(r, c));
      if (q != 0) col_sub(k, c, q);
    }
    h.pivots.emplace_back(r, c);
    ++c;
  }
  return h;
}

// Basis of { x : A x = 0 } as matrix columns.
inline IntMat kernel_basis(const IntMat& a) {
  ColumnHermiteForm h = column_hermite_form(a);
  const std::size_t r = h.pivots.size();
  IntMat k(a.cols, a.cols - r);
  for (std::size_t j = r; j < a.cols; ++j)
    for (std::size_t i = 0; i < a.cols; ++i) k.at(i, j - r) = h.V.at(i, j);
  return k;
}

// One integer solution of A x = b, if any.
inline std::optional<std::vector<mpz_class>> solve(const IntMat& a,
                                                   const std::vector<mpz_class>& b) {
  if (b.size() != a.rows) throw std::invalid_argument("IntMat size mismatch in solve");
  ColumnHermiteForm h = column_hermite_form(a);
  const std::size_t npiv = h.pivots.size();
  std::vector<mpz_class> y(a.cols);
  std::size_t pidx = 0;
  for (std::size_t r = 0; r < a.rows; ++r) {
    mpz_class s = 0;
    for (std::size_t k = 0; k < npiv; ++k) s += h.H.at(r, k) * y[k];
    mpz_class need = b[r] - s;
    if (pidx < npiv && h.pivots[pidx].first == r) {
      const mpz_class& d = h.H.at(r, h.pivots[pidx].second);
      if (need % d != 0) return std::nullopt;
      y[h.pivots[pidx].second] = need / d;
      ++pidx;
    } else if (need != 0) {
      return std::nullopt;
    }
  }
  return mat_apply(h.V, y);
}

// Canonical representative of v modulo the column lattice described by h:
// the unique coset member whose coordinate at each pivot row lies in
// [0, pivot).
inline std::vector<mpz_class> reduce_mod_columns(std::vector<mpz_class> v,
                                                 const ColumnHermiteForm& h) {
  if (v.size() != h.H.rows) throw std::invalid_argument("size mismatch in reduce_mod_columns");
  for (auto [r, c] : h.pivots) {
    mpz_class q = fdiv(v[r], h.H.at(r, c));
    if (q != 0)
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= q * h.H.at(i, c);
  }
  return v;
}

}  // namespace kms
