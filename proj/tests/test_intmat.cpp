#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kms/intmat.hpp"

using kms::ColumnHermiteForm;
using kms::IntMat;
using kms::SmithForm;

namespace {

IntMat random_mat(std::mt19937& rng, std::size_t r, std::size_t c, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  IntMat m(r, c);
  for (auto& v : m.data) v = d(rng);
  return m;
}

void check_smith(const IntMat& a) {
  SmithForm s = kms::smith_normal_form(a);
  REQUIRE(kms::mul(kms::mul(s.U, a), s.V) == s.D);
  REQUIRE(abs(kms::determinant(s.U)) == 1);
  REQUIRE(abs(kms::determinant(s.V)) == 1);
  const std::size_t n = std::min(a.rows, a.cols);
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE(s.D.at(i, i) >= 0);
    if (i + 1 < n && s.D.at(i, i) != 0)
      REQUIRE(s.D.at(i + 1, i + 1) % s.D.at(i, i) == 0);
    if (s.D.at(i, i) == 0 && i + 1 < n) REQUIRE(s.D.at(i + 1, i + 1) == 0);
  }
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j)
      if (i != j) REQUIRE(s.D.at(i, j) == 0);
}

void check_hermite(const IntMat& a) {
  ColumnHermiteForm h = kms::column_hermite_form(a);
  REQUIRE(kms::mul(a, h.V) == h.H);
  REQUIRE(abs(kms::determinant(h.V)) == 1);
  std::size_t prev_row = 0;
  bool first = true;
  for (auto [r, c] : h.pivots) {
    REQUIRE(h.H.at(r, c) > 0);
    if (!first) REQUIRE(r > prev_row);
    prev_row = r;
    first = false;
    for (std::size_t j = c + 1; j < h.H.cols; ++j) REQUIRE(h.H.at(r, j) == 0);
    for (std::size_t k = 0; k < c; ++k) {
      REQUIRE(h.H.at(r, k) >= 0);
      REQUIRE(h.H.at(r, k) < h.H.at(r, c));
    }
  }
  // columns past the last pivot vanish
  for (std::size_t j = h.pivots.size(); j < h.H.cols; ++j)
    for (std::size_t i = 0; i < h.H.rows; ++i) REQUIRE(h.H.at(i, j) == 0);
}

}  // namespace

TEST_CASE("smith form of pinned examples") {
  SmithForm s1 = kms::smith_normal_form(IntMat{{3, 0}, {0, 5}});
  REQUIRE(s1.D.at(0, 0) == 1);
  REQUIRE(s1.D.at(1, 1) == 15);

  SmithForm s2 = kms::smith_normal_form(IntMat{{2, 4}, {6, 8}});
  REQUIRE(s2.D.at(0, 0) == 2);
  REQUIRE(s2.D.at(1, 1) == 4);

  SmithForm s3 = kms::smith_normal_form(IntMat{{2, -2}, {-2, 2}});
  REQUIRE(s3.D.at(0, 0) == 2);
  REQUIRE(s3.D.at(1, 1) == 0);

  SmithForm s4 = kms::smith_normal_form(IntMat(2, 2));
  REQUIRE(s4.D.is_zero());
}

TEST_CASE("smith form properties on random matrices") {
  std::mt19937 rng(20240811);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t r = 1 + rng() % 4, c = 1 + rng() % 4;
    check_smith(random_mat(rng, r, c, -9, 9));
  }
  check_smith(IntMat(3, 0));
  check_smith(IntMat(0, 3));
}

TEST_CASE("column hermite form properties") {
  std::mt19937 rng(20240812);
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t r = 1 + rng() % 4, c = 1 + rng() % 4;
    check_hermite(random_mat(rng, r, c, -9, 9));
  }
  check_hermite(IntMat{{0, 0, 0}, {0, 0, 0}});
}

TEST_CASE("kernel basis spans the kernel") {
  std::mt19937 rng(20240813);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t r = 1 + rng() % 3, c = 1 + rng() % 4;
    IntMat a = random_mat(rng, r, c, -6, 6);
    IntMat k = kms::kernel_basis(a);
    REQUIRE(kms::mul(a, k).is_zero());
    ColumnHermiteForm h = kms::column_hermite_form(a);
    REQUIRE(k.cols == a.cols - h.pivots.size());
    // kernel columns are primitive and independent: their Hermite form has
    // full rank
    if (k.cols > 0) {
      ColumnHermiteForm hk = kms::column_hermite_form(k);
      REQUIRE(hk.pivots.size() == k.cols);
    }
  }
}

TEST_CASE("exact solve") {
  std::mt19937 rng(20240814);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t r = 1 + rng() % 3, c = 1 + rng() % 4;
    IntMat a = random_mat(rng, r, c, -6, 6);
    std::vector<mpz_class> x(c);
    std::uniform_int_distribution<int> d(-5, 5);
    for (auto& v : x) v = d(rng);
    std::vector<mpz_class> b = kms::mat_apply(a, x);
    auto sol = kms::solve(a, b);
    REQUIRE(sol.has_value());
    REQUIRE(kms::mat_apply(a, *sol) == b);
  }
  REQUIRE_FALSE(kms::solve(IntMat{{2}}, {mpz_class(3)}).has_value());
  REQUIRE_FALSE(kms::solve(IntMat{{1, 0}, {1, 0}}, {mpz_class(1), mpz_class(2)}).has_value());
}

TEST_CASE("reduction to a canonical coset representative") {
  IntMat a{{2, 0}, {0, 3}};
  ColumnHermiteForm h = kms::column_hermite_form(a);
  std::vector<mpz_class> v{mpz_class(5), mpz_class(7)};
  auto red = kms::reduce_mod_columns(v, h);
  REQUIRE(red[0] == 1);
  REQUIRE(red[1] == 1);
  // idempotent, and the difference lies in the lattice
  REQUIRE(kms::reduce_mod_columns(red, h) == red);
  std::vector<mpz_class> diff{v[0] - red[0], v[1] - red[1]};
  REQUIRE(kms::solve(a, diff).has_value());

  // the representative depends only on the lattice, not the generating set
  IntMat b{{2, 2}, {3, 0}};  // same column lattice as a
  auto red2 = kms::reduce_mod_columns(v, kms::column_hermite_form(b));
  REQUIRE(red2 == red);
}

TEST_CASE("determinant") {
  REQUIRE(kms::determinant(IntMat{{2, 4}, {6, 8}}) == -8);
  REQUIRE(kms::determinant(IntMat::identity(4)) == 1);
  REQUIRE(kms::determinant(IntMat{{0, 1}, {1, 0}}) == -1);
  std::mt19937 rng(20240815);
  for (int trial = 0; trial < 20; ++trial) {
    IntMat a = random_mat(rng, 3, 3, -5, 5);
    IntMat b = random_mat(rng, 3, 3, -5, 5);
    REQUIRE(kms::determinant(kms::mul(a, b)) ==
            kms::determinant(a) * kms::determinant(b));
  }
}
