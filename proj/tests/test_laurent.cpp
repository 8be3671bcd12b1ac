#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kms/laurent.hpp"
#include "support.hpp"

using kms::LatticePoint;
using kms::LaurentPoly;
using testsupport::expo;
using testsupport::random_poly;
using testsupport::random_nonzero_poly;

TEST_CASE("addition basics") {
  LaurentPoly a = expo({3});
  REQUIRE((a + (-a)).is_zero());

  LaurentPoly s = LaurentPoly::one(1) + expo({1});
  REQUIRE(s.terms.size() == 2);
  REQUIRE(s.terms.at(LatticePoint{0}) == 1);
  REQUIRE(s.terms.at(LatticePoint{1}) == 1);

  std::mt19937 rng(101);
  for (int t = 0; t < 50; ++t) {
    LaurentPoly p = random_poly(rng, 2, 6, -5, 5, 9);
    LaurentPoly q = random_poly(rng, 2, 6, -5, 5, 9);
    REQUIRE(p + q == q + p);
  }
}

TEST_CASE("multiplication basics") {
  REQUIRE(expo({2, -1}) * expo({3, 4}) == expo({5, 3}));

  LaurentPoly v = expo({1});
  REQUIRE((LaurentPoly::one(1) + v) * (LaurentPoly::one(1) - v) ==
          LaurentPoly::one(1) - expo({2}));

  std::mt19937 rng(102);
  for (int t = 0; t < 50; ++t) {
    LaurentPoly p = random_poly(rng, 2, 6, -5, 5, 9);
    REQUIRE(p * LaurentPoly::one(2) == p);
  }
}

TEST_CASE("ring axioms on random elements") {
  std::mt19937 rng(103);
  for (int t = 0; t < 40; ++t) {
    LaurentPoly p = random_poly(rng, 2, 5, -4, 4, 7);
    LaurentPoly q = random_poly(rng, 2, 5, -4, 4, 7);
    LaurentPoly r = random_poly(rng, 2, 5, -4, 4, 7);
    REQUIRE((p + q) + r == p + (q + r));
    REQUIRE((p * q) * r == p * (q * r));
    REQUIRE(p * q == q * p);
    REQUIRE(p * (q + r) == p * q + p * r);
  }
}

TEST_CASE("exact division pinned values") {
  LaurentPoly one = LaurentPoly::one(1);
  auto d1 = kms::divide_exact(one - expo({4}), one - expo({2}));
  REQUIRE(d1.has_value());
  REQUIRE(*d1 == one + expo({2}));

  std::mt19937 rng(104);
  LaurentPoly p = random_poly(rng, 2, 6, -5, 5, 9);
  auto d2 = kms::divide_exact(p, LaurentPoly::one(2));
  REQUIRE(d2.has_value());
  REQUIRE(*d2 == p);

  REQUIRE_FALSE(kms::divide_exact(one - expo({2}), one - expo({3})).has_value());
  REQUIRE_THROWS_AS(kms::divide_exact(one, LaurentPoly::zero(1)), std::domain_error);
}

TEST_CASE("exact division recovers factors") {
  std::mt19937 rng(105);
  for (int t = 0; t < 60; ++t) {
    std::size_t rank = 1 + rng() % 2;
    LaurentPoly p = random_poly(rng, rank, 5, -4, 4, 8);
    LaurentPoly q = random_nonzero_poly(rng, rank, 5, -4, 4, 8);
    auto d = kms::divide_exact(p * q, q);
    REQUIRE(d.has_value());
    REQUIRE(*d == p);
  }
}

TEST_CASE("non-divisible pairs are rejected") {
  std::mt19937 rng(106);
  int rejected = 0;
  for (int t = 0; t < 60; ++t) {
    LaurentPoly p = random_poly(rng, 2, 4, -3, 3, 6);
    LaurentPoly q = random_nonzero_poly(rng, 2, 4, -3, 3, 6);
    auto d = kms::divide_exact(p, q);
    if (d.has_value()) {
      REQUIRE(*d * q == p);  // certified
    } else {
      ++rejected;
    }
  }
  REQUIRE(rejected > 0);  // random pairs are mostly not divisible
}

TEST_CASE("units are exactly signed exponentials") {
  REQUIRE(kms::is_unit(expo({3, -2})));
  REQUIRE(kms::is_unit(-expo({0, 0})));
  REQUIRE_FALSE(kms::is_unit(LaurentPoly::zero(2)));
  REQUIRE_FALSE(kms::is_unit(LaurentPoly::one(2) + expo({1, 0})));
  REQUIRE_FALSE(kms::is_unit(LaurentPoly::monomial({1, 1}, 2)));

  std::mt19937 rng(107);
  for (int t = 0; t < 60; ++t) {
    LaurentPoly p = random_nonzero_poly(rng, 2, 3, -2, 2, 3);
    bool invertible = kms::divide_exact(LaurentPoly::one(2), p).has_value();
    REQUIRE(invertible == kms::is_unit(p));
    if (kms::is_unit(p)) {
      auto inv = kms::inverse_of_unit(p);
      REQUIRE(inv.has_value());
      REQUIRE(*inv * p == LaurentPoly::one(2));
    }
  }
}

TEST_CASE("substitution") {
  std::mt19937 rng(108);
  kms::IntMat id = kms::IntMat::identity(2);
  for (int t = 0; t < 20; ++t) {
    LaurentPoly p = random_poly(rng, 2, 5, -4, 4, 7);
    REQUIRE(kms::substitute(p, id) == p);
  }

  // rank-one reflection: e^w -> e^{-w}
  kms::IntMat refl{{-1}};
  REQUIRE(kms::substitute(expo({1}), refl) == expo({-1}));

  for (int t = 0; t < 30; ++t) {
    kms::IntMat f(2, 2);
    std::uniform_int_distribution<int> d(-3, 3);
    for (auto& v : f.data) v = d(rng);
    LaurentPoly p = random_poly(rng, 2, 4, -3, 3, 5);
    LaurentPoly q = random_poly(rng, 2, 4, -3, 3, 5);
    REQUIRE(kms::substitute(p * q, f) == kms::substitute(p, f) * kms::substitute(q, f));
    REQUIRE(kms::substitute(p + q, f) == kms::substitute(p, f) + kms::substitute(q, f));
  }
}

TEST_CASE("quotient ring structure") {
  kms::QuotientInfo z = kms::quotient_is_reduced(3, {0, 0, 0});
  REQUIRE(z.reduced);
  REQUIRE(z.torsion == 0);
  REQUIRE(z.free_rank == 3);

  kms::QuotientInfo q = kms::quotient_is_reduced(2, {2, 0});
  REQUIRE(q.reduced);
  REQUIRE(q.torsion == 2);
  REQUIRE(q.free_rank == 1);

  std::mt19937 rng(109);
  for (int t = 0; t < 50; ++t) {
    std::size_t rank = 1 + rng() % 4;
    LatticePoint lambda(rank);
    std::uniform_int_distribution<int> d(-6, 6);
    for (auto& v : lambda) v = d(rng);
    kms::QuotientInfo info = kms::quotient_is_reduced(rank, lambda);
    REQUIRE(info.reduced);
    if (kms::point_is_zero(lambda)) {
      REQUIRE(info.torsion == 0);
      REQUIRE(info.free_rank == rank);
    } else {
      mpz_class g = 0;
      for (auto v : lambda) g = gcd(g, mpz_class(v));
      REQUIRE(info.torsion == g);
      REQUIRE(info.free_rank == rank - 1);
    }
  }
}
