#pragma once

// Shared helpers for the test binaries: seeded random ring elements and a few
// shorthand constructors.

#include <random>

#include "kms/laurent.hpp"
#include "kms/root_datum.hpp"

namespace testsupport {

// X = Z with fundamental weight (1), root 2, coroot pairing 1
inline kms::RootDatum sl2_sc() {
  return kms::RootDatum(kms::Lattice(1), {"s1"}, {{2}}, {{1}});
}

// adjoint form: X = Z spanned by the root itself
inline kms::RootDatum pgl2() {
  return kms::RootDatum(kms::Lattice(1), {"s1"}, {{1}}, {{2}});
}

// rank-two simply-connected datum on the weight lattice
inline kms::RootDatum a2_sc() {
  return kms::RootDatum(kms::Lattice(2), {"s1", "s2"}, {{2, -1}, {-1, 2}},
                        {{1, 0}, {0, 1}});
}

// affine datum with rotation coordinate; generators s0, s1
inline kms::RootDatum affine_sl2() {
  return kms::affinize(sl2_sc(), kms::AffinizeMode::loop_rotation);
}

inline kms::LaurentPoly random_poly(std::mt19937& rng, std::size_t rank, int max_terms,
                                    int exp_lo, int exp_hi, int coeff_abs) {
  std::uniform_int_distribution<int> nterms(0, max_terms);
  std::uniform_int_distribution<int> expd(exp_lo, exp_hi);
  std::uniform_int_distribution<int> coeffd(-coeff_abs, coeff_abs);
  kms::LaurentPoly p(rank);
  int n = nterms(rng);
  for (int t = 0; t < n; ++t) {
    kms::LatticePoint e(rank);
    for (auto& x : e) x = expd(rng);
    p.add_term(e, coeffd(rng));
  }
  return p;
}

inline kms::LaurentPoly random_nonzero_poly(std::mt19937& rng, std::size_t rank,
                                            int max_terms, int exp_lo, int exp_hi,
                                            int coeff_abs) {
  for (;;) {
    kms::LaurentPoly p = random_poly(rng, rank, max_terms, exp_lo, exp_hi, coeff_abs);
    if (!p.is_zero()) return p;
  }
}

inline kms::LaurentPoly expo(std::initializer_list<std::int64_t> e) {
  return kms::LaurentPoly::exponential(kms::LatticePoint(e));
}

}  // namespace testsupport
