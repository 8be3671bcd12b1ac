// Walkthrough: root data, Weyl groups, and Demazure operators.
//
//   g++ -std=c++20 -O2 -I ../include -I ../vendor demazure_walkthrough.cpp -lgmpxx -lgmp

#include <iostream>

#include "kms/demazure.hpp"
#include "kms/json_io.hpp"

using namespace kms;

int main() {
  // rank-one simply-connected datum: X = Z, root 2, coroot pairing 1
  RootDatum sl2(Lattice(1), {"s"}, {{2}}, {{1}});
  require_valid(sl2);

  // the affine extension with a loop-rotation coordinate appended
  RootDatum affine = affinize(sl2, AffinizeMode::loop_rotation);
  std::cout << "affine datum: " << datum_to_json(affine).dump() << "\n";
  std::cout << "dual datum:   " << datum_to_json(langlands_dual(affine)).dump() << "\n";

  // the affine Weyl group is infinite dihedral; list the short elements
  WeylGroup w(affine);
  std::cout << "elements of length <= 3:";
  for (const WeylElement& x : w.enumerate(3))
    std::cout << " " << weyl_key(affine, x);
  std::cout << "\n";

  // Demazure operator at the finite node: D(p) = (p - e^{-a} s(p)) / (1 - e^{-a})
  DemazureContext ctx = make_demazure_context(sl2, 0);
  LaurentPoly p = LaurentPoly::exponential({3});  // e^{3w} for the weight w = 1
  LaurentPoly dp = demazure(ctx, p);
  std::cout << "D(e^3)  = " << poly_to_json(dp).dump() << "\n";
  std::cout << "  invariant: " << (is_invariant(ctx, dp) ? "yes" : "no") << "\n";

  // D and its complement decompose the ring; the splitting p = a + e^w b
  // rewrites p over the invariant subring
  LaurentPoly rest = demazure_minus(ctx, p);
  std::cout << "D^-(e^3) = " << poly_to_json(rest).dump() << "\n";
  auto [a, b] = ps_split(ctx, p);
  std::cout << "split: a = " << poly_to_json(a).dump()
            << ", b = " << poly_to_json(b).dump() << "\n";
  std::cout << "  reassembled: "
            << ((a + LaurentPoly::exponential(*ctx.varpi) * b == p) ? "ok" : "BROKEN")
            << "\n";
  return 0;
}
