// Walkthrough: wall-crossing complexes, convolution, and minimization.
//
//   g++ -std=c++20 -O2 -I ../include -I ../vendor complex_walkthrough.cpp -lgmpxx -lgmp

#include <iostream>

#include "kms/complex.hpp"
#include "kms/json_io.hpp"

using namespace kms;

static void describe(const RootDatum& d, const char* label, const ChainComplex& c) {
  std::cout << label << ":";
  for (const auto& [k, sum] : c.objects) {
    std::cout << "  [" << k << "]";
    for (const BimoduleObject& o : sum.parts)
      std::cout << " " << object_to_json(d, o).dump();
  }
  std::cout << "\n";
}

int main() {
  SBimContext ctx(RootDatum(Lattice(1), {"s"}, {{2}}, {{1}}));
  const RootDatum& d = ctx.datum();

  // the one-letter standard complex and its costandard partner
  ChainComplex delta = rouquier_deltas(ctx, {0});
  ChainComplex nabla = rouquier_nablas(ctx, {0});
  describe(d, "delta", delta);
  describe(d, "nabla", nabla);

  // their convolution is homotopy equivalent to the unit; Gaussian
  // elimination contracts it and returns an exactly verifiable certificate
  ChainComplex prod = tensor_complex(ctx, delta, nabla);
  describe(d, "delta * nabla", prod);
  MinimizationResult m = gaussian_eliminate(ctx, prod);
  describe(d, "minimized", m.minimized);
  std::cout << "certificate verified: "
            << (verify_certificate(ctx, prod, m.minimized, m.cert) ? "yes" : "no") << "\n";
  std::cout << "contracts to the unit: " << (is_unit_complex(ctx, prod) ? "yes" : "no")
            << "\n";

  // duality swaps the two kinds of complex up to isomorphism
  ChainComplex md = gaussian_eliminate(ctx, dualize_complex(ctx, delta)).minimized;
  std::cout << "dual(delta) ~ nabla: "
            << (find_chain_isomorphism(ctx, md, nabla) ? "yes" : "no") << "\n";
  return 0;
}
