// Closure of {XI, IX, ZI, IZ} and its split into two su(2) factors.
#include <qgeom/qgeom.hpp>

#include <cstdio>

int main()
{
  using qgeom::HermitianCoeffs;
  std::vector<HermitianCoeffs> gens;
  for (const char * s : {"XI", "IX", "ZI", "IZ"}) { gens.push_back(HermitianCoeffs::from_terms(2, {{s, 1.0}})); }

  const auto dla = qgeom::lie_closure(gens, 64);
  std::printf("dim %zu\n", dla.dim());
  for (const auto & b : dla.basis) {
    for (const auto & [k, c] : b.terms()) { std::printf("  %+.3f %s", c, qgeom::pauli_from_index(k, 2).str().c_str()); }
    std::printf("\n");
  }

  const auto dec = qgeom::ideal_decomposition(dla);
  std::printf("center %zu, ideals:", dec.center.dim());
  for (auto d : dec.ideal_dims()) { std::printf(" %zu", d); }
  std::printf("\n");
}
