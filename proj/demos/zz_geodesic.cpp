// Penalty-metric length of exp(-i pi/4 ZZ) on two qubits.
#include <qgeom/qgeom.hpp>

#include <cstdio>
#include <numbers>

int main()
{
  const auto metric = qgeom::penalty_weights(2, "standard");
  const auto target = qgeom::HermitianCoeffs::from_terms(2, {{"ZZ", std::numbers::pi / 4}});
  const auto geo    = qgeom::pauli_geodesic(metric, target);
  std::printf("length %.12f (measured %.12f)\n", geo.length, geo.measured_length);
  std::printf("el residual %.3e\n", geo.el_residual);
}
