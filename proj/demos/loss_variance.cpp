// Loss variance of a deep two-qubit ansatz against the Lie-algebraic prediction.
#include <qgeom/qgeom.hpp>

#include <cstdio>

int main()
{
  using qgeom::HermitianCoeffs;
  qgeom::AnsatzSpec spec;
  spec.n = 2;
  for (const char * s : {"XI", "IX", "ZI", "IZ", "ZZ"}) { spec.generators.push_back(HermitianCoeffs::from_terms(2, {{s, 1.0}})); }
  spec.layers = 32;
  const qgeom::Ansatz ansatz(spec);

  const auto task   = qgeom::LossTask::make(qgeom::computational_zero(2), qgeom::materialize(HermitianCoeffs::from_terms(2, {{"ZI", 1.0}})));
  const auto report = qgeom::estimate_variance(ansatz, task, 20000, 7);

  const auto dla    = qgeom::lie_closure(spec.generators, 256);
  const auto theory = qgeom::theoretical_variance(qgeom::ideal_decomposition(dla), task);
  std::printf("variance %.5f +- %.5f, predicted %.5f\n", report.variance, report.variance_se, theory.value);
}
