#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "qgeom/complexity.hpp"
#include "qgeom/haar.hpp"

using namespace qgeom;
using std::numbers::pi;

namespace {

HermitianCoeffs terms(unsigned n, std::vector<std::pair<std::string, double>> t) { return HermitianCoeffs::from_terms(n, t); }

UnitaryCurve line(const HermitianCoeffs & x, std::size_t steps, double t = 1.0)
{
  const auto m = materialize(x);
  return sample_curve([&](double l) { return UnitaryMatrix(oracle::expm_hermitian(m, t * l)); }, uniform_grid(0, 1, steps));
}

}  // namespace

TEST(Penalty, StandardScheme)
{
  const auto m2 = penalty_weights(2, "standard");
  for (std::uint64_t k = 1; k < pauli_count(2); ++k) { EXPECT_EQ(m2.weight(k), 1.0); }
  EXPECT_THROW(m2.weight(0), Error);
  const auto m3 = penalty_weights(3, "standard");
  EXPECT_EQ(m3.weight(PauliString::parse("XXX").index()), 4096.0);
  EXPECT_EQ(m3.weight(PauliString::parse("ZZI").index()), 1.0);
  EXPECT_THROW(penalty_weights(2, "heavy"), Error);
}

TEST(Penalty, NormProperties)
{
  const auto m3 = penalty_weights(3, "standard");
  EXPECT_EQ(finsler_norm(m3, HermitianCoeffs(3)), 0.0);
  EXPECT_NEAR(finsler_norm(m3, terms(3, {{"XXX", -0.02}})), 64 * 0.02, 1e-15);
  EXPECT_THROW(finsler_norm(m3, terms(3, {{"III", 1.0}})), Error);
  RngStream rng(41, 0);
  for (int t = 0; t < 50; ++t) {
    HermitianCoeffs a(3), b(3);
    for (std::uint64_t k = 1; k < pauli_count(3); ++k) {
      a.add(k, rng.normal());
      b.add(k, rng.normal());
    }
    EXPECT_NEAR(finsler_norm(m3, 2.5 * a), 2.5 * finsler_norm(m3, a), 1e-9 * finsler_norm(m3, a));
    EXPECT_LE(finsler_norm(m3, a + b), finsler_norm(m3, a) + finsler_norm(m3, b) + 1e-9);
    HermitianCoeffs flipped = a;
    for (const auto & [k, c] : a.terms()) {
      if (k % 3 == 0) { flipped.set(k, -c); }
    }
    EXPECT_DOUBLE_EQ(finsler_norm(m3, flipped), finsler_norm(m3, a));
  }
}

TEST(Length, StraightLinesAndReparametrization)
{
  const auto m2 = penalty_weights(2, "standard");
  const auto zz = terms(2, {{"ZZ", pi / 4}});
  EXPECT_NEAR(curve_length(m2, line(zz, 1000)), pi / 4, 1e-6);
  const auto flat = sample_curve([](double) { return UnitaryMatrix::identity(2); }, uniform_grid(0, 1, 10));
  EXPECT_EQ(curve_length(m2, flat), 0.0);
  const auto mz = materialize(zz);
  const auto sq = sample_curve([&](double l) { return UnitaryMatrix(oracle::expm_hermitian(mz, l * l)); }, uniform_grid(0, 1, 4000));
  EXPECT_NEAR(curve_length(m2, sq), pi / 4, 1e-4);
  const auto x = terms(2, {{"XY", 0.4}, {"ZI", 0.3}, {"XZ", -0.2}});
  const double full = curve_length(m2, line(x, 400));
  for (double t : {0.25, 0.5, 0.9}) { EXPECT_NEAR(curve_length(m2, line(x, 400, t)), t * full, 1e-6); }
}

TEST(Length, RightInvariance)
{
  const auto m2 = penalty_weights(2, "standard");
  RngStream rng(42, 0);
  const auto sched = [](double l) { return terms(2, {{"XI", std::cos(l)}, {"ZZ", 0.5}, {"IY", l}}); };
  const auto c     = dyson_propagate(sched, uniform_grid(0, 1, 400));
  const double len = curve_length(m2, c);
  for (int t = 0; t < 3; ++t) {
    const UnitaryMatrix w(haar_unitary(4, rng));
    EXPECT_NEAR(curve_length(m2, c.right_translated(w)), len, 1e-6);
  }
}

TEST(Support, CommutingSets)
{
  EXPECT_TRUE(stabilizer_support(terms(2, {{"ZI", 0.3}, {"IZ", 0.2}, {"ZZ", 0.1}})).commuting);
  const auto bad = stabilizer_support(terms(1, {{"X", 0.3}, {"Z", 0.2}}));
  EXPECT_FALSE(bad.commuting);
  ASSERT_TRUE(bad.offending.has_value());
  EXPECT_EQ(bad.offending->first.str(), "X");
  EXPECT_EQ(bad.offending->second.str(), "Z");
  const auto xxzz = terms(2, {{"XX", 0.3}, {"ZZ", 0.2}});
  EXPECT_TRUE(stabilizer_support(xxzz).commuting);
  const oracle::Mat a = oracle::pauli("XX"), b = oracle::pauli("ZZ");
  EXPECT_LT((a * b - b * a).norm(), 1e-15);
}

TEST(Geodesic, PauliGeodesics)
{
  const auto m2 = penalty_weights(2, "standard");
  const auto r  = pauli_geodesic(m2, terms(2, {{"ZZ", pi / 4}}));
  EXPECT_NEAR(r.length, pi / 4, 1e-12);
  EXPECT_NEAR(r.measured_length, pi / 4, 1e-6);
  EXPECT_LT(r.el_residual, 1e-6);
  EXPECT_EQ(r.curve.size(), 1001u);
  EXPECT_TRUE(r.curve.identity_anchored());

  const auto zero = pauli_geodesic(m2, HermitianCoeffs(2), 10);
  EXPECT_EQ(zero.length, 0.0);
  EXPECT_EQ(zero.measured_length, 0.0);

  try {
    pauli_geodesic(penalty_weights(1, "standard"), terms(1, {{"X", 0.3}, {"Z", 0.2}}));
    FAIL();
  } catch (const Error & e) {
    EXPECT_NE(std::string(e.what()).find("X and Z"), std::string::npos) << e.what();
  }
  EXPECT_THROW(pauli_geodesic(m2, terms(2, {{"ZZ", 3.2}})), Error);

  const double alpha = 0.01;
  const auto r3      = pauli_geodesic(penalty_weights(3, "standard"), terms(3, {{"XXX", alpha}}), 200);
  EXPECT_NEAR(r3.length, 64 * alpha, 1e-12);
  EXPECT_NEAR(r3.measured_length, 64 * alpha, 1e-6);
}

TEST(Geodesic, EulerLagrangeResidualOfQuadraticPath)
{
  const auto m2 = penalty_weights(2, "standard");
  const double c = 0.3;
  const auto z   = materialize(terms(2, {{"ZZ", 1.0}}));
  const auto q   = sample_curve([&](double l) { return UnitaryMatrix(oracle::expm_hermitian(z, c * l * l)); }, uniform_grid(0, 1, 1000));
  EXPECT_NEAR(el_residual(m2, q), 2 * c, 1e-6);
  const auto flat = sample_curve([](double) { return UnitaryMatrix::identity(2); }, uniform_grid(0, 1, 10));
  EXPECT_EQ(el_residual(m2, flat), 0.0);
  const auto x    = materialize(terms(2, {{"XI", 1.0}}));
  const auto bent = sample_curve([&](double l) { return UnitaryMatrix(oracle::expm_hermitian(l * z + l * (1 - l) * x, 0.5)); },
                                 uniform_grid(0, 1, 100));
  EXPECT_THROW(el_residual(m2, bent), Error);
}

TEST(Geodesic, MinimalityProbe)
{
  const auto m2 = penalty_weights(2, "standard");
  const auto p  = minimality_probe(m2, terms(2, {{"ZZ", pi / 4}}), 6, 7);
  EXPECT_EQ(p.perturbed_lengths.size(), 6u);
  EXPECT_GE(p.margin, 0.0);
  const auto again = minimality_probe(m2, terms(2, {{"ZZ", pi / 4}}), 6, 7);
  EXPECT_EQ(p.perturbed_lengths, again.perturbed_lengths);
}
