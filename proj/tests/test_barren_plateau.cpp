#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "oracles.hpp"
#include "qgeom/barren_plateau.hpp"

using namespace qgeom;
using std::numbers::pi;

namespace {

HermitianCoeffs terms(unsigned n, std::vector<std::pair<std::string, double>> t) { return HermitianCoeffs::from_terms(n, t); }

AnsatzSpec spec_of(unsigned n, std::initializer_list<const char *> gens, std::size_t layers)
{
  AnsatzSpec s{n, {}, layers, {}};
  for (const char * g : gens) { s.generators.push_back(terms(n, {{g, 1.0}})); }
  return s;
}

const AnsatzSpec kUniversal = spec_of(2, {"XI", "IX", "ZI", "IZ", "ZZ"}, 1);

LossTask zero_task(unsigned n, const char * obs) { return LossTask::make(computational_zero(n), oracle::pauli(obs)); }

double max_abs(const DenseMatrix & m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Period, Examples)
{
  EXPECT_NEAR(fundamental_period(terms(2, {{"XY", 1.0}})), 2 * pi, 1e-12);
  EXPECT_NEAR(fundamental_period(terms(2, {{"ZI", 1.0}, {"IZ", 1.0}})), pi, 1e-12);
  const double s = 1 + std::numbers::sqrt2;
  EXPECT_NEAR(fundamental_period(terms(1, {{"Z", s}})), 2 * pi / s, 1e-12);
  EXPECT_NEAR(fundamental_period(terms(2, {{"ZI", 0.5}, {"IZ", 1.5}})), 2 * pi, 1e-12);
  EXPECT_THROW(fundamental_period(HermitianCoeffs(2)), Error);
  EXPECT_THROW(fundamental_period(terms(2, {{"ZI", 1.0}, {"IZ", std::numbers::sqrt2}})), Error);
}

TEST(Ansatz, PeriodsResolvedOrGiven)
{
  auto s = spec_of(2, {"XI", "ZZ"}, 3);
  s.generators[1] = terms(2, {{"ZI", 1.0}, {"IZ", 1.0}});
  const Ansatz a(s);
  EXPECT_NEAR(a.periods()[0], 2 * pi, 1e-12);
  EXPECT_NEAR(a.periods()[1], pi, 1e-12);
  EXPECT_FALSE(a.pauli_generators());
  s.periods = {std::nullopt, 1.5};
  EXPECT_EQ(Ansatz(s).periods()[1], 1.5);
  s.periods = {1.0};
  EXPECT_THROW((Ansatz(s)), Error);
  s.layers  = 0;
  s.periods = {};
  EXPECT_THROW((Ansatz(s)), Error);
}

TEST(Ansatz, UniformParameters)
{
  const Ansatz a(spec_of(1, {"Z"}, 1));
  const RngStream master(51, 0);
  std::vector<double> xs;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto rng = master.substream(i);
    xs.push_back(sample_parameters(a, rng)[0] / (2 * pi));
  }
  std::sort(xs.begin(), xs.end());
  double ks = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ks = std::max({ks, std::abs(xs[i] - double(i) / 1e4), std::abs(xs[i] - double(i + 1) / 1e4)});
  }
  EXPECT_LT(ks, 1.628 / 100.0);
  EXPECT_GE(xs.front(), 0.0);
  EXPECT_LT(xs.back(), 1.0);

  RngStream r1(52, 0), r2(52, 0), r3(53, 0);
  MomentAccumulator p, q;
  double cross = 0;
  for (int i = 0; i < 10000; ++i) {
    const double x = sample_parameters(a, r1)[0], y = sample_parameters(a, r2)[0];
    EXPECT_EQ(x, y);
    const double z = sample_parameters(a, r3)[0];
    p.push(x);
    q.push(z);
    cross += (x - pi) * (z - pi);
  }
  EXPECT_LT(std::abs(cross / 10000 / std::sqrt(p.variance() * q.variance())), 0.05);
}

TEST(Ansatz, BuildUnitary)
{
  const Ansatz a(kUniversal);
  EXPECT_LT(max_abs(build_unitary(a, std::vector<double>(5, 0.0)).matrix() - DenseMatrix::Identity(4, 4)), 1e-15);
  EXPECT_THROW(build_unitary(a, std::vector<double>(4, 0.0)), Error);

  // one factor is exp(+i theta H)
  const auto h = terms(2, {{"XY", 0.3}, {"ZI", 0.8}});
  const Ansatz one(AnsatzSpec{2, {h}, 1, {1.0}});
  EXPECT_LT(max_abs(build_unitary(one, {0.7}).matrix() - oracle::expm_hermitian(materialize(h), -0.7)), 1e-12);

  // ordering: first factor leftmost
  const Ansatz two(spec_of(1, {"X", "Z"}, 2));
  const std::vector<double> th{0.3, 0.5, 0.7, 1.1};
  const oracle::Mat x = oracle::pauli("X"), z = oracle::pauli("Z");
  const oracle::Mat ref = oracle::expm_hermitian(x, -0.3) * oracle::expm_hermitian(z, -0.5) * oracle::expm_hermitian(x, -0.7)
                          * oracle::expm_hermitian(z, -1.1);
  const DenseMatrix u = build_unitary(two, th).matrix();
  EXPECT_LT(max_abs(u - ref), 1e-12);
  const oracle::Mat merged = oracle::expm_hermitian(x, -1.0) * oracle::expm_hermitian(z, -1.6);
  EXPECT_GT(max_abs(u - merged), 1e-3);
}

TEST(Loss, Examples)
{
  const auto task = zero_task(1, "Z");
  EXPECT_NEAR(loss(UnitaryMatrix::identity(1), task), 1.0, 1e-15);
  EXPECT_NEAR(loss(UnitaryMatrix(oracle::expm_hermitian(oracle::pauli("Y"), pi / 4)), task), 0.0, 1e-12);
  const auto mixed = LossTask::make(0.25 * DenseMatrix::Identity(4, 4), materialize(terms(2, {{"ZX", 0.4}, {"II", 2.0}})));
  RngStream rng(54, 0);
  const Ansatz a(kUniversal);
  for (int t = 0; t < 5; ++t) { EXPECT_NEAR(loss(build_unitary(a, sample_parameters(a, rng)), mixed), 2.0, 1e-12); }
}

TEST(Loss, TaskValidation)
{
  EXPECT_THROW(LossTask::make(DenseMatrix::Identity(2, 2), oracle::pauli("Z")), Error);
  DenseMatrix neg = DenseMatrix::Zero(2, 2);
  neg(0, 0)       = 1.5;
  neg(1, 1)       = -0.5;
  EXPECT_THROW(LossTask::make(neg, oracle::pauli("Z")), Error);
  EXPECT_THROW(LossTask::make(computational_zero(1), oracle::pauli("ZZ")), Error);
  DenseMatrix nh = oracle::pauli("X");
  nh(0, 1)       = 2.0;
  EXPECT_THROW(LossTask::make(computational_zero(1), nh), Error);
}

TEST(Loss, PauliTransferMatchesDense)
{
  RngStream rng(55, 0);
  const Ansatz a(spec_of(3, {"XXI", "IYZ", "ZIX", "YII"}, 3));
  const auto task = LossTask::make(computational_zero(3), materialize(terms(3, {{"ZII", 0.7}, {"XYZ", -0.3}, {"IIX", 0.2}})));
  const LossEvaluator fast(a, task);
  ASSERT_TRUE(fast.uses_pauli_transfer());
  std::vector<double> work;
  for (int t = 0; t < 20; ++t) {
    const auto th = sample_parameters(a, rng);
    EXPECT_NEAR(fast(th, work), loss(build_unitary(a, th), task), 1e-12);
  }
}

TEST(Variance, StructuralZeros)
{
  const Ansatz z(spec_of(1, {"Z"}, 4));
  const auto r = estimate_variance(z, zero_task(1, "Z"), 1000, 1);
  EXPECT_EQ(r.variance, 0.0);
  EXPECT_EQ(r.mean, 1.0);
  const Ansatz u(kUniversal);
  const auto id = estimate_variance(u, LossTask::make(computational_zero(2), DenseMatrix::Identity(4, 4)), 1000, 1);
  EXPECT_EQ(id.variance, 0.0);
  EXPECT_THROW(estimate_variance(z, zero_task(1, "Z"), 99, 1), Error);
}

TEST(Variance, DeterministicAndShiftInvariant)
{
  const Ansatz a(spec_of(2, {"XI", "IX", "ZI", "IZ", "ZZ"}, 4));
  const auto task = zero_task(2, "ZI");
  const auto one  = estimate_variance(a, task, 3000, 9, 1);
  const auto many = estimate_variance(a, task, 3000, 9, 4);
  EXPECT_EQ(one.mean, many.mean);
  EXPECT_EQ(one.variance, many.variance);
  EXPECT_EQ(one.variance_se, many.variance_se);
  EXPECT_GT(one.variance_se, 0.0);

  const auto shifted = LossTask::make(computational_zero(2), materialize(terms(2, {{"ZI", 1.0}, {"II", 0.75}})));
  const auto base    = sample_losses(a, task, 200, 9);
  const auto moved   = sample_losses(a, shifted, 200, 9);
  for (std::size_t i = 0; i < base.size(); ++i) { EXPECT_NEAR(moved[i] - base[i], 0.75, 1e-12); }
  const auto scaled = sample_losses(a, LossTask::make(computational_zero(2), 2.5 * oracle::pauli("ZI")), 200, 9);
  for (std::size_t i = 0; i < base.size(); ++i) { EXPECT_NEAR(scaled[i], 2.5 * base[i], 1e-12); }
}

TEST(Variance, TheoryForUniversalAnsatz)
{
  const auto dec = ideal_decomposition(lie_closure(kUniversal.generators, 16));
  const auto th  = theoretical_variance(dec, zero_task(2, "ZI"));
  EXPECT_NEAR(th.value, 0.2, 1e-12);
  ASSERT_EQ(th.table.size(), 1u);
  EXPECT_EQ(th.table[0].dim, 15u);
  EXPECT_NEAR(th.table[0].rho_purity, 0.75, 1e-12);
  EXPECT_NEAR(th.table[0].observable_purity, 4.0, 1e-12);
  EXPECT_TRUE(th.rho_in_g);
  EXPECT_TRUE(th.observable_in_g);

  const auto scaled = theoretical_variance(dec, LossTask::make(computational_zero(2), 3.0 * oracle::pauli("ZI")));
  EXPECT_NEAR(scaled.value, 9 * 0.2, 1e-12);
  EXPECT_NEAR(theoretical_variance(dec, LossTask::make(0.25 * DenseMatrix::Identity(4, 4), oracle::pauli("ZI"))).value, 0.0, 1e-15);

  // moderate depth already sits close to the 2-design value
  const Ansatz a(AnsatzSpec{kUniversal.n, kUniversal.generators, 16, {}});
  const auto r = estimate_variance(a, zero_task(2, "ZI"), 20000, 3);
  EXPECT_LT(std::abs(r.variance - 0.2), 5 * r.variance_se);
}

TEST(Variance, ObservableOutsideAlgebra)
{
  const auto dec = ideal_decomposition(lie_closure({terms(2, {{"XI", 1}}), terms(2, {{"YI", 1}})}, 16));
  const auto th  = theoretical_variance(dec, zero_task(2, "IX"));
  EXPECT_EQ(th.value, 0.0);
  EXPECT_FALSE(th.observable_in_g);
  EXPECT_NEAR(th.observable_residual, 1.0, 1e-12);
}

TEST(Moments, FirstOrderTwirls)
{
  const auto x = moment_operator_haar(2, 1, oracle::pauli("X"), 10000, 5);
  EXPECT_LT(x.max_deviation_in_se(DenseMatrix::Zero(2, 2)), 5.0);
  const auto id = moment_operator_haar(2, 1, DenseMatrix::Identity(2, 2), 100, 5);
  EXPECT_EQ(id.mean, DenseMatrix::Identity(2, 2));
  const Ansatz z(spec_of(1, {"Z"}, 1));
  const auto zx = moment_operator_ensemble(z, 1, oracle::pauli("X"), 10000, 6);
  EXPECT_LT(zx.max_deviation_in_se(DenseMatrix::Zero(2, 2)), 5.0);
  EXPECT_THROW(moment_operator_haar(16, 4, DenseMatrix::Zero(65536, 1), 100, 1), Error);
  EXPECT_THROW(moment_operator_haar(2, 1, oracle::pauli("X"), 99, 1), Error);
}

TEST(Moments, HaarSecondMomentOfSwap)
{
  // the swap commutes with U (x) U, so it is fixed by every sample
  oracle::Mat swap = oracle::Mat::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
  const auto s = moment_operator_haar(2, 2, swap, 200, 7);
  EXPECT_LT(max_abs(s.mean - swap), 1e-12);
}

TEST(TwoDesign, AbelianAgainstItself)
{
  const Ansatz z(spec_of(1, {"Z"}, 2));
  oracle::Mat plus = oracle::Mat::Constant(2, 2, 0.5);
  const auto rep   = two_design_distance(z, 4000, {oracle::kron(plus, plus)}, 8);
  EXPECT_FALSE(rep.haar_reference);
  EXPECT_EQ(rep.reference_layers, 8u);
  EXPECT_LT(rep.distance, 3 * rep.noise_floor + 1e-12);
  const Ansatz big(spec_of(5, {"ZIIII"}, 1));
  EXPECT_THROW(two_design_distance(big, 400, {DenseMatrix::Zero(1024, 1024)}, 1), Error);
}

TEST(TwoDesign, GapAndDistanceShrinkWithDepth)
{
  const auto task  = zero_task(2, "ZI");
  const auto probe = oracle::kron(oracle::pauli("ZI"), oracle::pauli("ZI"));
  double prev_gap = 1e9, prev_gap_se = 0.0, prev_dist = 1e9, prev_floor = 0.0, first_dist = 0.0;
  for (std::size_t layers : {1u, 4u, 16u}) {
    const Ansatz a(AnsatzSpec{kUniversal.n, kUniversal.generators, layers, {}});
    const auto r    = estimate_variance(a, task, 20000, 17);
    const double gap = std::abs(r.variance - 0.2);
    EXPECT_LE(gap, prev_gap + 5 * (r.variance_se + prev_gap_se)) << "layers " << layers;
    const auto td = two_design_distance(a, 4000, {probe}, 19);
    EXPECT_TRUE(td.haar_reference);
    if (layers == 1) { first_dist = td.distance; }
    EXPECT_LE(td.distance, prev_dist + 5 * (td.noise_floor + prev_floor)) << "layers " << layers;
    prev_gap = gap, prev_gap_se = r.variance_se, prev_dist = td.distance, prev_floor = td.noise_floor;
  }
  EXPECT_LT(prev_gap, 5 * prev_gap_se);
  EXPECT_GT(first_dist, prev_dist + 5 * prev_floor);
}
