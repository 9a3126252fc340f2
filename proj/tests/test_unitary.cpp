#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "qgeom/haar.hpp"
#include "qgeom/unitary.hpp"

using namespace qgeom;
using std::numbers::pi;

namespace {

HermitianCoeffs h1(const char * s, double c) { return HermitianCoeffs::from_terms(unsigned(std::strlen(s)), {{s, c}}); }

double max_abs(const DenseMatrix & m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Exponential, Basics)
{
  const auto u = su_exp(h1("Z", 1.0), pi / 2);
  EXPECT_NEAR(std::abs(u.matrix()(0, 0) - std::polar(1.0, -pi / 2)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(u.matrix()(1, 1) - std::polar(1.0, pi / 2)), 0.0, 1e-15);
  const auto h = HermitianCoeffs::from_terms(2, {{"XY", 0.3}, {"ZI", -0.7}});
  EXPECT_LT(max_abs((su_exp(h, 0.8) * su_exp(h, -0.8)).matrix() - DenseMatrix::Identity(4, 4)), 1e-12);
  EXPECT_LT(max_abs(su_exp(h, 0.0).matrix() - DenseMatrix::Identity(4, 4)), 1e-15);
  EXPECT_LT(max_abs(su_exp(h, 0.8).matrix() - oracle::expm_hermitian(materialize(h), 0.8)), 1e-12);
}

TEST(Logarithm, RoundTripAndBranch)
{
  EXPECT_TRUE(su_log(UnitaryMatrix::identity(2)).empty());
  const auto x = su_log(su_exp(h1("X", pi / 4)));
  EXPECT_NEAR(x["X"], pi / 4, 1e-10);
  EXPECT_EQ(x.size(), 1u);
  try {
    su_log(su_exp(h1("Z", pi)));
    FAIL() << "expected branch error";
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numerical);
    EXPECT_NE(std::string(e.what()).find("eigenphase"), std::string::npos) << e.what();
  }
}

TEST(Logarithm, HaarSurjectivityProbe)
{
  const RngStream master(31, 0);
  int checked = 0;
  for (std::uint64_t i = 0; checked < 50; ++i) {
    auto rng = master.substream(i);
    const UnitaryMatrix u(haar_special_unitary(4, rng));
    Eigen::ComplexEigenSolver<DenseMatrix> es(u.matrix());
    if ((es.eigenvalues().array().arg().abs() > pi - 1e-3).any()) { continue; }
    ++checked;
    EXPECT_LT(max_abs(su_exp(su_log(u)).matrix() - u.matrix()), 1e-8);
  }
}

TEST(Charts, PauliAndAdapted)
{
  const auto q = pauli_chart(su_exp(h1("X", pi / 8)));
  EXPECT_NEAR(q["X"], pi / 8, 1e-12);
  const auto anchor = su_exp(HermitianCoeffs::from_terms(2, {{"XY", 0.4}, {"ZZ", 0.2}}));
  EXPECT_TRUE(u_adapted_chart(anchor, anchor).pruned(1e-12).empty());
  const auto v = su_exp(h1("ZI", 0.3)) * anchor;
  const auto r = u_adapted_chart(anchor, v);
  EXPECT_NEAR(r["ZI"], 0.3, 1e-12);
  EXPECT_NEAR(hs_norm(r), 0.3, 1e-12);
}

TEST(CurveHamiltonian, RecoversGeneratorAtSecondOrder)
{
  const auto h0 = HermitianCoeffs::from_terms(2, {{"XZ", 0.7}, {"YI", -0.4}, {"ZZ", 0.25}});
  const auto m  = materialize(h0);
  const auto error_at = [&](std::size_t steps) {
    const auto c = sample_curve([&](double l) { return UnitaryMatrix(oracle::expm_hermitian(m, l)); }, uniform_grid(0, 1, steps));
    double e     = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) { e = std::max(e, hs_norm(curve_hamiltonian(c, i) - h0)); }
    return e;
  };
  const double coarse = error_at(40), fine = error_at(80);
  EXPECT_LT(coarse, 1e-2);
  EXPECT_GT(coarse / fine, 3.5);
  const auto flat = sample_curve([](double) { return UnitaryMatrix::identity(1); }, uniform_grid(0, 1, 4));
  EXPECT_TRUE(curve_hamiltonian(flat, 2).pruned().empty());
}

TEST(CurveHamiltonian, FlagsCoarseGrid)
{
  RngStream rng(33, 0);
  const auto c = sample_curve([&](double) { return UnitaryMatrix(haar_unitary(2, rng)); }, uniform_grid(0, 3, 3));
  EXPECT_THROW(curve_hamiltonian(c, 1), Error);
}

TEST(Dyson, ClosedForms)
{
  const auto h   = HermitianCoeffs::from_terms(2, {{"XY", 0.5}, {"ZI", 0.3}});
  const auto grd = uniform_grid(0, 1, 50);
  const auto c   = dyson_propagate([&](double) { return h; }, grd);
  for (std::size_t i = 0; i < c.size(); ++i) { EXPECT_LT(max_abs(c.points[i].matrix() - su_exp(h, grd[i]).matrix()), 1e-8); }

  // f(l) Z with f = cos: integral sin(l)
  const auto d = dyson_propagate([](double l) { return h1("Z", std::cos(l)); }, uniform_grid(0, 2, 100));
  EXPECT_LT(max_abs(d.points.back().matrix() - su_exp(h1("Z", std::sin(2.0))).matrix()), 1e-8);

  // Z on [0,1], X on [1,2]; grid node at the switch
  const auto seg = dyson_propagate([](double l) { return l < 1.0 ? h1("Z", 1.0) : h1("X", 1.0); }, uniform_grid(0, 2, 2));
  EXPECT_LT(max_abs(seg.points.back().matrix() - (su_exp(h1("X", 1.0)) * su_exp(h1("Z", 1.0))).matrix()), 1e-8);
}

TEST(Dyson, FourthOrderConvergence)
{
  const auto sched = [](double l) { return HermitianCoeffs::from_terms(1, {{"X", std::cos(2 * l)}, {"Z", 1.0 + l}}); };
  const auto ref   = dyson_propagate(sched, uniform_grid(0, 1, 2048)).points.back().matrix();
  double prev      = 0.0;
  for (std::size_t steps : {8, 16, 32}) {
    const double e = max_abs(dyson_propagate(sched, uniform_grid(0, 1, steps)).points.back().matrix() - ref);
    if (prev > 0) { EXPECT_GT(prev / e, 4.0); }
    prev = e;
  }
  const double mid_c = max_abs(dyson_propagate(sched, uniform_grid(0, 1, 16), DysonMethod::Midpoint).points.back().matrix() - ref);
  const double mid_f = max_abs(dyson_propagate(sched, uniform_grid(0, 1, 32), DysonMethod::Midpoint).points.back().matrix() - ref);
  EXPECT_GT(mid_c / mid_f, 3.5);
}

TEST(Bch, CommutingAndFirstOrder)
{
  const auto q    = HermitianCoeffs::from_terms(2, {{"ZI", 0.3}, {"ZZ", 0.1}});
  const auto qdot = HermitianCoeffs::from_terms(2, {{"IZ", 0.7}, {"ZI", -0.2}});
  for (int order : {0, 1, 5, 20}) { EXPECT_LT(hs_norm(bch_hamiltonian(q, qdot, order) - qdot), 1e-15); }
  const double a = 0.4, b = 0.9;
  const auto h   = bch_hamiltonian(h1("Z", a), h1("X", b), 1);
  EXPECT_NEAR(h["X"], b, 1e-15);
  EXPECT_NEAR(h["Y"], a * b, 1e-15);
  EXPECT_EQ(h.size(), 2u);
}

TEST(Bch, MatchesFrameChangeOracle)
{
  RngStream rng(32, 0);
  for (int t = 0; t < 10; ++t) {
    const unsigned n = 1 + unsigned(t % 3);
    HermitianCoeffs q(n), qd(n);
    for (std::uint64_t k = 1; k < pauli_count(n); ++k) {
      q.add(k, rng.normal());
      qd.add(k, rng.normal());
    }
    q  = (0.5 * rng.uniform() / hs_norm(q)) * q;
    qd = (0.5 * rng.uniform() / hs_norm(qd)) * qd;
    const auto ref = oracle::frame_change(materialize(q), materialize(qd));
    EXPECT_LT(max_abs(materialize(bch_hamiltonian(q, qd, 12)) - ref), 1e-6);
  }
}
