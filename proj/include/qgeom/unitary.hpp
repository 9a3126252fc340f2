#pragma once

/**
 * @file
 * @brief Dense SU(2^n) numerics: exponential, principal logarithm, charts, curves and frame changes.
 *
 * Sign convention throughout: U = exp(-i H) for Hermitian H, and a curve U(lambda) has the
 * Hamiltonian H(lambda) = i U'(lambda) U(lambda)^dagger, so that U' = -i H U.
 */

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qgeom/error.hpp"
#include "qgeom/pauli.hpp"

namespace qgeom {

/// Default distance of an eigenphase from the branch cut at pi before su_log refuses it.
inline constexpr double kDefaultBranchGuard = 1e-6;

/// Max entrywise |U U^dagger - 1|.
inline double unitarity_defect(const DenseMatrix & u)
{
  return (u * u.adjoint() - DenseMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

class UnitaryMatrix
{
public:
  UnitaryMatrix() = default;

  /// Wraps without checking; see checked().
  explicit UnitaryMatrix(DenseMatrix m) : m_(std::move(m)) { qubits_of_dimension(m_.rows()); }

  static UnitaryMatrix identity(unsigned n)
  {
    const auto d = static_cast<Eigen::Index>(dimension_of(n));
    return UnitaryMatrix(DenseMatrix::Identity(d, d));
  }

  static UnitaryMatrix checked(DenseMatrix m, double tol = 1e-10)
  {
    UnitaryMatrix u(std::move(m));
    if (const double d = unitarity_defect(u.m_); !(d <= tol)) {
      throw numerical_error("matrix is not unitary (defect " + std::to_string(d) + ")");
    }
    return u;
  }

  unsigned qubits() const { return qubits_of_dimension(m_.rows()); }
  const DenseMatrix & matrix() const { return m_; }
  DenseMatrix & matrix() { return m_; }

  UnitaryMatrix adjoint() const { return UnitaryMatrix(m_.adjoint()); }
  Complex determinant() const { return m_.determinant(); }

  bool is_unitary(double tol = 1e-10) const { return unitarity_defect(m_) <= tol; }
  bool is_special_unitary(double tol = 1e-8) const { return is_unitary() && std::abs(determinant() - 1.0) < tol; }

  friend UnitaryMatrix operator*(const UnitaryMatrix & a, const UnitaryMatrix & b) { return UnitaryMatrix(a.m_ * b.m_); }

private:
  DenseMatrix m_;
};

/// Closest unitary in Frobenius norm (polar factor).
inline DenseMatrix polar_unitary(const DenseMatrix & a)
{
  Eigen::JacobiSVD<DenseMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// ---------------------------------------------------------------------------------------------
// exp / log
// ---------------------------------------------------------------------------------------------

/// exp(-i t H) for dense Hermitian H by eigendecomposition.
inline DenseMatrix expm_hermitian(const DenseMatrix & h, double t)
{
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
  const auto & v = es.eigenvectors();
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) { phases(i) = std::polar(1.0, -t * es.eigenvalues()(i)); }
  return v * phases.asDiagonal() * v.adjoint();
}

inline UnitaryMatrix su_exp(const HermitianCoeffs & h, double t = 1.0) { return UnitaryMatrix(expm_hermitian(materialize(h), t)); }

/// Dense Hermitian H with exp(-i H) = U and spectrum in (-pi, pi).
inline DenseMatrix log_unitary_hermitian(const DenseMatrix & u, double branch_guard = kDefaultBranchGuard)
{
  // A normal matrix has a diagonal Schur form; the unitary factor gives an orthonormal eigenbasis
  // even for degenerate eigenvalues.
  Eigen::ComplexSchur<DenseMatrix> schur(u);
  const auto & t = schur.matrixT();
  const auto & q = schur.matrixU();
  Eigen::VectorXd h_eig(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double phi = std::arg(t(i, i));
    if (std::numbers::pi - std::abs(phi) < branch_guard) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "logarithm branch violation: eigenphase " << phi << " within " << branch_guard << " of the cut at pi";
      throw numerical_error(msg.str());
    }
    h_eig(i) = -phi;
  }
  DenseMatrix h = q * h_eig.cast<Complex>().asDiagonal() * q.adjoint();
  return 0.5 * (h + h.adjoint());
}

/// Principal logarithm in Pauli coefficients: exp(-i su_log(U) . sigma) = U.
inline HermitianCoeffs su_log(const UnitaryMatrix & u, double branch_guard = kDefaultBranchGuard)
{
  return decompose_hermitian(log_unitary_hermitian(u.matrix(), branch_guard));
}

/// Pauli coordinates q with V = exp(-i q . sigma).
inline HermitianCoeffs pauli_chart(const UnitaryMatrix & v, double branch_guard = kDefaultBranchGuard) { return su_log(v, branch_guard); }

/// Coordinates r centred at the anchor: V = exp(-i r . sigma) U.
inline HermitianCoeffs u_adapted_chart(const UnitaryMatrix & anchor, const UnitaryMatrix & v,
                                       double branch_guard = kDefaultBranchGuard)
{
  if (anchor.qubits() != v.qubits()) { throw argument_error("u_adapted_chart: mismatched qubit counts"); }
  return su_log(v * anchor.adjoint(), branch_guard);
}

// ---------------------------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------------------------

/// Sampled curve lambda_i -> U_i on a strictly increasing grid.
struct UnitaryCurve
{
  std::vector<double> grid;
  std::vector<UnitaryMatrix> points;

  std::size_t size() const { return grid.size(); }
  unsigned qubits() const { return points.front().qubits(); }

  void validate(double tol = 1e-10) const
  {
    if (grid.size() != points.size() || grid.size() < 2) { throw argument_error("curve needs matching grid and points, at least two"); }
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (!(grid[i] > grid[i - 1])) { throw argument_error("curve grid is not strictly increasing"); }
    }
    for (const auto & p : points) {
      if (p.qubits() != points.front().qubits()) { throw argument_error("curve points have mixed dimensions"); }
      if (!p.is_unitary(tol)) { throw numerical_error("curve point is not unitary"); }
    }
  }

  bool identity_anchored(double tol = 1e-10) const
  {
    if (grid.empty() || grid.front() != 0.0) { return false; }
    const auto & u = points.front().matrix();
    return (u - DenseMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
  }

  /// Right translation U(lambda) -> U(lambda) W.
  UnitaryCurve right_translated(const UnitaryMatrix & w) const
  {
    UnitaryCurve c = *this;
    for (auto & p : c.points) { p = p * w; }
    return c;
  }
};

inline std::vector<double> uniform_grid(double a, double b, std::size_t steps)
{
  if (steps == 0) { throw argument_error("grid needs at least one step"); }
  std::vector<double> g(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) { g[i] = a + (b - a) * double(i) / double(steps); }
  g.back() = b;
  return g;
}

/// Samples a closed-form curve on a grid.
inline UnitaryCurve sample_curve(const std::function<UnitaryMatrix(double)> & f, std::vector<double> grid)
{
  UnitaryCurve c;
  c.points.reserve(grid.size());
  for (double l : grid) { c.points.push_back(f(l)); }
  c.grid = std::move(grid);
  return c;
}

/// Second-order finite-difference derivative of the curve at grid position i.
inline DenseMatrix curve_derivative(const UnitaryCurve & c, std::size_t i)
{
  const auto & g = c.grid;
  const auto & u = [&](std::size_t j) -> const DenseMatrix & { return c.points[j].matrix(); };
  const std::size_t last = g.size() - 1;
  if (i > last) { throw argument_error("curve index out of range"); }
  if (g.size() == 2) { return (u(1) - u(0)) / (g[1] - g[0]); }
  if (i == 0) {
    const double h1 = g[1] - g[0], h2 = g[2] - g[1];
    return -(2 * h1 + h2) / (h1 * (h1 + h2)) * u(0) + (h1 + h2) / (h1 * h2) * u(1) - h1 / (h2 * (h1 + h2)) * u(2);
  }
  if (i == last) {
    const double h1 = g[last - 1] - g[last - 2], h2 = g[last] - g[last - 1];
    return h2 / (h1 * (h1 + h2)) * u(last - 2) - (h1 + h2) / (h1 * h2) * u(last - 1) + (2 * h2 + h1) / (h2 * (h1 + h2)) * u(last);
  }
  const double h1 = g[i] - g[i - 1], h2 = g[i + 1] - g[i];
  return -h2 / (h1 * (h1 + h2)) * u(i - 1) + (h2 - h1) / (h1 * h2) * u(i) + h1 / (h2 * (h1 + h2)) * u(i + 1);
}

/**
 * @brief Hamiltonian H = i U' U^dagger at grid position i, projected onto su(2^n).
 *
 * The finite-difference estimate is symmetrized to (A + A^dagger)/2 and its identity component
 * dropped. Throws a numerical error if the anti-Hermitian part before symmetrization exceeds
 * `defect_tol`, which flags a grid too coarse for the curve.
 */
inline HermitianCoeffs curve_hamiltonian(const UnitaryCurve & c, std::size_t i, double defect_tol = 1e-4)
{
  const DenseMatrix a = Complex(0, 1) * curve_derivative(c, i) * c.points[i].matrix().adjoint();
  if (const double d = hermiticity_defect(a); !(d <= defect_tol)) {
    throw numerical_error("grid too coarse: Hamiltonian Hermiticity defect " + std::to_string(d) + " at index " + std::to_string(i));
  }
  auto h = decompose_hermitian(0.5 * (a + a.adjoint()), std::numeric_limits<double>::infinity());
  h.erase(0);
  return h;
}

// ---------------------------------------------------------------------------------------------
// Time-ordered propagation
// ---------------------------------------------------------------------------------------------

using HamiltonianSchedule = std::function<HermitianCoeffs(double)>;

enum class DysonMethod {
  Midpoint,              ///< exp(-i dl H(l + dl/2)); second order
  CommutatorFreeMagnus4  ///< two exponentials at the Gauss points; fourth order
};

/**
 * @brief Solves U' = -i H(lambda) U with U(0) = 1 on the given grid.
 *
 * Each step is a product of exact exponentials. Points drifting more than 1e-12 from unitarity
 * are replaced by their polar factor.
 */
inline UnitaryCurve dyson_propagate(const HamiltonianSchedule & schedule, std::vector<double> grid,
                                    DysonMethod method = DysonMethod::CommutatorFreeMagnus4)
{
  if (grid.size() < 2 || grid.front() != 0.0) { throw argument_error("dyson_propagate: grid must start at 0 and have two points"); }
  const auto h0    = schedule(grid.front());
  const unsigned n = h0.qubits();
  const auto dense = [&](double l) {
    auto h = schedule(l);
    h.check(n);
    return materialize(h);
  };

  UnitaryCurve c;
  c.points.reserve(grid.size());
  DenseMatrix u = UnitaryMatrix::identity(n).matrix();
  c.points.emplace_back(u);
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const double l = grid[j], dl = grid[j + 1] - grid[j];
    if (!(dl > 0)) { throw argument_error("dyson_propagate: grid is not strictly increasing"); }
    if (method == DysonMethod::Midpoint) {
      u = expm_hermitian(dense(l + 0.5 * dl), dl) * u;
    } else {
      // Blanes-Moan CF4: nodes 1/2 -+ sqrt(3)/6, weights 1/4 +- sqrt(3)/6.
      constexpr double s3 = std::numbers::sqrt3;
      const DenseMatrix h1 = dense(l + (0.5 - s3 / 6) * dl);
      const DenseMatrix h2 = dense(l + (0.5 + s3 / 6) * dl);
      constexpr double a1 = 0.25 + s3 / 6, a2 = 0.25 - s3 / 6;
      u = expm_hermitian(a1 * h2 + a2 * h1, dl) * expm_hermitian(a1 * h1 + a2 * h2, dl) * u;
    }
    if (unitarity_defect(u) > 1e-12) { u = polar_unitary(u); }
    c.points.emplace_back(u);
  }
  c.grid = std::move(grid);
  return c;
}

// ---------------------------------------------------------------------------------------------
// Frame change
// ---------------------------------------------------------------------------------------------

inline constexpr int kDefaultBchOrder = 20;

/**
 * @brief Hamiltonian-representation velocity from Pauli coordinates and their derivative:
 *        H = sum_{k=0}^{order} (-i)^k / (k+1)! ad_Q^k(Qdot).
 *
 * Terms are built with the Hermitian bracket -i[Q, .], so every partial sum has real Pauli
 * coefficients. Stops early once an adjoint power vanishes.
 */
inline HermitianCoeffs bch_hamiltonian(const HermitianCoeffs & q, const HermitianCoeffs & qdot, int order = kDefaultBchOrder)
{
  if (order < 0) { throw argument_error("bch_hamiltonian: order must be nonnegative"); }
  q.check(qdot.qubits());
  HermitianCoeffs sum  = qdot.pruned();
  HermitianCoeffs term = qdot;
  double inv_fact      = 1.0;
  for (int k = 1; k <= order; ++k) {
    term = hermitian_bracket(q, term);
    if (term.empty()) { break; }
    inv_fact /= double(k + 1);
    sum.axpy(inv_fact, term);
  }
  return sum.prune();
}

}  // namespace qgeom
