#pragma once

/**
 * @file
 * @brief Right-invariant penalty metrics on SU(2^n), curve lengths and Pauli geodesics.
 *
 * The metric is diagonal in U-adapted components: ||h||^2 = sum_k w_k (h^k)^2, evaluated on the
 * Hamiltonian representation h of a tangent vector. Because the components are read off
 * H = i U' U^dagger, the same formula applies at every point (right invariance).
 */

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qgeom/error.hpp"
#include "qgeom/pauli.hpp"
#include "qgeom/rng.hpp"
#include "qgeom/unitary.hpp"

namespace qgeom {

enum class WeightScheme { Standard, Custom };

inline WeightScheme parse_weight_scheme(const std::string & tag)
{
  if (tag == "standard") { return WeightScheme::Standard; }
  if (tag == "custom") { return WeightScheme::Custom; }
  throw argument_error("unknown weight scheme \"" + tag + "\"");
}

inline std::string to_string(WeightScheme s) { return s == WeightScheme::Standard ? "standard" : "custom"; }

/**
 * @brief Diagonal penalty weights w_k over Pauli indices 1 <= k < 4^n.
 *
 * Standard scheme: w_k = 1 for strings acting on at most two qubits and 4^(2n) otherwise.
 * Custom scheme: explicit positive weights for listed strings, a positive default for the rest.
 */
class PenaltyMetric
{
public:
  PenaltyMetric(unsigned n, WeightScheme scheme) : n_(n), scheme_(scheme)
  {
    if (n == 0 || n > kMaxQubits) { throw argument_error("penalty metric: qubit count out of range"); }
  }

  static PenaltyMetric custom(unsigned n, std::map<std::uint64_t, double> weights, double default_weight = 1.0)
  {
    PenaltyMetric m(n, WeightScheme::Custom);
    if (!(default_weight > 0.0)) { throw argument_error("penalty metric: default weight must be positive"); }
    for (const auto & [k, w] : weights) {
      if (k == 0 || k >= pauli_count(n)) { throw argument_error("penalty metric: weight index out of range"); }
      if (!(w > 0.0)) { throw argument_error("penalty metric: weights must be positive"); }
    }
    m.custom_  = std::move(weights);
    m.default_ = default_weight;
    return m;
  }

  unsigned qubits() const { return n_; }
  WeightScheme scheme() const { return scheme_; }

  /// Weight for strings touching three or more qubits under the standard scheme.
  double heavy_weight() const { return std::pow(4.0, 2.0 * n_); }

  double weight(std::uint64_t k) const
  {
    if (k == 0 || k >= pauli_count(n_)) { throw argument_error("penalty weight requested for index " + std::to_string(k)); }
    if (scheme_ == WeightScheme::Standard) { return pauli_weight(PauliString::from_index(k, n_)) <= 2 ? 1.0 : heavy_weight(); }
    auto it = custom_.find(k);
    return it == custom_.end() ? default_ : it->second;
  }

private:
  unsigned n_;
  WeightScheme scheme_;
  std::map<std::uint64_t, double> custom_;
  double default_{1.0};
};

inline PenaltyMetric penalty_weights(unsigned n, const std::string & scheme) { return PenaltyMetric(n, parse_weight_scheme(scheme)); }

/// sqrt(sum_k w_k (h^k)^2) for traceless h.
inline double finsler_norm(const PenaltyMetric & metric, const HermitianCoeffs & h)
{
  if (metric.qubits() != h.qubits()) { throw argument_error("finsler_norm: mismatched qubit counts"); }
  if (std::abs(h.identity_component()) > 1e-12) { throw argument_error("finsler_norm: tangent vector has an identity component"); }
  double s = 0.0;
  for (const auto & [k, c] : h.terms()) {
    if (k == 0) { continue; }
    s += metric.weight(k) * c * c;
  }
  return std::sqrt(s);
}

/// Composite trapezoid integral of the Finsler norm of the curve's Hamiltonian.
inline double curve_length(const PenaltyMetric & metric, const UnitaryCurve & curve)
{
  curve.validate();
  std::vector<double> speed(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) { speed[i] = finsler_norm(metric, curve_hamiltonian(curve, i)); }
  double len = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) { len += 0.5 * (curve.grid[i] - curve.grid[i - 1]) * (speed[i] + speed[i - 1]); }
  return len;
}

// ---------------------------------------------------------------------------------------------
// Stabilizer support
// ---------------------------------------------------------------------------------------------

struct SupportCheck
{
  bool commuting{true};
  std::vector<PauliString> support;
  /// First anticommuting pair in support order, when not commuting.
  std::optional<std::pair<PauliString, PauliString>> offending;
};

/// Non-identity strings of X_f and whether they pairwise commute.
inline SupportCheck stabilizer_support(const HermitianCoeffs & x)
{
  SupportCheck out;
  for (const auto & [k, c] : x.terms()) {
    if (k != 0) { out.support.push_back(PauliString::from_index(k, x.qubits())); }
  }
  for (std::size_t i = 0; i < out.support.size() && out.commuting; ++i) {
    for (std::size_t j = i + 1; j < out.support.size(); ++j) {
      if (!commutes(out.support[i], out.support[j])) {
        out.commuting = false;
        out.offending = std::make_pair(out.support[i], out.support[j]);
        break;
      }
    }
  }
  return out;
}

inline std::string describe_offending(const SupportCheck & s)
{
  if (!s.offending) { return {}; }
  return "non-commuting support: " + s.offending->first.str() + " and " + s.offending->second.str() + " anticommute";
}

// ---------------------------------------------------------------------------------------------
// Euler-Lagrange residual
// ---------------------------------------------------------------------------------------------

/**
 * @brief max over components and interior grid points of |d^2 q^k / d lambda^2|.
 *
 * q(lambda) are Pauli coordinates of the curve. With commuting coordinate support h = qdot, so
 * the Euler-Lagrange equations of the diagonal metric reduce to qddot = 0. Curves whose
 * coordinates leave a commuting set are rejected instead of evaluated.
 */
inline double el_residual(const PenaltyMetric & metric, const UnitaryCurve & curve, double support_tol = 1e-9)
{
  curve.validate();
  if (metric.qubits() != curve.qubits()) { throw argument_error("el_residual: mismatched qubit counts"); }
  std::vector<HermitianCoeffs> q;
  q.reserve(curve.size());
  HermitianCoeffs support(curve.qubits());
  for (const auto & p : curve.points) {
    q.push_back(pauli_chart(p));
    for (const auto & [k, c] : q.back().terms()) {
      if (std::abs(c) > support_tol) { support.set(k, 1.0); }
    }
  }
  if (const auto s = stabilizer_support(support); !s.commuting) {
    throw numerical_error("el_residual: " + describe_offending(s) + "; residual only valid for commuting coordinate support");
  }
  double r       = 0.0;
  const auto & g = curve.grid;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double h1 = g[i] - g[i - 1], h2 = g[i + 1] - g[i];
    const double a = 2.0 / (h1 * (h1 + h2)), b = -2.0 / (h1 * h2), c = 2.0 / (h2 * (h1 + h2));
    for (const auto & [k, unused] : support.terms()) {
      if (k == 0) { continue; }
      r = std::max(r, std::abs(a * q[i - 1][k] + b * q[i][k] + c * q[i + 1][k]));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------------------------
// Pauli geodesics
// ---------------------------------------------------------------------------------------------

struct GeodesicResult
{
  HermitianCoeffs target;
  UnitaryCurve curve;
  double length{0.0};           ///< finsler_norm(metric, target)
  double measured_length{0.0};  ///< curve_length on the sampled curve
  double el_residual{0.0};
};

inline constexpr std::size_t kDefaultGeodesicGrid = 1000;

/// Largest |eigenvalue| of a Hermitian operator.
inline double spectral_radius(const HermitianCoeffs & h)
{
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(materialize(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/**
 * @brief The straight line U(lambda) = exp(-i lambda X_f), lambda in [0, 1], for targets whose
 *        Pauli support commutes.
 */
inline GeodesicResult pauli_geodesic(const PenaltyMetric & metric, const HermitianCoeffs & target,
                                     std::size_t grid_steps = kDefaultGeodesicGrid, double branch_guard = kDefaultBranchGuard)
{
  if (metric.qubits() != target.qubits()) { throw argument_error("pauli_geodesic: mismatched qubit counts"); }
  if (!target.is_traceless()) { throw argument_error("pauli_geodesic: target has an identity component"); }
  if (const auto s = stabilizer_support(target); !s.commuting) { throw numerical_error("pauli_geodesic: " + describe_offending(s)); }
  if (const double rad = spectral_radius(target); !(rad < std::numbers::pi - branch_guard)) {
    throw numerical_error("pauli_geodesic: target spectrum reaches the logarithm branch cut (spectral radius " + std::to_string(rad) + ")");
  }
  const DenseMatrix xf = materialize(target);
  GeodesicResult out;
  out.target          = target;
  out.curve           = sample_curve([&](double l) { return UnitaryMatrix(expm_hermitian(xf, l)); }, uniform_grid(0.0, 1.0, grid_steps));
  out.length          = finsler_norm(metric, target);
  out.measured_length = curve_length(metric, out.curve);
  out.el_residual     = el_residual(metric, out.curve);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Local minimality probe
// ---------------------------------------------------------------------------------------------

struct MinimalityProbe
{
  double straight_length{0.0};
  std::vector<double> perturbed_lengths;
  /// min(perturbed) - straight; nonnegative when no probe path is shorter.
  double margin{0.0};
};

/**
 * @brief Compares the straight line to endpoint-preserving sinusoidal deformations.
 *
 * Path p is U_p(lambda) = exp(-i (lambda X_f + a_p sin(pi m_p lambda) G_p)) with amplitude
 * a_p <= max_amplitude and G_p a unit-norm random direction. Even-numbered paths use
 * directions outside the support of X_f only; odd-numbered paths mix an in-support component
 * with an outside one. All lengths use the same grid.
 */
inline MinimalityProbe minimality_probe(const PenaltyMetric & metric, const HermitianCoeffs & target, std::size_t paths,
                                        std::uint64_t seed, std::size_t grid_steps = kDefaultGeodesicGrid, double max_amplitude = 0.1)
{
  const unsigned n = target.qubits();
  const auto grid  = uniform_grid(0.0, 1.0, grid_steps);
  const DenseMatrix xf = materialize(target);
  MinimalityProbe out;
  out.straight_length = curve_length(metric, sample_curve([&](double l) { return UnitaryMatrix(expm_hermitian(xf, l)); }, grid));

  std::vector<std::uint64_t> inside, outside;
  for (std::uint64_t k = 1; k < pauli_count(n); ++k) { (target[k] != 0.0 ? inside : outside).push_back(k); }

  const RngStream master(seed, 0x9e0d);
  out.perturbed_lengths.resize(paths);
  for (std::size_t p = 0; p < paths; ++p) {
    auto rng = master.substream(p);
    HermitianCoeffs dir(n);
    for (auto k : outside) { dir.add(k, rng.normal()); }
    if (p % 2 == 1) {
      for (auto k : inside) { dir.add(k, rng.normal()); }
    }
    dir.prune();
    dir                     = (1.0 / hs_norm(dir)) * dir;
    const double amplitude  = max_amplitude * (0.2 + 0.8 * rng.uniform());
    const int mode          = 1 + int(p % 3);
    const DenseMatrix g     = materialize(dir);
    const auto path = sample_curve(
        [&](double l) { return UnitaryMatrix(expm_hermitian(l * xf + amplitude * std::sin(std::numbers::pi * mode * l) * g, 1.0)); }, grid);
    out.perturbed_lengths[p] = curve_length(metric, path);
  }
  double best = std::numeric_limits<double>::infinity();
  for (double l : out.perturbed_lengths) { best = std::min(best, l); }
  out.margin = paths ? best - out.straight_length : 0.0;
  return out;
}

}  // namespace qgeom
