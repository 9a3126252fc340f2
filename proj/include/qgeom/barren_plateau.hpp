#pragma once

/**
 * @file
 * @brief Layered ansaetze, loss variance estimation, DLA variance formula and moment operators.
 *
 * An ansatz with generators H_1..H_m and L layers is
 *
 *   U(theta) = U_1(theta_1) U_2(theta_2) ... U_L(theta_L),
 *   U_l(theta_l) = exp(i theta_l^1 H_1) exp(i theta_l^2 H_2) ... exp(i theta_l^m H_m),
 *
 * with the leftmost factor first. Parameters are stored layer-major: theta[l * m + j].
 * Note the +i sign here, opposite to the exp(-iH) convention used for curves.
 */

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qgeom/error.hpp"
#include "qgeom/haar.hpp"
#include "qgeom/lie_closure.hpp"
#include "qgeom/pauli.hpp"
#include "qgeom/rng.hpp"
#include "qgeom/stats.hpp"
#include "qgeom/unitary.hpp"

namespace qgeom {

// ---------------------------------------------------------------------------------------------
// Fundamental periods
// ---------------------------------------------------------------------------------------------

namespace detail {

/// Best rational approximation p/q with q <= max_den (continued fractions).
inline std::pair<long long, long long> rational_approx(double x, long long max_den)
{
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    const double a_f = std::floor(r);
    if (std::abs(a_f) > 1e15) { break; }
    const auto a  = static_cast<long long>(a_f);
    const auto q2 = q0 + a * q1;
    if (q2 > max_den) { break; }
    const auto p2 = p0 + a * p1;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = r - a_f;
    if (frac < 1e-15) { break; }
    r = 1.0 / frac;
  }
  return {p1, q1};
}

}  // namespace detail

inline constexpr long long kPeriodDenominatorBound = 64;

/**
 * @brief Smallest tau > 0 with exp(-i tau H) = 1.
 *
 * Requires all eigenvalues to be rational multiples (denominator <= 64, relative tolerance
 * 1e-9) of a common value g; then tau = 2 pi / g. Incommensurate spectra throw.
 */
inline double fundamental_period(const HermitianCoeffs & h, long long max_den = kPeriodDenominatorBound)
{
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(materialize(h), Eigen::EigenvaluesOnly);
  const auto & ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  std::vector<double> nonzero;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > 1e-9 * std::max(scale, 1e-300)) { nonzero.push_back(ev(i)); }
  }
  if (nonzero.empty()) { throw numerical_error("fundamental_period: generator is zero, no period"); }
  double ref = nonzero.front();
  for (double v : nonzero) {
    if (std::abs(v) < std::abs(ref)) { ref = v; }
  }
  ref = std::abs(ref);

  std::vector<std::pair<long long, long long>> ratios;
  long long lcm = 1;
  for (double v : nonzero) {
    const double r = v / ref;
    const auto [p, q] = detail::rational_approx(r, max_den);
    if (q == 0 || std::abs(r - double(p) / double(q)) > 1e-9 * std::abs(r)) {
      throw numerical_error("fundamental_period: incommensurate spectrum; supply the period explicitly");
    }
    ratios.emplace_back(p, q);
    lcm = std::lcm(lcm, q);
  }
  long long g = 0;
  for (const auto & [p, q] : ratios) { g = std::gcd(g, std::llabs(p * (lcm / q))); }
  const double base = ref * double(g) / double(lcm);
  const double tau  = 2.0 * std::numbers::pi / base;

  const DenseMatrix u = expm_hermitian(materialize(h), tau);
  if ((u - DenseMatrix::Identity(u.rows(), u.cols())).norm() >= 1e-8) {
    throw numerical_error("fundamental_period: resolved period does not return to the identity");
  }
  return tau;
}

// ---------------------------------------------------------------------------------------------
// Ansatz
// ---------------------------------------------------------------------------------------------

struct AnsatzSpec
{
  unsigned n{0};
  std::vector<HermitianCoeffs> generators;
  std::size_t layers{1};
  /// One entry per generator; nullopt resolves automatically. Empty means all automatic.
  std::vector<std::optional<double>> periods;
};

/// Validated ansatz with resolved periods and precomputed generator exponentials.
class Ansatz
{
public:
  explicit Ansatz(const AnsatzSpec & spec) : n_(spec.n), layers_(spec.layers), generators_(spec.generators)
  {
    if (generators_.empty()) { throw argument_error("ansatz: no generators"); }
    if (layers_ == 0) { throw argument_error("ansatz: layer count must be positive"); }
    if (!spec.periods.empty() && spec.periods.size() != generators_.size()) { throw argument_error("ansatz: period list length differs from generator count"); }
    for (std::size_t j = 0; j < generators_.size(); ++j) {
      auto & g = generators_[j];
      g.check(n_);
      if (g.empty()) { throw argument_error("ansatz: generator " + std::to_string(j) + " is zero"); }
      const std::optional<double> given = spec.periods.empty() ? std::nullopt : spec.periods[j];
      double tau                        = given ? *given : fundamental_period(g);
      if (!(tau > 0.0)) { throw argument_error("ansatz: periods must be positive"); }
      periods_.push_back(tau);

      Factor f;
      if (g.size() == 1) {
        f.pauli = true;
        f.coeff = g.terms().begin()->second;
        const auto p = PauliString::from_index(g.terms().begin()->first, n_);
        f.string     = p;
        const auto d = dimension_of(n_);
        f.column_source.resize(d);
        f.column_value.resize(d);
        detail::for_each_entry(p, [&](std::uint64_t r, std::uint64_t c, Complex v) {
          f.column_source[c] = Eigen::Index(r);
          f.column_value[c]  = v;
        });
      } else {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(materialize(g));
        f.vectors = es.eigenvectors();
        f.values  = es.eigenvalues();
      }
      factors_.push_back(std::move(f));
    }
  }

  unsigned qubits() const { return n_; }
  std::size_t layers() const { return layers_; }
  std::size_t generator_count() const { return generators_.size(); }
  std::size_t parameter_count() const { return layers_ * generators_.size(); }
  const std::vector<HermitianCoeffs> & generators() const { return generators_; }
  const std::vector<double> & periods() const { return periods_; }

  bool pauli_generators() const
  {
    return std::all_of(factors_.begin(), factors_.end(), [](const Factor & f) { return f.pauli; });
  }

  /// Same generators and periods with a different depth.
  Ansatz with_layers(std::size_t layers) const
  {
    Ansatz a = *this;
    if (layers == 0) { throw argument_error("ansatz: layer count must be positive"); }
    a.layers_ = layers;
    return a;
  }

  /// u <- u * exp(i theta H_j)
  void right_multiply(DenseMatrix & u, std::size_t j, double theta) const
  {
    const Factor & f = factors_[j];
    if (f.pauli) {
      const double a  = theta * f.coeff;
      const double cs = std::cos(a), sn = std::sin(a);
      DenseMatrix out(u.rows(), u.cols());
      for (Eigen::Index c = 0; c < u.cols(); ++c) {
        // (u sigma)(:, c) = u(:, src) * value
        out.col(c) = cs * u.col(c) + (Complex(0, sn) * f.column_value[std::size_t(c)]) * u.col(f.column_source[std::size_t(c)]);
      }
      u = std::move(out);
      return;
    }
    Eigen::VectorXcd ph(f.values.size());
    for (Eigen::Index i = 0; i < ph.size(); ++i) { ph(i) = std::polar(1.0, theta * f.values(i)); }
    u = ((u * f.vectors) * ph.asDiagonal()) * f.vectors.adjoint();
  }

  struct Factor
  {
    bool pauli{false};
    double coeff{0.0};
    PauliString string;
    std::vector<Eigen::Index> column_source;
    std::vector<Complex> column_value;
    DenseMatrix vectors;
    Eigen::VectorXd values;
  };
  const std::vector<Factor> & factors() const { return factors_; }

private:
  unsigned n_;
  std::size_t layers_;
  std::vector<HermitianCoeffs> generators_;
  std::vector<double> periods_;
  std::vector<Factor> factors_;
};

/// theta_l^j uniform on [0, tau_j), layer-major.
inline std::vector<double> sample_parameters(const Ansatz & ansatz, RngStream & rng)
{
  std::vector<double> theta(ansatz.parameter_count());
  const auto m = ansatz.generator_count();
  for (std::size_t l = 0; l < ansatz.layers(); ++l) {
    for (std::size_t j = 0; j < m; ++j) { theta[l * m + j] = ansatz.periods()[j] * rng.uniform(); }
  }
  return theta;
}

inline UnitaryMatrix build_unitary(const Ansatz & ansatz, const std::vector<double> & theta)
{
  if (theta.size() != ansatz.parameter_count()) {
    throw argument_error("build_unitary: expected " + std::to_string(ansatz.parameter_count()) + " parameters, got " + std::to_string(theta.size()));
  }
  const auto d  = Eigen::Index(dimension_of(ansatz.qubits()));
  DenseMatrix u = DenseMatrix::Identity(d, d);
  for (std::size_t i = 0; i < theta.size(); ++i) { ansatz.right_multiply(u, i % ansatz.generator_count(), theta[i]); }
  return UnitaryMatrix(std::move(u));
}

// ---------------------------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------------------------

struct LossTask
{
  DenseMatrix rho;
  DenseMatrix observable;

  static LossTask make(DenseMatrix rho, DenseMatrix observable)
  {
    if (rho.rows() != rho.cols() || observable.rows() != observable.cols() || rho.rows() != observable.rows()) {
      throw argument_error("loss task: rho and observable must be square with equal dimension");
    }
    qubits_of_dimension(rho.rows());
    if (hermiticity_defect(rho) > 1e-10) { throw argument_error("loss task: rho is not Hermitian"); }
    if (hermiticity_defect(observable) > 1e-10) { throw argument_error("loss task: observable is not Hermitian"); }
    if (std::abs(rho.trace() - 1.0) > 1e-10) { throw argument_error("loss task: Tr(rho) != 1"); }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) { throw argument_error("loss task: rho is not positive semidefinite"); }
    return LossTask{std::move(rho), std::move(observable)};
  }

  unsigned qubits() const { return qubits_of_dimension(rho.rows()); }
};

/// |0...0><0...0| on n qubits.
inline DenseMatrix computational_zero(unsigned n)
{
  const auto d  = Eigen::Index(dimension_of(n));
  DenseMatrix r = DenseMatrix::Zero(d, d);
  r(0, 0)       = 1.0;
  return r;
}

/// Tr[U rho U^dagger O].
inline double loss(const UnitaryMatrix & u, const LossTask & task)
{
  if (u.matrix().rows() != task.rho.rows()) { throw argument_error("loss: dimension mismatch"); }
  const Complex v = (u.matrix() * task.rho * u.matrix().adjoint() * task.observable).trace();
  if (std::abs(v.imag()) > 1e-8) { throw numerical_error("loss: imaginary part " + std::to_string(v.imag()) + " (non-Hermitian inputs?)"); }
  return v.real();
}

namespace detail {

/// Heisenberg-picture evaluation in the Pauli basis for Pauli-string generators.
///
/// Conjugating by exp(i a P) fixes strings commuting with P exactly and rotates each
/// anticommuting pair (k, m) with sigma_k P = -i eta sigma_m.
class PauliTransferLoss
{
public:
  PauliTransferLoss(const Ansatz & ansatz, const LossTask & task) : ansatz_(&ansatz)
  {
    const unsigned n  = ansatz.qubits();
    const auto count  = pauli_count(n);
    const auto o      = decompose_hermitian(task.observable, 1e-10, 0.0);
    const auto r      = decompose_hermitian(task.rho, 1e-10, 0.0);
    observable_.assign(count, 0.0);
    rho_weights_.assign(count, 0.0);
    for (const auto & [k, c] : o.terms()) { observable_[k] = c; }
    for (const auto & [k, c] : r.terms()) { rho_weights_[k] = double(dimension_of(n)) * c; }
    for (const auto & f : ansatz.factors()) {
      std::vector<Pair> pairs;
      for (std::uint64_t k = 0; k < count; ++k) {
        const auto s = PauliString::from_index(k, n);
        if (commutes(s, f.string)) { continue; }
        const auto prod = pauli_product(s, f.string);
        const auto m    = prod.string.index();
        if (m < k) { continue; }
        // sigma_k P = i^e sigma_m with e odd; i * i^e = +-1
        pairs.push_back({k, m, exponent(prod.phase) == 1 ? -1.0 : 1.0});
      }
      pairs_.push_back(std::move(pairs));
    }
  }

  double operator()(const std::vector<double> & theta, std::vector<double> & work) const
  {
    work.assign(observable_.begin(), observable_.end());
    const auto m = ansatz_->generator_count();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const auto j   = i % m;
      const double a = 2.0 * theta[i] * ansatz_->factors()[j].coeff;
      const double c = std::cos(a), s = std::sin(a);
      for (const auto & p : pairs_[j]) {
        const double ok = work[p.k], om = work[p.m];
        work[p.k]       = c * ok - p.eta * s * om;
        work[p.m]       = c * om + p.eta * s * ok;
      }
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < work.size(); ++k) {
      if (rho_weights_[k] != 0.0) { acc += rho_weights_[k] * work[k]; }
    }
    return acc;
  }

private:
  struct Pair
  {
    std::uint64_t k, m;
    double eta;
  };
  const Ansatz * ansatz_;
  std::vector<double> observable_;
  std::vector<double> rho_weights_;
  std::vector<std::vector<Pair>> pairs_;
};

inline constexpr unsigned kPauliTransferQubitLimit = 8;

// Substream tags keep ensemble, reference and variance draws disjoint under one seed.
inline constexpr std::uint64_t kVarianceStream  = 0x7661726961ULL;
inline constexpr std::uint64_t kEnsembleStream  = 0x656e73656dULL;
inline constexpr std::uint64_t kReferenceStream = 0x7265666572ULL;

}  // namespace detail

/// Loss at theta; uses the Pauli-basis Heisenberg path when all generators are Pauli strings.
class LossEvaluator
{
public:
  LossEvaluator(const Ansatz & ansatz, LossTask task) : ansatz_(&ansatz), task_(std::move(task))
  {
    if (task_.qubits() != ansatz.qubits()) { throw argument_error("loss task and ansatz have different qubit counts"); }
    if (ansatz.pauli_generators() && ansatz.qubits() <= detail::kPauliTransferQubitLimit) { transfer_.emplace(ansatz, task_); }
  }

  bool uses_pauli_transfer() const { return transfer_.has_value(); }

  double operator()(const std::vector<double> & theta, std::vector<double> & work) const
  {
    if (transfer_) { return (*transfer_)(theta, work); }
    return loss(build_unitary(*ansatz_, theta), task_);
  }

private:
  const Ansatz * ansatz_;
  LossTask task_;
  std::optional<detail::PauliTransferLoss> transfer_;
};

// ---------------------------------------------------------------------------------------------
// Variance
// ---------------------------------------------------------------------------------------------

struct IdealPurity
{
  std::size_t dim{0};
  double rho_purity{0.0};
  double observable_purity{0.0};
  double contribution{0.0};
};

struct TheoreticalVariance
{
  double value{0.0};
  std::vector<IdealPurity> table;
  /// HS norm of the traceless part outside g; < 1e-8 means the operator lies in ig.
  double rho_residual{0.0};
  double observable_residual{0.0};
  bool rho_in_g{false};
  bool observable_in_g{false};
};

struct VarianceReport
{
  std::size_t samples{0};
  double mean{0.0};
  double variance{0.0};
  double variance_se{0.0};
  std::optional<TheoreticalVariance> theory;
  /// Measured distance to a 2-design on G; absent means the assumption is unchecked.
  std::optional<double> two_design_distance;
  std::optional<double> two_design_noise_floor;
};

/**
 * @brief Monte Carlo loss variance under the layer-torus measure.
 *
 * Sample i draws its parameters from substream i of (seed, variance tag). Samples are reduced
 * per fixed 1024-sample chunk and chunks merged in index order, so the report is bit-identical
 * for any worker count.
 */
inline VarianceReport estimate_variance(const Ansatz & ansatz, const LossTask & task, std::size_t samples, std::uint64_t seed,
                                        unsigned workers = 1)
{
  if (samples < 100) { throw argument_error("estimate_variance: at least 100 samples required"); }
  const LossEvaluator eval(ansatz, task);
  const RngStream master(seed, detail::kVarianceStream);
  const auto chunks = parallel_chunks<MomentAccumulator>(samples, kDefaultChunk, workers, [&](std::size_t, std::size_t b, std::size_t e) {
    MomentAccumulator acc;
    std::vector<double> work;
    for (std::size_t i = b; i < e; ++i) {
      auto rng = master.substream(i);
      acc.push(eval(sample_parameters(ansatz, rng), work));
    }
    return acc;
  });
  MomentAccumulator total;
  for (const auto & c : chunks) { total.merge(c); }
  VarianceReport rep;
  rep.samples     = samples;
  rep.mean        = total.mean;
  rep.variance    = total.variance();
  rep.variance_se = total.standard_error_of_variance();
  return rep;
}

/// Per-sample losses in sample order (same draws as estimate_variance).
inline std::vector<double> sample_losses(const Ansatz & ansatz, const LossTask & task, std::size_t samples, std::uint64_t seed)
{
  const LossEvaluator eval(ansatz, task);
  const RngStream master(seed, detail::kVarianceStream);
  std::vector<double> out(samples);
  std::vector<double> work;
  for (std::size_t i = 0; i < samples; ++i) {
    auto rng = master.substream(i);
    out[i]   = eval(sample_parameters(ansatz, rng), work);
  }
  return out;
}

namespace detail {

inline double outside_residual(const IdealDecomposition & dec, const HermitianCoeffs & h)
{
  HermitianCoeffs inside = project_onto(dec.center, h);
  for (const auto & s : dec.simple_ideals) { inside.axpy(1.0, project_onto(s, h)); }
  return hs_norm(h.traceless_part() - inside.traceless_part());
}

}  // namespace detail

/**
 * @brief sum over simple ideals of P_k(rho) P_k(O) / dim g_k.
 *
 * The formula presumes a 2-design ensemble and rho or O in ig; both membership residuals are
 * reported and the 2-design assumption is left to the caller.
 */
inline TheoreticalVariance theoretical_variance(const IdealDecomposition & dec, const LossTask & task)
{
  const auto rho = decompose_hermitian(task.rho);
  const auto obs = decompose_hermitian(task.observable);
  TheoreticalVariance out;
  for (const auto & ideal : dec.simple_ideals) {
    IdealPurity row;
    row.dim               = ideal.dim();
    row.rho_purity        = g_purity(ideal, rho);
    row.observable_purity = g_purity(ideal, obs);
    row.contribution      = row.rho_purity * row.observable_purity / double(row.dim);
    out.value += row.contribution;
    out.table.push_back(row);
  }
  out.rho_residual        = detail::outside_residual(dec, rho);
  out.observable_residual = detail::outside_residual(dec, obs);
  out.rho_in_g            = out.rho_residual < 1e-8;
  out.observable_in_g     = out.observable_residual < 1e-8;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Moment operators
// ---------------------------------------------------------------------------------------------

using UnitarySampler = std::function<DenseMatrix(RngStream &)>;

inline DenseMatrix kron(const DenseMatrix & a, const DenseMatrix & b)
{
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) { out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b; }
  }
  return out;
}

inline DenseMatrix kron_power(const DenseMatrix & u, int k)
{
  DenseMatrix out = u;
  for (int i = 1; i < k; ++i) { out = kron(out, u); }
  return out;
}

inline constexpr Eigen::Index kMomentDimensionLimit = 4096;

struct MomentEstimate
{
  DenseMatrix mean;
  Eigen::MatrixXd se_real;
  Eigen::MatrixXd se_imag;
  std::size_t samples{0};

  /// max_ij of |mean_ij - target_ij| in units of its standard error; infinite if SE is zero and they differ.
  double max_deviation_in_se(const DenseMatrix & target) const
  {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < mean.rows(); ++i) {
      for (Eigen::Index j = 0; j < mean.cols(); ++j) {
        const Complex d = mean(i, j) - target(i, j);
        for (const auto & [x, s] : {std::pair{d.real(), se_real(i, j)}, std::pair{d.imag(), se_imag(i, j)}}) {
          if (x == 0.0) { continue; }
          worst = std::max(worst, s > 0.0 ? std::abs(x) / s : std::numeric_limits<double>::infinity());
        }
      }
    }
    return worst;
  }
};

namespace detail {

struct MomentSums
{
  DenseMatrix sum;
  Eigen::MatrixXd sq_re, sq_im;
};

inline bool is_scalar_identity(const DenseMatrix & m)
{
  const Complex c = m(0, 0);
  return m == c * DenseMatrix::Identity(m.rows(), m.cols());
}

}  // namespace detail

/**
 * @brief Monte Carlo estimate of E[U^{(x)k} M (U^dagger)^{(x)k}] with entrywise standard errors.
 *
 * `sampler` draws U (dimension dim) from a stream; sample i uses substream i of `stream`.
 * Multiples of the identity are returned unchanged, since conjugation fixes them.
 */
inline MomentEstimate moment_operator(const UnitarySampler & sampler, Eigen::Index dim, int k, const DenseMatrix & m, std::size_t samples,
                                      const RngStream & stream, unsigned workers = 1)
{
  if (k < 1) { throw argument_error("moment_operator: order must be positive"); }
  Eigen::Index big = 1;
  for (int i = 0; i < k; ++i) {
    big *= dim;
    if (big > kMomentDimensionLimit) { throw guard_error("moment_operator: tensor dimension exceeds " + std::to_string(kMomentDimensionLimit)); }
  }
  if (m.rows() != big || m.cols() != big) { throw argument_error("moment_operator: M has the wrong dimension for order k"); }
  if (samples < 100) { throw argument_error("moment_operator: at least 100 samples required"); }

  MomentEstimate est;
  est.samples = samples;
  if (detail::is_scalar_identity(m)) {
    est.mean    = m;
    est.se_real = Eigen::MatrixXd::Zero(big, big);
    est.se_imag = Eigen::MatrixXd::Zero(big, big);
    return est;
  }
  const auto chunks = parallel_chunks<detail::MomentSums>(samples, kDefaultChunk, workers, [&](std::size_t, std::size_t b, std::size_t e) {
    detail::MomentSums s{DenseMatrix::Zero(big, big), Eigen::MatrixXd::Zero(big, big), Eigen::MatrixXd::Zero(big, big)};
    for (std::size_t i = b; i < e; ++i) {
      auto rng              = stream.substream(i);
      const DenseMatrix uk  = kron_power(sampler(rng), k);
      const DenseMatrix img = uk * m * uk.adjoint();
      s.sum += img;
      s.sq_re += img.real().cwiseAbs2();
      s.sq_im += img.imag().cwiseAbs2();
    }
    return s;
  });
  detail::MomentSums total{DenseMatrix::Zero(big, big), Eigen::MatrixXd::Zero(big, big), Eigen::MatrixXd::Zero(big, big)};
  for (const auto & c : chunks) {
    total.sum += c.sum;
    total.sq_re += c.sq_re;
    total.sq_im += c.sq_im;
  }
  const double n = double(samples);
  est.mean       = total.sum / n;
  const auto se  = [n](const Eigen::MatrixXd & sq, const Eigen::MatrixXd & mu) {
    return ((sq / n - mu.cwiseAbs2()).cwiseMax(0.0) * (n / (n - 1.0)) / n).cwiseSqrt().eval();
  };
  est.se_real = se(total.sq_re, est.mean.real());
  est.se_imag = se(total.sq_im, est.mean.imag());
  return est;
}

inline UnitarySampler ensemble_sampler(const Ansatz & ansatz)
{
  return [&ansatz](RngStream & rng) { return build_unitary(ansatz, sample_parameters(ansatz, rng)).matrix(); };
}

inline UnitarySampler haar_sampler(Eigen::Index dim, HaarGroup group = HaarGroup::Unitary)
{
  return [dim, group](RngStream & rng) { return haar_sample(group, dim, rng); };
}

inline MomentEstimate moment_operator_ensemble(const Ansatz & ansatz, int k, const DenseMatrix & m, std::size_t samples, std::uint64_t seed,
                                               unsigned workers = 1)
{
  return moment_operator(ensemble_sampler(ansatz), Eigen::Index(dimension_of(ansatz.qubits())), k, m, samples,
                         RngStream(seed, detail::kEnsembleStream), workers);
}

inline MomentEstimate moment_operator_haar(Eigen::Index dim, int k, const DenseMatrix & m, std::size_t samples, std::uint64_t seed,
                                           unsigned workers = 1, HaarGroup group = HaarGroup::Unitary)
{
  return moment_operator(haar_sampler(dim, group), dim, k, m, samples, RngStream(seed, detail::kReferenceStream), workers);
}

// ---------------------------------------------------------------------------------------------
// 2-design distance
// ---------------------------------------------------------------------------------------------

struct TwoDesignReport
{
  double distance{0.0};
  double noise_floor{0.0};
  bool haar_reference{false};  ///< direct Haar on U(2^n); otherwise a 4L-layer product
  std::size_t reference_layers{0};
  std::size_t dla_dim{0};
};

inline constexpr Eigen::Index kTwoDesignDimensionLimit = 256;

/**
 * @brief max over probes of the entrywise distance between second moment operators of the
 *        ensemble and of Haar on G.
 *
 * Haar on G is direct Haar sampling when the DLA is all of su(2^n) (or u(2^n)), otherwise the
 * same ansatz at 4L layers. The noise floor is the split-half discrepancy of both estimates,
 * rescaled to full-sample size.
 */
inline TwoDesignReport two_design_distance(const Ansatz & ansatz, std::size_t samples, const std::vector<DenseMatrix> & probes,
                                           std::uint64_t seed, unsigned workers = 1)
{
  const auto d = Eigen::Index(dimension_of(ansatz.qubits()));
  if (d * d > kTwoDesignDimensionLimit) { throw guard_error("two_design_distance: 2^(2n) exceeds " + std::to_string(kTwoDesignDimensionLimit)); }
  if (samples < 200) { throw argument_error("two_design_distance: at least 200 samples required"); }
  if (probes.empty()) { throw argument_error("two_design_distance: empty probe set"); }

  TwoDesignReport rep;
  const auto dla     = lie_closure(ansatz.generators(), pauli_count(ansatz.qubits()));
  rep.dla_dim        = dla.dim();
  rep.haar_reference = dla.dim() >= pauli_count(ansatz.qubits()) - 1;
  const Ansatz deep  = ansatz.with_layers(4 * ansatz.layers());
  rep.reference_layers = rep.haar_reference ? 0 : deep.layers();
  const UnitarySampler ens = ensemble_sampler(ansatz);
  const UnitarySampler ref = rep.haar_reference ? haar_sampler(d) : ensemble_sampler(deep);
  const RngStream ens_stream(seed, detail::kEnsembleStream);
  const RngStream ref_stream(seed, detail::kReferenceStream);

  const std::size_t half = samples / 2;
  for (const auto & p : probes) {
    const auto half_stats = [&](const UnitarySampler & s, const RngStream & stream) {
      // two disjoint halves; their average is the full estimate
      const auto a = moment_operator(s, d, 2, p, half, stream.substream(1), workers);
      const auto b = moment_operator(s, d, 2, p, samples - half, stream.substream(2), workers);
      return std::pair{a.mean, b.mean};
    };
    const auto [ea, eb] = half_stats(ens, ens_stream);
    const auto [ra, rb] = half_stats(ref, ref_stream);
    const double w        = double(half) / double(samples);
    const DenseMatrix ens_full = w * ea + (1.0 - w) * eb;
    const DenseMatrix ref_full = w * ra + (1.0 - w) * rb;
    rep.distance = std::max(rep.distance, (ens_full - ref_full).cwiseAbs().maxCoeff());
    // Var(half difference) ~ 4 sigma^2 / N per ensemble; the full-vs-full gap has (sigma_e^2 + sigma_r^2) / N.
    const Eigen::MatrixXd floor = (((ea - eb).cwiseAbs2() + (ra - rb).cwiseAbs2()) / 4.0).cwiseSqrt();
    rep.noise_floor             = std::max(rep.noise_floor, floor.maxCoeff());
  }
  return rep;
}

}  // namespace qgeom
