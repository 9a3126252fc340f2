#pragma once

/**
 * @file
 * @brief Haar-distributed sampling on U(N) and SU(N), and invariance checks of the measure.
 */

#include <Eigen/Dense>
#include <Eigen/QR>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "qgeom/error.hpp"
#include "qgeom/pauli.hpp"
#include "qgeom/rng.hpp"
#include "qgeom/stats.hpp"

namespace qgeom {

/**
 * @brief Haar-random U(N) matrix.
 *
 * QR of a complex Ginibre matrix, with Q's columns rephased by R_jj / |R_jj|. Without the
 * rephasing the distribution of Q depends on the QR implementation and is not Haar.
 */
inline DenseMatrix haar_unitary(Eigen::Index dim, RngStream & rng)
{
  if (dim < 1) { throw argument_error("haar_unitary: dimension must be positive"); }
  DenseMatrix z(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      const double re = rng.normal();
      const double im = rng.normal();
      z(r, c)         = Complex(re, im) / std::numbers::sqrt2;
    }
  }
  Eigen::HouseholderQR<DenseMatrix> qr(z);
  DenseMatrix q          = qr.householderQ() * DenseMatrix::Identity(dim, dim);
  const DenseMatrix & rr = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex d = rr(j, j);
    const double a  = std::abs(d);
    q.col(j) *= (a > 0.0 ? d / a : Complex(1.0));
  }
  return q;
}

/// Haar-random SU(N): a U(N) sample times det^(-1/N) on the principal branch.
inline DenseMatrix haar_special_unitary(Eigen::Index dim, RngStream & rng)
{
  DenseMatrix u    = haar_unitary(dim, rng);
  const Complex dt = u.determinant();
  u *= std::polar(1.0, -std::arg(dt) / double(dim));
  return u;
}

enum class HaarGroup { Unitary, SpecialUnitary };

inline DenseMatrix haar_sample(HaarGroup g, Eigen::Index dim, RngStream & rng)
{
  return g == HaarGroup::Unitary ? haar_unitary(dim, rng) : haar_special_unitary(dim, rng);
}

using UnitaryProbe = std::function<double(const DenseMatrix &)>;

struct InvarianceReport
{
  static constexpr std::array<const char *, 4> labels{"f(U)", "f(WU)", "f(UW)", "f(U^-1)"};
  std::array<double, 4> means{};
  std::array<double, 4> standard_errors{};
  /// Largest pairwise gap in units of the combined standard error (0 when all gaps vanish).
  double max_gap_in_se{0.0};
  double threshold{5.0};
  std::size_t samples{0};
  bool pass{false};
};

/**
 * @brief Sample means of f(U), f(WU), f(UW), f(U^-1) under Haar draws.
 *
 * Passes iff every pairwise gap is within `threshold` combined standard errors. Sample i uses
 * substream i of `stream`, so the report does not depend on `workers`.
 */
inline InvarianceReport invariance_test(const UnitaryProbe & f, const DenseMatrix & w, std::size_t samples, const RngStream & stream,
                                        HaarGroup group = HaarGroup::Unitary, unsigned workers = 1, double threshold = 5.0)
{
  if (w.rows() != w.cols()) { throw argument_error("invariance_test: W is not square"); }
  using Acc4        = std::array<MomentAccumulator, 4>;
  const auto chunks = parallel_chunks<Acc4>(samples, kDefaultChunk, workers, [&](std::size_t, std::size_t b, std::size_t e) {
    Acc4 acc;
    for (std::size_t i = b; i < e; ++i) {
      auto rng            = stream.substream(i);
      const DenseMatrix u = haar_sample(group, w.rows(), rng);
      acc[0].push(f(u));
      acc[1].push(f(w * u));
      acc[2].push(f(u * w));
      acc[3].push(f(u.adjoint()));
    }
    return acc;
  });
  Acc4 total;
  for (const auto & c : chunks) {
    for (int k = 0; k < 4; ++k) { total[k].merge(c[k]); }
  }

  InvarianceReport rep;
  rep.samples   = samples;
  rep.threshold = threshold;
  rep.pass      = true;
  for (int k = 0; k < 4; ++k) {
    rep.means[k]           = total[k].mean;
    rep.standard_errors[k] = total[k].standard_error_of_mean();
  }
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const double gap = std::abs(rep.means[a] - rep.means[b]);
      const double se  = std::hypot(rep.standard_errors[a], rep.standard_errors[b]);
      if (gap == 0.0) { continue; }
      const double z = se > 0.0 ? gap / se : std::numeric_limits<double>::infinity();
      rep.max_gap_in_se = std::max(rep.max_gap_in_se, z);
      if (!(gap <= threshold * se)) { rep.pass = false; }
    }
  }
  return rep;
}

}  // namespace qgeom
