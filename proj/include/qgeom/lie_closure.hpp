#pragma once

/**
 * @file
 * @brief Dynamical Lie algebra closure, reductive decomposition, projections and g-purities.
 *
 * Hermitian operators stand in for the anti-Hermitian algebra elements: H represents iH, and the
 * bracket [iA, iB] = i(-i[A, B]) is computed as hermitian_bracket(A, B). Inner products are the
 * normalized Hilbert-Schmidt product Tr(AB)/2^n, i.e. the Euclidean product of Pauli coefficients.
 */

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "qgeom/error.hpp"
#include "qgeom/pauli.hpp"
#include "qgeom/rng.hpp"

namespace qgeom {

/// Orthonormal list of Hermitian operators spanning a real subspace of u(2^n).
struct Subspace
{
  unsigned n{0};
  std::vector<HermitianCoeffs> basis;

  std::size_t dim() const { return basis.size(); }
};

/// How a DLA basis element was obtained.
struct BasisProvenance
{
  enum class Kind { Generator, Bracket };
  Kind kind{Kind::Generator};
  int generator{-1};  ///< input position, for Kind::Generator
  int left{-1};       ///< basis positions of the bracket operands, for Kind::Bracket
  int right{-1};
};

struct DlaBasis
{
  unsigned n{0};
  std::vector<HermitianCoeffs> basis;
  std::vector<BasisProvenance> provenance;
  bool exact_pauli_path{false};

  std::size_t dim() const { return basis.size(); }
  Subspace subspace() const { return Subspace{n, basis}; }
};

struct IdealDecomposition
{
  Subspace center;
  std::vector<Subspace> simple_ideals;
  std::uint64_t seed{0};
  int attempts{0};

  std::vector<std::size_t> ideal_dims() const
  {
    std::vector<std::size_t> d;
    for (const auto & s : simple_ideals) { d.push_back(s.dim()); }
    return d;
  }
};

struct ClosureOptions
{
  double admit_tol{1e-8};
  /// Use set membership for single-string generators instead of Gram-Schmidt.
  bool allow_exact_path{true};
};

namespace detail {

/// Modified Gram-Schmidt against an orthonormal basis, applied twice.
inline HermitianCoeffs orthogonalize(HermitianCoeffs v, const std::vector<HermitianCoeffs> & basis)
{
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto & b : basis) {
      const double c = hs_inner(b, v);
      if (c != 0.0) { v.axpy(-c, b); }
    }
    v.prune(0.0);
  }
  return v;
}

inline void require_generators(const std::vector<HermitianCoeffs> & gens)
{
  if (gens.empty()) { throw argument_error("lie_closure: generator list is empty"); }
  for (const auto & g : gens) { gens.front().check(g.qubits()); }
}

/// Coordinates of operators in an orthonormal basis through an inverted Pauli index.
class BasisCoordinates
{
public:
  explicit BasisCoordinates(const std::vector<HermitianCoeffs> & basis) : dim_(basis.size())
  {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (const auto & [k, c] : basis[i].terms()) { index_[k].emplace_back(i, c); }
    }
  }

  Eigen::VectorXd operator()(const HermitianCoeffs & v) const
  {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(Eigen::Index(dim_));
    for (const auto & [k, c] : v.terms()) {
      auto it = index_.find(k);
      if (it == index_.end()) { continue; }
      for (const auto & [i, bc] : it->second) { x(Eigen::Index(i)) += bc * c; }
    }
    return x;
  }

private:
  std::size_t dim_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::size_t, double>>> index_;
};

inline HermitianCoeffs combine(const std::vector<HermitianCoeffs> & basis, const Eigen::Ref<const Eigen::VectorXd> & x, unsigned n)
{
  HermitianCoeffs v(n);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) { v.axpy(x(i), basis[std::size_t(i)]); }
  }
  return v.prune();
}

/// Matrix of ad_y = -i[y, .] in basis coordinates.
inline Eigen::MatrixXd adjoint_matrix(const HermitianCoeffs & y, const std::vector<HermitianCoeffs> & basis, const BasisCoordinates & coords)
{
  const auto d     = Eigen::Index(basis.size());
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) { a.col(i) = coords(hermitian_bracket(y, basis[std::size_t(i)])); }
  return a;
}

inline std::vector<std::size_t> generator_positions(const DlaBasis & dla)
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dla.provenance.size(); ++i) {
    if (dla.provenance[i].kind == BasisProvenance::Kind::Generator) { out.push_back(i); }
  }
  return out;
}

}  // namespace detail

/**
 * @brief Smallest bracket-closed real subspace containing the generators.
 *
 * Breadth-first expansion over pairs of admitted elements. Generators are normalized to unit
 * norm; a bracket is admitted when its residual after orthogonalization exceeds admit_tol.
 * If every generator is a single Pauli string the closure is exact: strings are admitted by set
 * membership and the basis consists of unit-coefficient strings.
 *
 * Throws a guard error (with the partial dimension) when the algebra would exceed max_dim.
 */
inline DlaBasis lie_closure(const std::vector<HermitianCoeffs> & generators, std::size_t max_dim, const ClosureOptions & opt = {})
{
  detail::require_generators(generators);
  if (max_dim < generators.size()) { throw argument_error("lie_closure: max_dim is smaller than the generator count"); }

  DlaBasis dla;
  dla.n = generators.front().qubits();

  const auto overflow = [&] {
    return guard_error("lie_closure: dimension limit " + std::to_string(max_dim) + " exceeded (partial dimension " + std::to_string(dla.dim()) + ")");
  };

  const bool exact = opt.allow_exact_path && std::all_of(generators.begin(), generators.end(), [](const auto & g) { return g.size() == 1; });
  dla.exact_pauli_path = exact;

  if (exact) {
    std::set<std::uint64_t> seen;
    std::vector<PauliString> strings;
    const auto admit = [&](const PauliString & p, BasisProvenance prov) {
      if (!seen.insert(p.index()).second) { return; }
      if (strings.size() == max_dim) { throw overflow(); }
      strings.push_back(p);
      dla.basis.push_back(HermitianCoeffs::single(p));
      dla.provenance.push_back(prov);
    };
    for (std::size_t g = 0; g < generators.size(); ++g) {
      admit(PauliString::from_index(generators[g].terms().begin()->first, dla.n), {BasisProvenance::Kind::Generator, int(g)});
    }
    for (std::size_t i = 0; i < strings.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (auto c = pauli_commutator(strings[j], strings[i])) {
          admit(c->string, {BasisProvenance::Kind::Bracket, -1, int(j), int(i)});
        }
      }
    }
    return dla;
  }

  const auto admit = [&](HermitianCoeffs v, BasisProvenance prov) {
    v               = detail::orthogonalize(std::move(v), dla.basis);
    const double nv = hs_norm(v);
    if (!(nv > opt.admit_tol)) { return; }
    if (dla.dim() == max_dim) { throw overflow(); }
    dla.basis.push_back((1.0 / nv) * v);
    dla.provenance.push_back(prov);
  };
  for (std::size_t g = 0; g < generators.size(); ++g) {
    const double ng = hs_norm(generators[g]);
    if (ng == 0.0) { continue; }
    admit((1.0 / ng) * generators[g], {BasisProvenance::Kind::Generator, int(g)});
  }
  for (std::size_t i = 0; i < dla.basis.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      auto b = hermitian_bracket(dla.basis[j], dla.basis[i]);
      if (!b.empty()) { admit(std::move(b), {BasisProvenance::Kind::Bracket, -1, int(j), int(i)}); }
    }
  }
  return dla;
}

// ---------------------------------------------------------------------------------------------
// Projections and purities
// ---------------------------------------------------------------------------------------------

/// Orthogonal projection onto span(subspace).
inline HermitianCoeffs project_onto(const Subspace & s, const HermitianCoeffs & h)
{
  if (s.n != 0) { h.check(s.n); }
  HermitianCoeffs out(h.qubits());
  for (const auto & b : s.basis) { out.axpy(hs_inner(b, h), b); }
  return out.prune();
}

/// Tr(H_g^2) with the plain (unnormalized) trace.
inline double g_purity(const Subspace & s, const HermitianCoeffs & h)
{
  if (s.n != 0) { h.check(s.n); }
  double acc = 0.0;
  for (const auto & b : s.basis) {
    const double c = hs_inner(b, h);
    acc += c * c;
  }
  return double(dimension_of(h.qubits())) * acc;
}

/// Tr(H^2).
inline double full_purity(const HermitianCoeffs & h) { return double(dimension_of(h.qubits())) * hs_inner(h, h); }

// ---------------------------------------------------------------------------------------------
// Center and ideals
// ---------------------------------------------------------------------------------------------

namespace detail {

struct CenterSplit
{
  Eigen::MatrixXd center;      ///< d x c, orthonormal columns
  Eigen::MatrixXd complement;  ///< d x (d - c)
  std::vector<Eigen::MatrixXd> generator_ads;
};

inline CenterSplit split_center(const DlaBasis & dla, const BasisCoordinates & coords)
{
  const auto d = Eigen::Index(dla.dim());
  CenterSplit out;
  if (d == 0) {
    out.center     = Eigen::MatrixXd(0, 0);
    out.complement = Eigen::MatrixXd(0, 0);
    return out;
  }
  // [x, g] = 0 for every Lie generator g implies x is central.
  auto gens = generator_positions(dla);
  if (gens.empty()) {
    for (std::size_t i = 0; i < dla.dim(); ++i) { gens.push_back(i); }
  }
  Eigen::MatrixXd stacked(Eigen::Index(gens.size()) * d, d);
  for (std::size_t g = 0; g < gens.size(); ++g) {
    out.generator_ads.push_back(adjoint_matrix(dla.basis[gens[g]], dla.basis, coords));
    stacked.middleRows(Eigen::Index(g) * d, d) = out.generator_ads.back();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const auto & sv  = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) >= 1e-8 * top && top > 0.0) { ++rank; }
  }
  out.complement = svd.matrixV().leftCols(rank);
  out.center     = svd.matrixV().rightCols(d - rank);
  return out;
}

inline Eigen::MatrixXd orthonormal_columns_of(const Eigen::MatrixXd & m, double tol)
{
  Eigen::MatrixXd q(m.rows(), 0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::VectorXd v = m.col(j);
    for (int pass = 0; pass < 2; ++pass) { v -= q * (q.transpose() * v); }
    const double nv = v.norm();
    if (nv > tol) {
      q.conservativeResize(Eigen::NoChange, q.cols() + 1);
      q.col(q.cols() - 1) = v / nv;
    }
  }
  return q;
}

/// Smallest subspace containing `seed` and invariant under all `ads`.
inline Eigen::MatrixXd invariant_closure(const Eigen::MatrixXd & seed, const std::vector<Eigen::MatrixXd> & ads, double tol)
{
  Eigen::MatrixXd q = orthonormal_columns_of(seed, tol);
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (const auto & a : ads) {
      Eigen::VectorXd v = a * q.col(j);
      for (int pass = 0; pass < 2; ++pass) { v -= q * (q.transpose() * v); }
      const double nv = v.norm();
      if (nv > tol) {
        q.conservativeResize(Eigen::NoChange, q.cols() + 1);
        q.col(q.cols() - 1) = v / nv;
      }
    }
  }
  return q;
}

inline bool verify_decomposition(const Eigen::MatrixXd & center, const std::vector<Eigen::MatrixXd> & ideals,
                                 const std::vector<Eigen::MatrixXd> & ads, Eigen::Index d, double tol)
{
  Eigen::Index total = center.cols();
  for (const auto & q : ideals) {
    if (q.cols() < 3) { return false; }  // compact simple algebras have dimension >= 3
    total += q.cols();
  }
  if (total != d) { return false; }
  std::vector<const Eigen::MatrixXd *> blocks{&center};
  for (const auto & q : ideals) { blocks.push_back(&q); }
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t b = a + 1; b < blocks.size(); ++b) {
      if (blocks[a]->cols() && blocks[b]->cols() && (blocks[a]->transpose() * *blocks[b]).cwiseAbs().maxCoeff() > tol) { return false; }
    }
  }
  for (const auto & ad : ads) {
    if (center.cols() && (ad * center).cwiseAbs().maxCoeff() > tol) { return false; }
    for (const auto & q : ideals) {
      const Eigen::MatrixXd image = ad * q;
      if ((image - q * (q.transpose() * image)).cwiseAbs().maxCoeff() > tol) { return false; }
    }
  }
  return true;
}

}  // namespace detail

/// Orthonormal basis of the center {x in g : [x, g] = 0}.
inline Subspace center(const DlaBasis & dla)
{
  const detail::BasisCoordinates coords(dla.basis);
  const auto split = detail::split_center(dla, coords);
  Subspace s{dla.n, {}};
  for (Eigen::Index j = 0; j < split.center.cols(); ++j) { s.basis.push_back(detail::combine(dla.basis, split.center.col(j), dla.n)); }
  return s;
}

/**
 * @brief Splits g into its center and simple ideals.
 *
 * The center is removed first. On the semisimple remainder a random element x is drawn and the
 * symmetric operator ad_x^2 (an element of the associative algebra generated by adjoint maps) is
 * diagonalized. Each nonzero eigenspace lies inside one simple ideal, and the smallest
 * ad-invariant subspace containing it is that ideal. The result is checked (orthogonality,
 * spanning, center commuting, ideals invariant); a failed check retries with fresh randomness.
 */
inline IdealDecomposition ideal_decomposition(const DlaBasis & dla, std::uint64_t seed = 0x5eed, int max_attempts = 5)
{
  constexpr double tol = 1e-8;
  const detail::BasisCoordinates coords(dla.basis);
  const auto split = detail::split_center(dla, coords);
  const auto d     = Eigen::Index(dla.dim());

  IdealDecomposition out;
  out.seed   = seed;
  out.center = Subspace{dla.n, {}};
  for (Eigen::Index j = 0; j < split.center.cols(); ++j) { out.center.basis.push_back(detail::combine(dla.basis, split.center.col(j), dla.n)); }

  const Eigen::MatrixXd & vs = split.complement;
  if (vs.cols() == 0) {
    out.attempts = 0;
    return out;
  }

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    RngStream rng(seed, std::uint64_t(attempt));
    Eigen::VectorXd w(vs.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i) { w(i) = rng.normal(); }
    const Eigen::VectorXd x_coords = vs * w;
    const auto x                   = detail::combine(dla.basis, x_coords, dla.n);
    const Eigen::MatrixXd ad_x     = detail::adjoint_matrix(x, dla.basis, coords);
    const Eigen::MatrixXd r        = vs.transpose() * ad_x * vs;
    const Eigen::MatrixXd c        = -(r * r);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose()));
    const auto & mu   = es.eigenvalues();
    const double top  = mu.cwiseAbs().maxCoeff();

    std::vector<Eigen::MatrixXd> ideals;  // full coordinates, d x k
    Eigen::Index i = 0;
    while (i < mu.size()) {
      Eigen::Index j = i + 1;
      while (j < mu.size() && mu(j) - mu(j - 1) <= 1e-6 * top) { ++j; }
      if (mu(i) > 1e-8 * top) {
        Eigen::MatrixXd cluster = vs * es.eigenvectors().middleCols(i, j - i);
        for (const auto & q : ideals) { cluster -= q * (q.transpose() * cluster); }
        if (cluster.cwiseAbs().maxCoeff() > 1e-6) { ideals.push_back(detail::invariant_closure(cluster, split.generator_ads, tol)); }
      }
      i = j;
    }
    // closures seeded from clusters straddling ideals are the union; keep the smallest first
    std::sort(ideals.begin(), ideals.end(), [](const auto & a, const auto & b) { return a.cols() < b.cols(); });
    std::vector<Eigen::MatrixXd> minimal;
    for (auto q : ideals) {
      for (const auto & m : minimal) { q -= m * (m.transpose() * q); }
      q = detail::orthonormal_columns_of(q, 1e-6);
      if (q.cols() > 0) { minimal.push_back(q); }
    }

    if (detail::verify_decomposition(split.center, minimal, split.generator_ads, d, tol)) {
      out.attempts = attempt;
      for (const auto & q : minimal) {
        Subspace s{dla.n, {}};
        for (Eigen::Index col = 0; col < q.cols(); ++col) { s.basis.push_back(detail::combine(dla.basis, q.col(col), dla.n)); }
        out.simple_ideals.push_back(std::move(s));
      }
      return out;
    }
  }
  throw numerical_error("ideal_decomposition: verification failed after " + std::to_string(max_attempts) + " attempts");
}

/// Orthogonal complement residual H - P_g(H); together with the ideal projections it resolves H.
inline HermitianCoeffs complement_part(const DlaBasis & dla, const HermitianCoeffs & h) { return h - project_onto(dla.subspace(), h); }

}  // namespace qgeom
