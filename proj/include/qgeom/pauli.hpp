#pragma once

/**
 * @file
 * @brief Generalized Pauli strings over n qubits and real Pauli expansions of Hermitian operators.
 *
 * A string sigma_k = s_1 (x) s_2 (x) ... (x) s_n is stored as a pair of bit masks.
 * Site j (0-based here, "site j+1" in the text form) occupies bit j of both masks:
 *
 *   (x,z) = (0,0) -> I,  (1,0) -> X,  (1,1) -> Y,  (0,1) -> Z.
 *
 * The integer index is k = sum_j 4^j m_j with m in {I:0, X:1, Y:2, Z:3}, so site 1 is the
 * least-significant base-4 digit. The text form lists site 1 first: "ZX" is Z (x) X and has
 * index 3 + 4*1 = 7. In the dense Kronecker materialization site 1 is the most significant
 * tensor factor.
 */

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgeom/error.hpp"

namespace qgeom {

using Complex     = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;

/// Largest qubit count representable with a 64-bit Pauli index.
inline constexpr unsigned kMaxQubits = 31;

/// Default guard for dense 2^n x 2^n materialization.
inline constexpr unsigned kDefaultDenseQubitLimit = 12;

inline std::uint64_t dimension_of(unsigned n) { return std::uint64_t{1} << n; }
inline std::uint64_t pauli_count(unsigned n) { return std::uint64_t{1} << (2 * n); }

// ---------------------------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------------------------

/// Fourth root of unity, stored as the exponent e in i^e.
enum class Phase : std::uint8_t { One = 0, I = 1, MinusOne = 2, MinusI = 3 };

constexpr Phase phase_from_exponent(int e) { return static_cast<Phase>(((e % 4) + 4) % 4); }
constexpr int exponent(Phase p) { return static_cast<int>(p); }
constexpr Phase operator*(Phase a, Phase b) { return phase_from_exponent(exponent(a) + exponent(b)); }
constexpr Phase operator-(Phase a) { return a * Phase::MinusOne; }
constexpr Phase conj(Phase a) { return phase_from_exponent(-exponent(a)); }

inline Complex to_complex(Phase p)
{
  switch (p) {
    case Phase::One: return {1.0, 0.0};
    case Phase::I: return {0.0, 1.0};
    case Phase::MinusOne: return {-1.0, 0.0};
    case Phase::MinusI: return {0.0, -1.0};
  }
  return {};
}

inline std::string to_string(Phase p)
{
  static constexpr const char * names[] = {"+", "+i", "-", "-i"};
  return names[exponent(p)];
}

// ---------------------------------------------------------------------------------------------
// PauliString
// ---------------------------------------------------------------------------------------------

enum class Letter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

class PauliString
{
public:
  PauliString() = default;

  /// Identity string on n qubits.
  explicit PauliString(unsigned n) : n_(n)
  {
    if (n == 0 || n > kMaxQubits) {
      throw argument_error("qubit count " + std::to_string(n) + " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
  }

  static PauliString from_masks(unsigned n, std::uint64_t x, std::uint64_t z)
  {
    PauliString p(n);
    const std::uint64_t valid = dimension_of(n) - 1;
    if ((x & ~valid) != 0 || (z & ~valid) != 0) { throw argument_error("Pauli masks have bits above the qubit count"); }
    p.x_ = x;
    p.z_ = z;
    return p;
  }

  /// sigma_k on n qubits, k = sum_j 4^j m_j.
  static PauliString from_index(std::uint64_t k, unsigned n)
  {
    PauliString p(n);
    if (k >= pauli_count(n)) {
      throw argument_error("Pauli index " + std::to_string(k) + " out of range for n = " + std::to_string(n));
    }
    for (unsigned j = 0; j < n; ++j) {
      p.set(j, static_cast<Letter>((k >> (2 * j)) & 3u));
    }
    return p;
  }

  /// Parse letters over {I,X,Y,Z}; the first letter is site 1.
  static PauliString parse(std::string_view text)
  {
    if (text.empty()) { throw argument_error("empty Pauli string"); }
    PauliString p(static_cast<unsigned>(text.size()));
    for (unsigned j = 0; j < text.size(); ++j) {
      switch (text[j]) {
        case 'I': case 'i': case '_': p.set(j, Letter::I); break;
        case 'X': case 'x': p.set(j, Letter::X); break;
        case 'Y': case 'y': p.set(j, Letter::Y); break;
        case 'Z': case 'z': p.set(j, Letter::Z); break;
        default: throw argument_error("invalid Pauli letter '" + std::string(1, text[j]) + "' in \"" + std::string(text) + "\"");
      }
    }
    return p;
  }

  unsigned qubits() const { return n_; }
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }

  Letter letter(unsigned site) const
  {
    const bool x = (x_ >> site) & 1u;
    const bool z = (z_ >> site) & 1u;
    if (x) { return z ? Letter::Y : Letter::X; }
    return z ? Letter::Z : Letter::I;
  }

  void set(unsigned site, Letter l)
  {
    const std::uint64_t bit = std::uint64_t{1} << site;
    x_ &= ~bit;
    z_ &= ~bit;
    if (l == Letter::X || l == Letter::Y) { x_ |= bit; }
    if (l == Letter::Z || l == Letter::Y) { z_ |= bit; }
  }

  std::uint64_t index() const
  {
    std::uint64_t k = 0;
    for (unsigned j = 0; j < n_; ++j) { k |= std::uint64_t(static_cast<unsigned>(letter(j))) << (2 * j); }
    return k;
  }

  /// Number of non-identity tensor factors.
  unsigned weight() const { return static_cast<unsigned>(std::popcount(x_ | z_)); }

  bool is_identity() const { return (x_ | z_) == 0; }

  std::string str() const
  {
    static constexpr char letters[] = {'I', 'X', 'Y', 'Z'};
    std::string s(n_, 'I');
    for (unsigned j = 0; j < n_; ++j) { s[j] = letters[static_cast<unsigned>(letter(j))]; }
    return s;
  }

  friend bool operator==(const PauliString &, const PauliString &) = default;
  friend auto operator<=>(const PauliString & a, const PauliString & b)
  {
    if (auto c = a.n_ <=> b.n_; c != 0) { return c; }
    return a.index() <=> b.index();
  }

private:
  unsigned n_{0};
  std::uint64_t x_{0};
  std::uint64_t z_{0};
};

inline PauliString pauli_from_index(std::uint64_t k, unsigned n) { return PauliString::from_index(k, n); }
inline unsigned pauli_weight(const PauliString & p) { return p.weight(); }

/// Phase times string. `scale` is a positive integer multiplier (2 for commutators).
struct PhasedPauli
{
  Phase phase{Phase::One};
  PauliString string;
  int scale{1};

  Complex coefficient() const { return double(scale) * to_complex(phase); }

  friend bool operator==(const PhasedPauli &, const PhasedPauli &) = default;
};

namespace detail {

inline void require_same_size(const PauliString & p, const PauliString & q)
{
  if (p.qubits() != q.qubits()) {
    throw argument_error("mismatched qubit counts: " + std::to_string(p.qubits()) + " vs " + std::to_string(q.qubits()));
  }
}

// Each string is i^{|x&z|} X^x Z^z, which makes products a parity count.
inline int y_count(const PauliString & p) { return std::popcount(p.x_mask() & p.z_mask()); }

}  // namespace detail

/// True iff the symplectic form vanishes.
inline bool commutes(const PauliString & p, const PauliString & q)
{
  detail::require_same_size(p, q);
  const auto overlap = (p.x_mask() & q.z_mask()) ^ (p.z_mask() & q.x_mask());
  return std::popcount(overlap) % 2 == 0;
}

/// Exact product p*q.
inline PhasedPauli pauli_product(const PauliString & p, const PauliString & q)
{
  detail::require_same_size(p, q);
  const auto r = PauliString::from_masks(p.qubits(), p.x_mask() ^ q.x_mask(), p.z_mask() ^ q.z_mask());
  // Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
  const int e = detail::y_count(p) + detail::y_count(q) + 2 * std::popcount(p.z_mask() & q.x_mask()) - detail::y_count(r);
  return PhasedPauli{phase_from_exponent(e), r, 1};
}

/// pq - qp, or nothing when p and q commute. The result carries scale 2: pq - qp = 2 * phase * string.
inline std::optional<PhasedPauli> pauli_commutator(const PauliString & p, const PauliString & q)
{
  if (commutes(p, q)) { return std::nullopt; }
  auto pq  = pauli_product(p, q);
  pq.scale = 2;
  return pq;
}

// ---------------------------------------------------------------------------------------------
// Dense materialization
// ---------------------------------------------------------------------------------------------

namespace detail {

// Site j is matrix bit (n-1-j): site 1 is the leading Kronecker factor.
inline std::uint64_t matrix_mask(std::uint64_t site_mask, unsigned n)
{
  std::uint64_t m = 0;
  for (unsigned j = 0; j < n; ++j) {
    if ((site_mask >> j) & 1u) { m |= std::uint64_t{1} << (n - 1 - j); }
  }
  return m;
}

inline void require_dense(unsigned n, unsigned limit)
{
  if (n > limit) {
    throw guard_error("dense materialization of " + std::to_string(n) + " qubits exceeds the limit of " + std::to_string(limit));
  }
}

/// Visits the single nonzero entry in each column: f(row, col, value).
template<typename F>
void for_each_entry(const PauliString & p, F && f)
{
  const unsigned n        = p.qubits();
  const std::uint64_t mx  = matrix_mask(p.x_mask(), n);
  const std::uint64_t mz  = matrix_mask(p.z_mask(), n);
  const Complex base      = to_complex(phase_from_exponent(y_count(p)));
  const std::uint64_t dim = dimension_of(n);
  for (std::uint64_t c = 0; c < dim; ++c) {
    const double sign = (std::popcount(mz & c) & 1) ? -1.0 : 1.0;
    f(c ^ mx, c, sign * base);
  }
}

}  // namespace detail

inline DenseMatrix materialize(const PauliString & p, unsigned max_qubits = kDefaultDenseQubitLimit)
{
  detail::require_dense(p.qubits(), max_qubits);
  const auto dim = static_cast<Eigen::Index>(dimension_of(p.qubits()));
  DenseMatrix m  = DenseMatrix::Zero(dim, dim);
  detail::for_each_entry(p, [&](std::uint64_t r, std::uint64_t c, Complex v) { m(Eigen::Index(r), Eigen::Index(c)) = v; });
  return m;
}

// ---------------------------------------------------------------------------------------------
// HermitianCoeffs
// ---------------------------------------------------------------------------------------------

/**
 * @brief Real expansion H = sum_k r^k sigma_k, stored sparsely by Pauli index.
 *
 * Arithmetic helpers return pruned values (|r^k| > prune tolerance). The coefficient at k = 0
 * multiplies the identity; H is traceless iff it is absent.
 */
class HermitianCoeffs
{
public:
  static constexpr double kDefaultPrune = 1e-12;
  using Map                             = std::map<std::uint64_t, double>;

  HermitianCoeffs() = default;
  explicit HermitianCoeffs(unsigned n) : n_(n)
  {
    if (n == 0 || n > kMaxQubits) { throw argument_error("qubit count " + std::to_string(n) + " out of range"); }
  }

  static HermitianCoeffs single(const PauliString & p, double c = 1.0)
  {
    HermitianCoeffs h(p.qubits());
    h.add(p, c);
    return h.pruned();
  }

  /// Sum of (text, coefficient) terms; repeated strings accumulate.
  static HermitianCoeffs from_terms(unsigned n, const std::vector<std::pair<std::string, double>> & terms)
  {
    HermitianCoeffs h(n);
    for (const auto & [text, c] : terms) {
      const auto p = PauliString::parse(text);
      if (p.qubits() != n) { throw argument_error("term \"" + text + "\" does not have " + std::to_string(n) + " qubits"); }
      h.add(p, c);
    }
    return h.pruned();
  }

  unsigned qubits() const { return n_; }
  const Map & terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  double operator[](std::uint64_t k) const
  {
    auto it = terms_.find(k);
    return it == terms_.end() ? 0.0 : it->second;
  }
  double operator[](const PauliString & p) const { return (*this)[p.index()]; }
  double operator[](std::string_view text) const
  {
    const auto p = PauliString::parse(text);
    check(p.qubits());
    return (*this)[p.index()];
  }

  void add(std::uint64_t k, double c)
  {
    if (k >= pauli_count(n_)) { throw argument_error("Pauli index out of range"); }
    terms_[k] += c;
  }
  void add(const PauliString & p, double c)
  {
    check(p.qubits());
    add(p.index(), c);
  }
  void set(std::uint64_t k, double c)
  {
    if (k >= pauli_count(n_)) { throw argument_error("Pauli index out of range"); }
    terms_[k] = c;
  }
  void erase(std::uint64_t k) { terms_.erase(k); }

  /// Accumulate s * other.
  void axpy(double s, const HermitianCoeffs & other)
  {
    check(other.n_);
    for (const auto & [k, c] : other.terms_) { terms_[k] += s * c; }
  }

  HermitianCoeffs & prune(double tol = kDefaultPrune)
  {
    std::erase_if(terms_, [tol](const auto & kv) { return !(std::abs(kv.second) > tol); });
    return *this;
  }
  HermitianCoeffs pruned(double tol = kDefaultPrune) const
  {
    HermitianCoeffs h = *this;
    h.prune(tol);
    return h;
  }

  double identity_component() const { return (*this)[0]; }
  bool is_traceless(double tol = kDefaultPrune) const { return std::abs(identity_component()) <= tol; }

  /// Copy with the identity coefficient removed.
  HermitianCoeffs traceless_part() const
  {
    HermitianCoeffs h = *this;
    h.terms_.erase(0);
    return h;
  }

  void check(unsigned other) const
  {
    if (other != n_) {
      throw argument_error("mismatched qubit counts: " + std::to_string(n_) + " vs " + std::to_string(other));
    }
  }

  std::string str() const
  {
    if (terms_.empty()) { return "0"; }
    std::string out;
    char buf[64];
    for (const auto & [k, c] : terms_) {
      std::snprintf(buf, sizeof buf, "%s%.17g*", out.empty() ? "" : " + ", c);
      out += buf;
      out += PauliString::from_index(k, n_).str();
    }
    return out;
  }

private:
  unsigned n_{0};
  Map terms_;
};

/// Normalized Hilbert-Schmidt inner product Tr(AB)/2^n = sum_k a_k b_k.
inline double hs_inner(const HermitianCoeffs & a, const HermitianCoeffs & b)
{
  a.check(b.qubits());
  const auto & small = a.size() <= b.size() ? a : b;
  const auto & large = a.size() <= b.size() ? b : a;
  double s           = 0.0;
  for (const auto & [k, c] : small.terms()) {
    auto it = large.terms().find(k);
    if (it != large.terms().end()) { s += c * it->second; }
  }
  return s;
}

inline double hs_norm(const HermitianCoeffs & a) { return std::sqrt(hs_inner(a, a)); }

inline HermitianCoeffs operator+(const HermitianCoeffs & a, const HermitianCoeffs & b)
{
  HermitianCoeffs r = a;
  r.axpy(1.0, b);
  return r.prune();
}
inline HermitianCoeffs operator-(const HermitianCoeffs & a, const HermitianCoeffs & b)
{
  HermitianCoeffs r = a;
  r.axpy(-1.0, b);
  return r.prune();
}
inline HermitianCoeffs operator*(double s, const HermitianCoeffs & a)
{
  HermitianCoeffs r(a.qubits());
  r.axpy(s, a);
  return r.prune();
}

/// Hermitian bracket -i[A, B]; maps pairs of Hermitian operators to a Hermitian operator.
inline HermitianCoeffs hermitian_bracket(const HermitianCoeffs & a, const HermitianCoeffs & b)
{
  a.check(b.qubits());
  const unsigned n = a.qubits();
  HermitianCoeffs out(n);
  for (const auto & [ka, ca] : a.terms()) {
    const auto pa = PauliString::from_index(ka, n);
    for (const auto & [kb, cb] : b.terms()) {
      const auto pb = PauliString::from_index(kb, n);
      if (commutes(pa, pb)) { continue; }
      // [pa, pb] = 2 i^e s with e odd, so -i * 2 i^e = 2 i^{e-1} is +-2.
      const auto pq   = pauli_product(pa, pb);
      const double sg = (exponent(pq.phase) == 1) ? 2.0 : -2.0;
      out.add(pq.string.index(), sg * ca * cb);
    }
  }
  return out.prune();
}

inline DenseMatrix materialize(const HermitianCoeffs & h, unsigned max_qubits = kDefaultDenseQubitLimit)
{
  detail::require_dense(h.qubits(), max_qubits);
  const auto dim = static_cast<Eigen::Index>(dimension_of(h.qubits()));
  DenseMatrix m  = DenseMatrix::Zero(dim, dim);
  for (const auto & [k, c] : h.terms()) {
    detail::for_each_entry(PauliString::from_index(k, h.qubits()),
                           [&](std::uint64_t r, std::uint64_t col, Complex v) { m(Eigen::Index(r), Eigen::Index(col)) += c * v; });
  }
  return m;
}

inline unsigned qubits_of_dimension(Eigen::Index dim)
{
  if (dim < 2 || (dim & (dim - 1)) != 0) { throw argument_error("matrix dimension " + std::to_string(dim) + " is not 2^n"); }
  return static_cast<unsigned>(std::countr_zero(static_cast<std::uint64_t>(dim)));
}

/// Maximum absolute entry of H - H^dagger.
inline double hermiticity_defect(const DenseMatrix & h) { return (h - h.adjoint()).cwiseAbs().maxCoeff(); }

/// Trace projection r^k = Tr(H sigma_k) / 2^n over all 4^n strings.
inline HermitianCoeffs decompose_hermitian(const DenseMatrix & h, double hermitian_tol = 1e-10,
                                           double prune_tol = HermitianCoeffs::kDefaultPrune)
{
  if (h.rows() != h.cols()) { throw argument_error("decompose_hermitian: matrix is not square"); }
  const unsigned n = qubits_of_dimension(h.rows());
  if (const double d = hermiticity_defect(h); !(d <= hermitian_tol)) {
    throw argument_error("decompose_hermitian: input is not Hermitian (defect " + std::to_string(d) + ")");
  }
  const double inv_dim = 1.0 / double(dimension_of(n));
  HermitianCoeffs out(n);
  for (std::uint64_t k = 0; k < pauli_count(n); ++k) {
    const auto p = PauliString::from_index(k, n);
    Complex tr{};
    // Tr(H sigma) = sum_c H(c, r) sigma(r, c)
    detail::for_each_entry(p, [&](std::uint64_t r, std::uint64_t c, Complex v) { tr += h(Eigen::Index(c), Eigen::Index(r)) * v; });
    const double re = tr.real() * inv_dim;
    if (std::abs(re) > prune_tol) { out.set(k, re); }
  }
  return out;
}

}  // namespace qgeom
