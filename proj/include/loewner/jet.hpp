#pragma once

#include <map>
#include <memory>
#include <vector>

#include "loewner/types.hpp"

namespace loewner {

/// Exponent vector of a monomial z^alpha; one entry per coordinate.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& alpha);

/// Canonical monomial basis {z^alpha : 1 <= |alpha| <= degree} in graded
/// lexicographic order, with a truncated product table shared by all jets
/// of matching dimension and degree.
class JetBasis {
 public:
  JetBasis(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& index(int col) const { return indices_[col]; }

  /// Column of alpha, or -1 when alpha is not in the basis.
  int find(const MultiIndex& alpha) const;

  /// Column of index(a) + index(b), or -1 when the product degree exceeds
  /// the truncation degree.
  int product(int a, int b) const { return product_[a][b]; }

  static std::shared_ptr<const JetBasis> get(int dim, int degree);

 private:
  int dim_;
  int degree_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, int> lookup_;
  std::vector<std::vector<int>> product_;
};

/// Truncated Taylor expansion at the origin of a map C^n -> C^n with no
/// constant term. Row k of the coefficient table holds component k over
/// the basis monomials.
class Jet {
 public:
  Jet(int dim, int degree);

  static Jet identity(int dim, int degree);

  int dim() const { return basis_->dim(); }
  int degree() const { return basis_->degree(); }
  const JetBasis& basis() const { return *basis_; }
  std::shared_ptr<const JetBasis> basis_ptr() const { return basis_; }

  const CMat& table() const { return table_; }
  CMat& table() { return table_; }

  /// Stored coefficient; zero for absent monomials. Throws when |alpha|
  /// is outside [1, degree].
  Cplx coeff(int component, const MultiIndex& alpha) const;
  void set_coeff(int component, const MultiIndex& alpha, Cplx value);
  void add_coeff(int component, const MultiIndex& alpha, Cplx value);

  CVec eval(const CVec& z) const;

  /// Exact term-wise holomorphic Jacobian at z.
  CMat jacobian(const CVec& z) const;

  /// Re-expands over a basis of the given degree (drops or zero-pads).
  Jet truncated(int new_degree) const;

  double max_abs_coeff() const;

  Jet& operator+=(const Jet& other);
  Jet& operator-=(const Jet& other);
  Jet& operator*=(Cplx factor);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Cplx c, Jet a) { return a *= c; }

 private:
  std::shared_ptr<const JetBasis> basis_;
  CMat table_;  // dim x basis size
};

/// Coefficients of outer(inner(z)) truncated at min(degrees); exact through
/// that degree because inner has no constant term.
Jet jet_compose(const Jet& outer, const Jet& inner);
Jet jet_compose(const Jet& outer, const Jet& inner, int degree);

/// Coefficient extraction with range checking on |alpha|.
Cplx coefficient(const Jet& j, const MultiIndex& alpha, int component);

/// Matrix-valued truncated expansion M(z) = M_0 + sum_alpha M_alpha z^alpha,
/// constant term allowed. Used for Jacobians of jets and their inverses.
class MatrixJet {
 public:
  MatrixJet(int dim, int degree);

  static MatrixJet identity(int dim, int degree);

  int dim() const { return basis_->dim(); }
  int degree() const { return basis_->degree(); }
  const JetBasis& basis() const { return *basis_; }

  const CMat& constant() const { return terms_[0]; }
  CMat& constant() { return terms_[0]; }
  /// Coefficient of basis monomial col (0-based into the jet basis).
  const CMat& term(int col) const { return terms_[col + 1]; }
  CMat& term(int col) { return terms_[col + 1]; }

  MatrixJet operator*(const MatrixJet& other) const;

  /// M(z) * v(z) truncated at min(degrees); v has no constant term, so the
  /// result is again a Jet.
  Jet apply(const Jet& v) const;

  /// Truncated Neumann-series inverse; requires an invertible constant term.
  MatrixJet inverse() const;

  MatrixJet truncated(int new_degree) const;

 private:
  std::shared_ptr<const JetBasis> basis_;
  std::vector<CMat> terms_;  // index 0 = constant, col + 1 = basis monomial
};

/// Jacobian of a degree-d jet as a matrix jet of degree d-1.
MatrixJet jacobian_jet(const Jet& j);

}  // namespace loewner
