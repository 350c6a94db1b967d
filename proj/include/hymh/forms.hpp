#pragma once

#include "hymh/fields.hpp"

#include <vector>

namespace hymh {

/// Endomorphism-valued differential form of total degree 0, 1 or 2.
///
/// 1-form basis e_k: dz^k for k < n, dzbar^(k-n) for k >= n.
/// 2-form basis: e_a ^ e_b for a < b, enumerated lexicographically.
/// Components left empty stand for zero.
class FormMatrixField {
 public:
  FormMatrixField() = default;
  FormMatrixField(GridSpec grid, int rank, int degree);

  const GridSpec& grid() const { return grid_; }
  int rank() const { return rank_; }
  int degree() const { return degree_; }
  int count() const { return static_cast<int>(comp_.size()); }

  bool has(int k) const { return !comp_.at(k).empty(); }
  /// Component k; a zero field if unset.
  MatrixField get(int k) const;
  const MatrixField& ref(int k) const { return comp_.at(k); }
  void set(int k, MatrixField m);
  /// comp[k] += sign * m
  void add(int k, const MatrixField& m, Complex sign = 1.0);
  /// Adds sign * m to the coefficient of e_a ^ e_b (any order; a == b is ignored).
  void add_pair(int a, int b, const MatrixField& m, Complex sign = 1.0);
  /// Coefficient of e_a ^ e_b for arbitrary a != b (antisymmetric extension).
  MatrixField pair(int a, int b) const;

  FormMatrixField& operator+=(const FormMatrixField& o);
  FormMatrixField& operator-=(const FormMatrixField& o);
  FormMatrixField& operator*=(Complex c);
  friend FormMatrixField operator+(FormMatrixField a, const FormMatrixField& b) { return a += b; }
  friend FormMatrixField operator-(FormMatrixField a, const FormMatrixField& b) { return a -= b; }

 private:
  GridSpec grid_;
  int rank_ = 0;
  int degree_ = 0;
  std::vector<MatrixField> comp_;
};

int form_basis_count(int n, int degree);
/// Index of e_a ^ e_b (a < b) in the 2-form basis.
int pair_index(int n, int a, int b);
/// Index of dz^i ^ dzbar^j.
inline int mixed_index(int n, int i, int j) { return pair_index(n, i, n + j); }

/// Degree-0 form wrapping a matrix field.
FormMatrixField as_form(const MatrixField& m);
/// (1,0)-form sum_i c_i dz^i.
FormMatrixField holomorphic_one_form(const std::vector<MatrixField>& c);
/// (0,1)-form sum_j c_j dzbar^j.
FormMatrixField antiholomorphic_one_form(const std::vector<MatrixField>& c);

/// Wedge-composition P . Q: coefficients multiply as matrices, forms wedge.
FormMatrixField wedge(const FormMatrixField& P, const FormMatrixField& Q);
/// Matrix-field product from the left / right on every component.
FormMatrixField left_multiply(const MatrixField& A, const FormMatrixField& P);
FormMatrixField right_multiply(const FormMatrixField& P, const MatrixField& A);

/// Entrywise spectral derivative of a matrix field along basis direction k
/// (d/dz^k for k < n, d/dzbar^(k-n) otherwise).
MatrixField derivative(const MatrixField& A, int k);
/// Derivatives along several directions sharing one forward transform per entry.
std::vector<MatrixField> derivatives(const MatrixField& A, const std::vector<int>& dirs);
/// All 2n derivatives at once.
std::vector<MatrixField> gradient(const MatrixField& A);

/// Exterior d' and d'' (flat, no connection) on forms of degree 0 or 1.
FormMatrixField del(const FormMatrixField& P);
FormMatrixField delbar(const FormMatrixField& P);

/// Graded commutator action ad_B(P) = (-1)^p P . B - B . P of a 1-form B.
FormMatrixField graded_action(const FormMatrixField& B, const FormMatrixField& P);

/// Max over components of sup_frobenius.
double sup_frobenius(const FormMatrixField& P);

}  // namespace hymh
