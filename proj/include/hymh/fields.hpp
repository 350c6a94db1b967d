#pragma once

#include "hymh/grid.hpp"

#include <Eigen/Dense>

#include <utility>

namespace hymh {

/// An r x r matrix attached to every grid point.
///
/// Endomorphisms of the trivialised bundle use the row convention: a section is
/// a row vector s = (s^1, ..., s^r) and P acts by s -> s P, so P[a][b] = P_a^b.
/// With that convention the composition "P . Q" of the bundle calculus is the
/// plain matrix product P * Q. A metric h is stored as the Hermitian matrix
/// h[a][b] = h(e_a, e_b), so h(s, t) = s h t^dagger.
template <typename Scalar>
class BasicMatrixField {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Block = Eigen::Map<Matrix>;
  using ConstBlock = Eigen::Map<const Matrix>;

  BasicMatrixField() = default;
  BasicMatrixField(GridSpec grid, int rank)
      : grid_(std::move(grid)),
        rank_(rank),
        data_(Vector::Zero(static_cast<Eigen::Index>(grid_.size()) * rank * rank)) {
    if (rank < 1) throw std::invalid_argument("BasicMatrixField: rank must be positive");
  }

  static BasicMatrixField constant(const GridSpec& grid, const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("BasicMatrixField::constant: matrix must be square");
    BasicMatrixField out(grid, static_cast<int>(m.rows()));
    for (std::size_t p = 0; p < grid.size(); ++p) out.at(p) = m;
    return out;
  }
  static BasicMatrixField identity(const GridSpec& grid, int rank) {
    return constant(grid, Matrix::Identity(rank, rank));
  }

  /// Samples `f(std::span<const double> x) -> Matrix` at every grid point.
  template <typename F>
  static BasicMatrixField sample(const GridSpec& grid, int rank, F&& f) {
    BasicMatrixField out(grid, rank);
    std::vector<double> x(grid.axes());
    for (std::size_t p = 0; p < grid.size(); ++p) {
      grid.coordinates(p, x);
      out.at(p) = f(std::span<const double>(x));
    }
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  int rank() const { return rank_; }
  std::size_t points() const { return grid_.size(); }
  /// A default-constructed field stands for the zero field in sparse containers.
  bool empty() const { return data_.size() == 0; }

  Block at(std::size_t p) { return Block(data_.data() + offset(p), rank_, rank_); }
  ConstBlock at(std::size_t p) const { return ConstBlock(data_.data() + offset(p), rank_, rank_); }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  BasicGridField<Scalar> component(int a, int b) const {
    BasicGridField<Scalar> out(grid_);
    for (std::size_t p = 0; p < points(); ++p) out[p] = at(p)(a, b);
    return out;
  }
  void set_component(int a, int b, const BasicGridField<Scalar>& f) {
    require_same_grid(grid_, f.grid(), "set_component");
    for (std::size_t p = 0; p < points(); ++p) at(p)(a, b) = f[p];
  }

  BasicMatrixField& operator+=(const BasicMatrixField& o) {
    check_shape(o, "matrix field +=");
    data_ += o.data_;
    return *this;
  }
  BasicMatrixField& operator-=(const BasicMatrixField& o) {
    check_shape(o, "matrix field -=");
    data_ -= o.data_;
    return *this;
  }
  BasicMatrixField& operator*=(Scalar c) {
    data_ *= c;
    return *this;
  }
  friend BasicMatrixField operator+(BasicMatrixField a, const BasicMatrixField& b) { return a += b; }
  friend BasicMatrixField operator-(BasicMatrixField a, const BasicMatrixField& b) { return a -= b; }
  friend BasicMatrixField operator-(BasicMatrixField a) { return a *= Scalar(-1); }
  friend BasicMatrixField operator*(BasicMatrixField a, Scalar c) { return a *= c; }
  friend BasicMatrixField operator*(Scalar c, BasicMatrixField a) { return a *= c; }

  void check_shape(const BasicMatrixField& o, const char* where) const {
    require_same_grid(grid_, o.grid_, where);
    if (rank_ != o.rank_) throw std::invalid_argument(std::string(where) + ": rank mismatch");
  }

 private:
  Eigen::Index offset(std::size_t p) const {
    return static_cast<Eigen::Index>(p) * rank_ * rank_;
  }

  GridSpec grid_;
  int rank_ = 0;
  Vector data_;
};

using MatrixField = BasicMatrixField<Complex>;
using CMatrix = Eigen::MatrixXcd;

/// Applies `f(p, out_block)` at every point of a fresh field of the given shape.
template <typename F>
MatrixField generate(const GridSpec& grid, int rank, F&& f) {
  MatrixField out(grid, rank);
  for (std::size_t p = 0; p < grid.size(); ++p) f(p, out.at(p));
  return out;
}

/// Hermitian positive-definite metric field h (h[a][b] = h(e_a, e_b)).
class HermitianMetricField {
 public:
  HermitianMetricField() = default;
  /// Validates pointwise Hermiticity (1e-12 relative) and positivity (min eigenvalue > floor).
  explicit HermitianMetricField(MatrixField h, double floor = 0.0);

  const MatrixField& matrix() const { return h_; }
  const GridSpec& grid() const { return h_.grid(); }
  int rank() const { return h_.rank(); }
  MatrixField::ConstBlock at(std::size_t p) const { return h_.at(p); }
  /// Pointwise inverse h^{-1}.
  const MatrixField& inverse() const { return inv_; }
  /// Pointwise lower Cholesky factor L with h = L L^dagger.
  const MatrixField& cholesky() const { return chol_; }

 private:
  MatrixField h_, inv_, chol_;
};

/// Pointwise matrix product A * B ("A . B" in the bundle calculus).
MatrixField endo_product(const MatrixField& A, const MatrixField& B);
/// Pointwise product with a scalar field.
MatrixField scale(const ScalarField& f, const MatrixField& A);
/// Pointwise matrix inverse.
MatrixField inverse(const MatrixField& A);
/// Pointwise conjugate transpose.
MatrixField conjugate_transpose(const MatrixField& A);
/// h-adjoint A* = h A^dagger h^{-1}, so that h(A s, t) = h(s, A* t).
MatrixField adjoint(const MatrixField& A, const HermitianMetricField& h);
/// (A + A*)/2 with respect to h.
MatrixField hermitian_part(const MatrixField& A, const HermitianMetricField& h);
/// Pointwise trace.
ScalarField trace(const MatrixField& A);
/// Pointwise pairing h(A, B) = tr(A h B^dagger h^{-1}) on endomorphisms.
ScalarField pairing(const MatrixField& A, const MatrixField& B, const HermitianMetricField& h);

/// Pointwise min / max eigenvalue of an h-self-adjoint endomorphism.
struct EigenBounds {
  ScalarField min;
  ScalarField max;
};
/// Throws std::domain_error if A is not h-self-adjoint within 1e-9 relative.
EigenBounds herm_eig_bounds(const MatrixField& A, const HermitianMetricField& h);

/// General pointwise matrix exponential.
MatrixField matrix_exp(const MatrixField& S);
/// Exponential of an h-self-adjoint endomorphism via Hermitian diagonalisation.
MatrixField exp_self_adjoint(const MatrixField& S, const HermitianMetricField& h);
/// Logarithm of an h-self-adjoint positive endomorphism. Throws std::domain_error
/// if any eigenvalue is not positive.
MatrixField matrix_log(const MatrixField& H, const HermitianMetricField& h);
/// Logarithm of a Hermitian positive-definite metric (identity reference).
MatrixField matrix_log(const HermitianMetricField& H);

/// Max over the grid of the h-operator norm of A.
double sup_norm(const MatrixField& A, const HermitianMetricField& h);
/// Max over the grid of the Frobenius norm of A (frame norm, no metric).
double sup_frobenius(const MatrixField& A);
/// Max over the grid of |A - A*|_F / max(|A|_F, tiny) with respect to h.
double self_adjointness_defect(const MatrixField& A, const HermitianMetricField& h);

}  // namespace hymh
