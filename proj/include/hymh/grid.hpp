#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hymh {

using Complex = std::complex<double>;

/// Periodic uniform grid on the real 2n-torus underlying a complex n-torus.
///
/// Real axes are ordered (x_1, y_1, ..., x_n, y_n) with z^i = x_i + i y_i.
/// Storage is row-major over the axes: axis 0 varies slowest.
class GridSpec {
 public:
  GridSpec() = default;
  /// Throws std::invalid_argument unless n in {1,2}, N >= 8 is a power of two
  /// and all periods are positive. An empty period list means 2*pi per axis.
  GridSpec(int n, int N, std::vector<double> periods = {});

  int n() const { return n_; }
  int N() const { return N_; }
  int axes() const { return 2 * n_; }
  std::size_t size() const { return size_; }
  double period(int axis) const { return periods_.at(axis); }
  const std::vector<double>& periods() const { return periods_; }
  /// Product of all periods (Lebesgue volume of the fundamental domain).
  double volume() const;
  std::size_t stride(int axis) const { return strides_.at(axis); }
  /// Integer index of point `flat` along `axis`.
  int index(std::size_t flat, int axis) const {
    return static_cast<int>((flat / strides_[axis]) % static_cast<std::size_t>(N_));
  }
  double coordinate(std::size_t flat, int axis) const {
    return periods_[axis] * index(flat, axis) / N_;
  }
  /// Fills `x` (size axes()) with the coordinates of point `flat`.
  void coordinates(std::size_t flat, std::span<double> x) const;

  bool operator==(const GridSpec& other) const {
    return n_ == other.n_ && N_ == other.N_ && periods_ == other.periods_;
  }
  bool operator!=(const GridSpec& other) const { return !(*this == other); }

 private:
  int n_ = 0;
  int N_ = 0;
  std::size_t size_ = 0;
  std::vector<double> periods_;
  std::vector<std::size_t> strides_;
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

/// One value per grid point.
template <typename Scalar>
class BasicGridField {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicGridField() = default;
  explicit BasicGridField(GridSpec grid)
      : grid_(std::move(grid)), values_(Vector::Zero(static_cast<Eigen::Index>(grid_.size()))) {}
  BasicGridField(GridSpec grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.size()) != grid_.size())
      throw std::invalid_argument("BasicGridField: value count does not match grid");
  }

  static BasicGridField constant(const GridSpec& grid, Scalar c) {
    return BasicGridField(grid, Vector::Constant(static_cast<Eigen::Index>(grid.size()), c));
  }

  /// Samples `f(std::span<const double> x)` at every grid point.
  template <typename F>
  static BasicGridField sample(const GridSpec& grid, F&& f) {
    BasicGridField out(grid);
    std::vector<double> x(grid.axes());
    for (std::size_t p = 0; p < grid.size(); ++p) {
      grid.coordinates(p, x);
      out.values_[static_cast<Eigen::Index>(p)] = static_cast<Scalar>(f(std::span<const double>(x)));
    }
    return out;
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }
  bool empty() const { return values_.size() == 0; }
  Vector& values() { return values_; }
  const Vector& values() const { return values_; }
  Scalar& operator[](std::size_t p) { return values_[static_cast<Eigen::Index>(p)]; }
  Scalar operator[](std::size_t p) const { return values_[static_cast<Eigen::Index>(p)]; }

  BasicGridField& operator+=(const BasicGridField& o) {
    require_same_grid(grid_, o.grid_, "field +=");
    values_ += o.values_;
    return *this;
  }
  BasicGridField& operator-=(const BasicGridField& o) {
    require_same_grid(grid_, o.grid_, "field -=");
    values_ -= o.values_;
    return *this;
  }
  BasicGridField& operator*=(Scalar c) {
    values_ *= c;
    return *this;
  }
  friend BasicGridField operator+(BasicGridField a, const BasicGridField& b) { return a += b; }
  friend BasicGridField operator-(BasicGridField a, const BasicGridField& b) { return a -= b; }
  friend BasicGridField operator*(BasicGridField a, Scalar c) { return a *= c; }
  friend BasicGridField operator*(Scalar c, BasicGridField a) { return a *= c; }
  /// Pointwise product.
  friend BasicGridField operator*(const BasicGridField& a, const BasicGridField& b) {
    require_same_grid(a.grid_, b.grid_, "field *");
    return BasicGridField(a.grid_, a.values_.cwiseProduct(b.values_));
  }

 private:
  GridSpec grid_;
  Vector values_;
};

using ScalarField = BasicGridField<Complex>;

ScalarField conj(const ScalarField& f);
ScalarField exp(const ScalarField& f);
double sup_abs(const ScalarField& f);

// ---------------------------------------------------------------------------
// Spectral machinery. All transforms are unnormalised forward / 1/N inverse.

/// In-place multidimensional forward DFT over every axis. With howmany > 1 the
/// data holds that many fields interleaved point by point.
void fft_forward(const GridSpec& grid, std::span<Complex> data, int howmany = 1);
/// In-place multidimensional inverse DFT (includes the 1/size factor).
void fft_inverse(const GridSpec& grid, std::span<Complex> data, int howmany = 1);

/// Wavenumber of Fourier index `m` along `axis`; the Nyquist mode maps to 0
/// for first derivatives (`first_derivative = true`).
double wavenumber(const GridSpec& grid, int axis, int m, bool first_derivative);

/// Fourier symbols of d/dz^i (holomorphic = true) or d/dzbar^i along complex axis i.
Eigen::VectorXcd complex_derivative_symbol(const GridSpec& grid, int i, bool holomorphic);

/// Spectral derivative along real axis `axis` (0-based, < 2n).
ScalarField partial_axis(const ScalarField& f, int axis);
/// d f / d z^i = (d_x - i d_y)/2 along complex axis i (0-based, < n).
ScalarField partial_z(const ScalarField& f, int i);
/// d f / d zbar^i = (d_x + i d_y)/2 along complex axis i (0-based, < n).
ScalarField partial_zbar(const ScalarField& f, int i);

/// All 2n complex first derivatives from a single forward transform:
/// result[k] is d/dz^k for k < n and d/dzbar^(k-n) otherwise.
std::vector<ScalarField> complex_gradient(const ScalarField& f);

/// Uniform-grid mean of f * volume_form times the period volume.
Complex integrate(const ScalarField& f, const ScalarField& volume_form);
Complex integrate(const ScalarField& f);

/// Fourier symbol of the constant-coefficient Laplacian g^{i jbar} d_i d_jbar.
Eigen::VectorXcd laplacian_symbol(const GridSpec& grid, const Eigen::MatrixXcd& g0);
/// Constant-coefficient Laplacian g^{i jbar} d_i d_jbar, applied by Fourier symbol.
/// `g0` holds g_{i jbar} as an n x n Hermitian positive-definite matrix.
ScalarField flat_laplacian(const ScalarField& f, const Eigen::MatrixXcd& g0);

/// Zero-mean solution u of flat_laplacian(u, g0) = f. Throws std::domain_error
/// when the mean of f exceeds 1e-10 relative to its sup norm.
ScalarField invert_laplacian(const ScalarField& f, const Eigen::MatrixXcd& g0);

/// Applies (c - flat_laplacian)^{-1}; c > 0. Used as a Krylov preconditioner.
void apply_shifted_inverse(const GridSpec& grid, const Eigen::MatrixXcd& g0, double c,
                           std::span<Complex> data);

}  // namespace hymh
