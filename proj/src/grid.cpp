#include "hymh/grid.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <numbers>

namespace hymh {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// In-place plans for `howmany` interleaved fields, one per (N, axes, direction, howmany).
fftw_plan plan_for(const GridSpec& grid, int sign, int howmany) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int, int>, fftw_plan> plans;
  const std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_tuple(grid.N(), grid.axes(), sign, howmany);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  std::vector<int> dims(grid.axes(), grid.N());
  std::vector<fftw_complex> scratch(grid.size() * howmany);
  fftw_plan plan = fftw_plan_many_dft(grid.axes(), dims.data(), howmany, scratch.data(), nullptr, howmany, 1,
                                      scratch.data(), nullptr, howmany, 1, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan) throw std::runtime_error("fft: planning failed");
  plans.emplace(key, plan);
  return plan;
}

void transform(const GridSpec& grid, std::span<Complex> data, int sign, int howmany) {
  if (howmany < 1 || data.size() != grid.size() * howmany)
    throw std::invalid_argument("fft: data size does not match grid");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_for(grid, sign, howmany), ptr, ptr);
}

// Applies a per-mode multiplier sym[q] to the spectrum of f.
ScalarField apply_symbol(const ScalarField& f, const Eigen::VectorXcd& sym) {
  ScalarField out = f;
  std::span<Complex> d(out.values().data(), out.size());
  fft_forward(f.grid(), d);
  out.values().array() *= sym.array();
  fft_inverse(f.grid(), d);
  return out;
}

}  // namespace

GridSpec::GridSpec(int n, int N, std::vector<double> periods) : n_(n), N_(N), periods_(std::move(periods)) {
  if (n != 1 && n != 2) throw std::invalid_argument("GridSpec: complex dimension must be 1 or 2");
  if (N < 8 || !is_power_of_two(N)) throw std::invalid_argument("GridSpec: N must be a power of two >= 8");
  if (periods_.empty()) periods_.assign(2 * n, 2.0 * std::numbers::pi);
  if (static_cast<int>(periods_.size()) != 2 * n) throw std::invalid_argument("GridSpec: need 2n periods");
  for (double L : periods_)
    if (!(L > 0.0)) throw std::invalid_argument("GridSpec: periods must be positive");
  strides_.assign(2 * n, 1);
  for (int a = 2 * n - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * static_cast<std::size_t>(N);
  size_ = strides_[0] * static_cast<std::size_t>(N);
}

double GridSpec::volume() const {
  double v = 1.0;
  for (double L : periods_) v *= L;
  return v;
}

void GridSpec::coordinates(std::size_t flat, std::span<double> x) const {
  for (int a = 0; a < axes(); ++a) x[a] = coordinate(flat, a);
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (a != b) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

ScalarField conj(const ScalarField& f) { return ScalarField(f.grid(), f.values().conjugate()); }

ScalarField exp(const ScalarField& f) { return ScalarField(f.grid(), f.values().array().exp().matrix()); }

double sup_abs(const ScalarField& f) { return f.values().size() ? f.values().cwiseAbs().maxCoeff() : 0.0; }

void fft_forward(const GridSpec& grid, std::span<Complex> data, int howmany) {
  transform(grid, data, FFTW_FORWARD, howmany);
}

void fft_inverse(const GridSpec& grid, std::span<Complex> data, int howmany) {
  transform(grid, data, FFTW_BACKWARD, howmany);
  const double inv = 1.0 / static_cast<double>(grid.size());
  for (Complex& z : data) z *= inv;
}

double wavenumber(const GridSpec& grid, int axis, int m, bool first_derivative) {
  const int N = grid.N();
  if (first_derivative && m == N / 2) return 0.0;
  const int signed_m = m < N / 2 ? m : m - N;
  return 2.0 * std::numbers::pi * signed_m / grid.period(axis);
}

Eigen::VectorXcd complex_derivative_symbol(const GridSpec& grid, int i, bool holomorphic) {
  if (i < 0 || i >= grid.n()) throw std::out_of_range("complex axis index out of range");
  static std::mutex mutex;
  static std::map<std::tuple<int, int, std::vector<double>, int, bool>, Eigen::VectorXcd> cache;
  const auto key = std::make_tuple(grid.N(), grid.n(), grid.periods(), i, holomorphic);
  {
    const std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const int ax = 2 * i, ay = 2 * i + 1;
  std::vector<double> kx(grid.N()), ky(grid.N());
  for (int m = 0; m < grid.N(); ++m) {
    kx[m] = wavenumber(grid, ax, m, true);
    ky[m] = wavenumber(grid, ay, m, true);
  }
  const Complex I(0.0, 1.0);
  const double s = holomorphic ? 1.0 : -1.0;
  Eigen::VectorXcd sym(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t q = 0; q < grid.size(); ++q) {
    // d/dz = (ik_x + k_y)/2, d/dzbar = (ik_x - k_y)/2
    sym[static_cast<Eigen::Index>(q)] = 0.5 * (I * kx[grid.index(q, ax)] + s * ky[grid.index(q, ay)]);
  }
  const std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, sym);
  return sym;
}

ScalarField partial_axis(const ScalarField& f, int axis) {
  const GridSpec& grid = f.grid();
  if (axis < 0 || axis >= grid.axes()) throw std::out_of_range("partial_axis: axis out of range");
  Eigen::VectorXcd sym(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t q = 0; q < grid.size(); ++q)
    sym[static_cast<Eigen::Index>(q)] = Complex(0.0, wavenumber(grid, axis, grid.index(q, axis), true));
  return apply_symbol(f, sym);
}

ScalarField partial_z(const ScalarField& f, int i) {
  return apply_symbol(f, complex_derivative_symbol(f.grid(), i, true));
}

ScalarField partial_zbar(const ScalarField& f, int i) {
  return apply_symbol(f, complex_derivative_symbol(f.grid(), i, false));
}

std::vector<ScalarField> complex_gradient(const ScalarField& f) {
  const GridSpec& grid = f.grid();
  const int n = grid.n();
  Eigen::VectorXcd spec = f.values();
  fft_forward(grid, std::span<Complex>(spec.data(), grid.size()));
  std::vector<ScalarField> out;
  out.reserve(2 * n);
  for (int k = 0; k < 2 * n; ++k) {
    const bool holo = k < n;
    Eigen::VectorXcd d = spec.cwiseProduct(complex_derivative_symbol(grid, holo ? k : k - n, holo));
    fft_inverse(grid, std::span<Complex>(d.data(), grid.size()));
    out.emplace_back(grid, std::move(d));
  }
  return out;
}

Complex integrate(const ScalarField& f, const ScalarField& volume_form) {
  require_same_grid(f.grid(), volume_form.grid(), "integrate");
  return f.values().cwiseProduct(volume_form.values()).mean() * f.grid().volume();
}

Complex integrate(const ScalarField& f) { return f.values().mean() * f.grid().volume(); }

Eigen::VectorXcd laplacian_symbol(const GridSpec& grid, const Eigen::MatrixXcd& g0) {
  const int n = grid.n();
  if (g0.rows() != n || g0.cols() != n) throw std::invalid_argument("flat_laplacian: metric shape");
  const Eigen::MatrixXcd ginv = g0.inverse();
  Eigen::VectorXcd sym = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.size()));
  std::vector<Eigen::VectorXcd> dz(n), dzb(n);
  for (int i = 0; i < n; ++i) {
    dz[i] = complex_derivative_symbol(grid, i, true);
    dzb[i] = complex_derivative_symbol(grid, i, false);
  }
  // g^{i jbar} = (g^{-1})_{j i}
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sym.array() += ginv(j, i) * dz[i].array() * dzb[j].array();
  return sym;
}

ScalarField flat_laplacian(const ScalarField& f, const Eigen::MatrixXcd& g0) {
  return apply_symbol(f, laplacian_symbol(f.grid(), g0));
}

ScalarField invert_laplacian(const ScalarField& f, const Eigen::MatrixXcd& g0) {
  const GridSpec& grid = f.grid();
  const Eigen::VectorXcd sym = laplacian_symbol(grid, g0);
  const double scale = std::max(1.0, sup_abs(f));
  if (std::abs(f.values().mean()) > 1e-10 * scale)
    throw std::domain_error("invert_laplacian: right-hand side has nonzero mean");
  ScalarField out = f;
  std::span<Complex> d(out.values().data(), out.size());
  fft_forward(grid, d);
  for (std::size_t q = 0; q < grid.size(); ++q) {
    const Complex s = sym[static_cast<Eigen::Index>(q)];
    d[q] = std::abs(s) > 1e-14 ? d[q] / s : Complex(0.0);
  }
  fft_inverse(grid, d);
  return out;
}

void apply_shifted_inverse(const GridSpec& grid, const Eigen::MatrixXcd& g0, double c, std::span<Complex> data) {
  thread_local GridSpec cached_grid;
  thread_local Eigen::MatrixXcd cached_g0;
  thread_local Eigen::VectorXcd cached_sym;
  if (cached_grid != grid || cached_g0.rows() != g0.rows() || cached_g0.cols() != g0.cols() || cached_g0 != g0) {
    cached_sym = laplacian_symbol(grid, g0);
    cached_grid = grid;
    cached_g0 = g0;
  }
  fft_forward(grid, data);
  for (std::size_t q = 0; q < grid.size(); ++q) data[q] /= (c - cached_sym[static_cast<Eigen::Index>(q)]);
  fft_inverse(grid, data);
}

}  // namespace hymh
