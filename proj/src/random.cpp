#include "hymh/random.hpp"

#include <cmath>

namespace hymh {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::value(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return splitmix(splitmix(splitmix(seed) ^ stream) + counter);
}

CMatrix random_matrix(CounterRng& rng, int rank, double amp) {
  CMatrix m(rank, rank);
  for (int a = 0; a < rank; ++a)
    for (int b = 0; b < rank; ++b) m(a, b) = rng.complex_uniform(-amp, amp);
  return m;
}

CMatrix random_hermitian(CounterRng& rng, int rank, double amp) {
  const CMatrix m = random_matrix(rng, rank, amp);
  return 0.5 * (m + m.adjoint());
}

CMatrix random_hpd(CounterRng& rng, int rank, double lo, double hi) {
  const CMatrix q = random_matrix(rng, rank).householderQr().householderQ();
  Eigen::VectorXcd ev(rank);
  for (int k = 0; k < rank; ++k) ev[k] = rng.uniform(lo, hi);
  CMatrix out = q * ev.asDiagonal() * q.adjoint();
  return 0.5 * (out + out.adjoint());
}

ScalarField random_trig_polynomial(const GridSpec& grid, CounterRng& rng, int kmax, double amp, bool real) {
  const int axes = grid.axes();
  if (kmax < 0 || 2 * kmax >= grid.N()) throw std::invalid_argument("random_trig_polynomial: kmax must be below N/2");
  const int width = 2 * kmax + 1;
  int total = 1;
  for (int a = 0; a < axes; ++a) total *= width;
  ScalarField out(grid);
  auto& spec = out.values();
  for (int m = 0; m < total; ++m) {
    int rest = m, norm2 = 0;
    std::size_t flat = 0;
    for (int a = axes - 1; a >= 0; --a) {
      const int k = rest % width - kmax;
      rest /= width;
      norm2 += k * k;
      flat += static_cast<std::size_t>((k + grid.N()) % grid.N()) * grid.stride(a);
    }
    spec[static_cast<Eigen::Index>(flat)] += rng.complex_uniform(-1.0, 1.0) * (amp / (1.0 + norm2));
  }
  spec *= static_cast<double>(grid.size());
  fft_inverse(grid, std::span<Complex>(spec.data(), grid.size()));
  if (real) spec = spec.real().cast<Complex>();
  return out;
}

MatrixField random_matrix_field(const GridSpec& grid, int rank, CounterRng& rng, int kmax, double amp) {
  MatrixField out(grid, rank);
  for (int a = 0; a < rank; ++a)
    for (int b = 0; b < rank; ++b) out.set_component(a, b, random_trig_polynomial(grid, rng, kmax, amp, false));
  return out;
}

MatrixField random_hermitian_field(const GridSpec& grid, int rank, CounterRng& rng, int kmax, double amp) {
  const MatrixField m = random_matrix_field(grid, rank, rng, kmax, amp);
  MatrixField out = m + conjugate_transpose(m);
  out *= Complex(0.5);
  return out;
}

HermitianMetricField random_metric(const GridSpec& grid, int rank, CounterRng& rng, int kmax, double amp) {
  MatrixField s = random_hermitian_field(grid, rank, rng, kmax, 1.0);
  const double sup = sup_frobenius(s);
  if (sup > 0.0) s *= Complex(amp / sup);
  MatrixField h = matrix_exp(s);
  // Remove rounding asymmetry so the metric passes the strict Hermitian check.
  h = h + conjugate_transpose(h);
  h *= Complex(0.5);
  return HermitianMetricField(std::move(h));
}

}  // namespace hymh
