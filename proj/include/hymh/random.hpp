#pragma once

#include "hymh/fields.hpp"

#include <cstdint>

namespace hymh {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so streams can be split without shared state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  static std::uint64_t value(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

  std::uint64_t next() { return value(seed_, stream_, counter_++); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  Complex complex_uniform(double a, double b) { return {uniform(a, b), uniform(a, b)}; }
  /// Independent child stream.
  CounterRng split(std::uint64_t k) const { return CounterRng(seed_, value(seed_, stream_, ~k)); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

/// Random constant matrices with entries uniform in [-amp, amp] (real and imaginary parts).
CMatrix random_matrix(CounterRng& rng, int rank, double amp = 1.0);
/// Hermitian with entries bounded by amp.
CMatrix random_hermitian(CounterRng& rng, int rank, double amp = 1.0);
/// Hermitian positive definite with eigenvalues in [lo, hi].
CMatrix random_hpd(CounterRng& rng, int rank, double lo, double hi);

/// sum over |k|_inf <= kmax of c_k e^{i k.x}; real-valued when `real` is set.
/// Coefficients decay like amp / (1 + |k|^2).
ScalarField random_trig_polynomial(const GridSpec& grid, CounterRng& rng, int kmax, double amp, bool real);

/// Matrix field whose entries are random trigonometric polynomials.
MatrixField random_matrix_field(const GridSpec& grid, int rank, CounterRng& rng, int kmax, double amp);
/// Pointwise Hermitian field (w.r.t. the identity) built from trigonometric polynomials.
MatrixField random_hermitian_field(const GridSpec& grid, int rank, CounterRng& rng, int kmax, double amp);

/// exp of a random Hermitian trigonometric field, rescaled so the exponent has
/// sup Frobenius norm `amp`; positive definite by construction.
HermitianMetricField random_metric(const GridSpec& grid, int rank, CounterRng& rng, int kmax, double amp);

}  // namespace hymh
