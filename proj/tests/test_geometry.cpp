#include "doctest.h"

#include "hymh/geometry.hpp"
#include "hymh/random.hpp"

#include <cmath>

using namespace hymh;

TEST_CASE("metric classification") {
  const GridSpec g1(1, 16), g2(2, 8);
  const MetricFlags id = classify(BaseMetric::identity(g2));
  CHECK(id.is_constant);
  CHECK(id.is_kahler);
  CHECK(id.is_gauduchon);

  const ScalarField u1 = ScalarField::sample(g1, [](std::span<const double> x) { return 0.3 * std::cos(x[0]); });
  const MetricFlags c1 = classify(BaseMetric::conformal(u1, CMatrix::Identity(1, 1)));
  CHECK(!c1.is_constant);
  CHECK(c1.is_kahler);

  const ScalarField u2 = ScalarField::sample(g2, [](std::span<const double> x) { return 0.3 * std::cos(x[0]); });
  const MetricFlags c2 = classify(BaseMetric::conformal(u2, CMatrix::Identity(2, 2)));
  CHECK(!c2.is_kahler);
  CHECK(!c2.is_gauduchon);
}

TEST_CASE("volume densities") {
  const GridSpec g(2, 8);
  CMatrix g0(2, 2);
  g0 << 2.0, Complex(0.2, 0.1), Complex(0.2, -0.1), 1.0;
  const BaseMetric m = BaseMetric::constant(g, g0);
  const double det = g0.determinant().real();
  CHECK(m.volume_density()[0].real() == doctest::Approx(4 * det));
  CHECK(m.omega_n_density()[0].real() == doctest::Approx(8 * det));
  // g^{i jbar} g_{k jbar} = delta_ik
  const CMatrix gu = m.gup().at(0);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      Complex s = 0.0;
      for (int j = 0; j < 2; ++j) s += gu(i, j) * g0(k, j);
      CHECK(std::abs(s - (i == k ? 1.0 : 0.0)) < 1e-14);
    }
}

TEST_CASE("lambda contraction normalization") {
  const GridSpec g(2, 8);
  CMatrix g0 = CMatrix::Zero(2, 2);
  g0(0, 0) = 2.0;
  g0(1, 1) = 5.0;
  const BaseMetric m = BaseMetric::constant(g, g0);
  CMatrix M(2, 2);
  M << 1.0, Complex(0, 2), 3.0, 4.0;
  FormMatrixField F(g, 2, 2);
  F.set(mixed_index(2, 0, 0), MatrixField::constant(g, M));
  CHECK(sup_frobenius(lambda_contract(F, m) - MatrixField::constant(g, M / 2.0)) < 1e-14);
}

TEST_CASE("lambda of d'd'' f is the Laplacian") {
  const GridSpec g(2, 16);
  CounterRng rng(2);
  const ScalarField u = random_trig_polynomial(g, rng, 1, 0.3, true);
  const BaseMetric m = BaseMetric::conformal(u, random_hpd(rng, 2, 0.8, 1.4));
  const ScalarField f = random_trig_polynomial(g, rng, 2, 1.0, true);
  const MatrixField F = scale(f, MatrixField::identity(g, 1));
  const MatrixField lhs = lambda_contract(del(delbar(as_form(F))), m);
  CHECK(sup_abs(lhs.component(0, 0) - laplacian(f, m)) < 1e-12);
  // Conformal metric: Delta_g = e^{-u} Delta_{g0}.
  CHECK(sup_abs(laplacian(f, m) - exp(u * Complex(-1.0)) * flat_laplacian(f, m.g0())) < 1e-12);
}

TEST_CASE("laplacian anchor and zero mean") {
  const GridSpec g(1, 32);
  const BaseMetric m = BaseMetric::identity(g);
  const ScalarField c = ScalarField::sample(g, [](std::span<const double> x) { return std::cos(x[0]); });
  CHECK(sup_abs(laplacian(c, m) + c * Complex(0.25)) < 1e-13);
  CHECK(sup_abs(laplacian(ScalarField::constant(g, 3.0), m)) < 1e-14);

  const GridSpec g2(2, 16);
  CounterRng rng(3);
  const BaseMetric m2 = BaseMetric::constant(g2, random_hpd(rng, 2, 0.5, 2.0));
  const ScalarField f = random_trig_polynomial(g2, rng, 2, 1.0, true);
  const double vol = integrate(ScalarField::constant(g2, 1.0), m2.volume_density()).real();
  CHECK(std::abs(integrate(laplacian(f, m2), m2.volume_density())) < 1e-14 * vol);
}

TEST_CASE("torsion of a conformal metric against the symbolic formula") {
  const GridSpec g(2, 32);
  const ScalarField u = ScalarField::sample(g, [](std::span<const double> x) { return 0.4 * std::sin(x[0]); });
  const BaseMetric m = BaseMetric::conformal(u, CMatrix::Identity(2, 2));
  const TorsionTensor t = torsion(m);
  // d/dz1 u = (1/2) d_x1 u
  const ScalarField du = ScalarField::sample(g, [](std::span<const double> x) { return 0.2 * std::cos(x[0]); });
  const ScalarField zero(g);
  // Theta^k_{ij} = d_i u delta_jk - d_j u delta_ik
  CHECK(sup_abs(t.theta[1][0][1] - du) < 1e-12);
  CHECK(sup_abs(t.theta[1][1][0] + du) < 1e-12);
  CHECK(sup_abs(t.theta[0][0][1] - zero) < 1e-12);
  CHECK(sup_abs(t.theta[0][1][0] - zero) < 1e-12);
  // tau_i = (n - 1) d_i u
  CHECK(sup_abs(t.tau[0] - du) < 1e-12);
  CHECK(sup_abs(t.tau[1]) < 1e-12);

  CHECK(torsion(BaseMetric::identity(g)).sup() == 0.0);
  const GridSpec g1(1, 16);
  const ScalarField u1 = ScalarField::sample(g1, [](std::span<const double> x) { return 0.3 * std::cos(x[1]); });
  CHECK(torsion(BaseMetric::conformal(u1, CMatrix::Identity(1, 1))).sup() < 1e-14);
}
