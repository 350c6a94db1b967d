#include "doctest.h"

#include "hymh/forms.hpp"
#include "hymh/random.hpp"

#include <cmath>

using namespace hymh;

namespace {

MatrixField scalar_field(const ScalarField& f) { return scale(f, MatrixField::identity(f.grid(), 1)); }

double sup_diff(const MatrixField& a, const MatrixField& b) { return sup_frobenius(a - b); }

}  // namespace

TEST_CASE("basis bookkeeping") {
  CHECK(form_basis_count(1, 1) == 2);
  CHECK(form_basis_count(2, 2) == 6);
  CHECK(pair_index(2, 0, 1) == 0);
  CHECK(pair_index(2, 2, 3) == 5);
  CHECK(mixed_index(2, 1, 0) == pair_index(2, 1, 2));
  const GridSpec g(2, 8);
  FormMatrixField F(g, 1, 2);
  const MatrixField one = MatrixField::identity(g, 1);
  F.add_pair(3, 1, one);
  CHECK(sup_diff(F.pair(1, 3), -one) == 0.0);
}

TEST_CASE("derivatives: constants, holomorphic modes and batches") {
  const GridSpec g(2, 16);
  const MatrixField c = MatrixField::constant(g, CMatrix::Constant(2, 2, Complex(1.5, -0.5)));
  for (int k = 0; k < 4; ++k) CHECK(sup_frobenius(derivative(c, k)) < 1e-14);

  // f = e^{i x1} does not depend on y1, so d/dz1 f = (1/2) d_x1 f.
  const ScalarField f = ScalarField::sample(g, [](std::span<const double> x) { return std::exp(Complex(0, x[0])); });
  CHECK(sup_abs(partial_z(f, 0) - f * Complex(0, 0.5)) < 1e-13);

  CounterRng rng(3);
  const MatrixField A = random_matrix_field(g, 2, rng, 2, 1.0);
  const auto all = gradient(A);
  const auto some = derivatives(A, {3, 1});
  CHECK(sup_diff(some[0], derivative(A, 3)) < 1e-14);
  CHECK(sup_diff(some[1], all[1]) < 1e-14);
  // Entrywise agreement with the scalar derivative.
  CHECK(sup_abs(all[2].component(0, 1) - partial_zbar(A.component(0, 1), 0)) < 1e-13);
}

TEST_CASE("wedge of scalar one-forms is antisymmetric") {
  const GridSpec g(2, 8);
  CounterRng rng(4);
  std::vector<MatrixField> a, b;
  for (int i = 0; i < 2; ++i) {
    a.push_back(scalar_field(random_trig_polynomial(g, rng, 1, 1.0, false)));
    b.push_back(scalar_field(random_trig_polynomial(g, rng, 1, 1.0, false)));
  }
  const FormMatrixField alpha = holomorphic_one_form(a);
  const FormMatrixField beta = antiholomorphic_one_form(b);
  FormMatrixField sum = wedge(alpha, beta);
  sum += wedge(beta, alpha);
  CHECK(sup_frobenius(sum) < 1e-15);
  // dz1 ^ dzbar1 coefficient is a1 b1.
  CHECK(sup_diff(wedge(alpha, beta).get(mixed_index(2, 0, 0)), endo_product(a[0], b[0])) < 1e-15);
  // alpha ^ alpha = 0 for commuting coefficients.
  CHECK(sup_frobenius(wedge(alpha, alpha)) < 1e-15);
}

TEST_CASE("matrix wedge keeps the composition order") {
  const GridSpec g(1, 8);
  CMatrix e12 = CMatrix::Zero(2, 2), e21 = CMatrix::Zero(2, 2);
  e12(0, 1) = 1.0;
  e21(1, 0) = 1.0;
  const FormMatrixField P = holomorphic_one_form({MatrixField::constant(g, e12)});
  const FormMatrixField Q = antiholomorphic_one_form({MatrixField::constant(g, e21)});
  const MatrixField pq = wedge(P, Q).get(0);
  CHECK(std::abs(pq.at(0)(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(pq.at(0)(1, 1)) < 1e-15);
}

TEST_CASE("exterior derivatives square to zero and anticommute") {
  const GridSpec g(2, 16);
  CounterRng rng(5);
  const MatrixField A = random_matrix_field(g, 2, rng, 2, 1.0);
  const FormMatrixField a = as_form(A);
  CHECK(sup_frobenius(del(del(a))) < 1e-12);
  CHECK(sup_frobenius(delbar(delbar(a))) < 1e-12);
  FormMatrixField s = del(delbar(a));
  s += delbar(del(a));
  CHECK(sup_frobenius(s) < 1e-12);
  // d'' on functions is the dzbar gradient; dzbar^2 is basis element 3.
  const FormMatrixField db = delbar(a);
  CHECK(sup_diff(db.get(3), derivative(A, 3)) < 1e-14);
  CHECK(!db.has(0));
}

TEST_CASE("graded action on degree-0 forms is a commutator") {
  const GridSpec g(1, 8);
  CounterRng rng(6);
  const MatrixField B = random_matrix_field(g, 2, rng, 1, 1.0);
  const MatrixField P = random_matrix_field(g, 2, rng, 1, 1.0);
  const FormMatrixField Bf = holomorphic_one_form({B});
  const FormMatrixField act = graded_action(Bf, as_form(P));
  // (-1)^0 P.B - B.P
  CHECK(sup_diff(act.get(0), endo_product(P, B) - endo_product(B, P)) < 1e-14);
}
