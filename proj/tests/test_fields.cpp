#include "doctest.h"

#include "hymh/fields.hpp"
#include "hymh/random.hpp"

#include <cmath>

using namespace hymh;

namespace {

GridSpec small_grid() { return GridSpec(1, 8); }

// h-orthonormal rows: h = L L^dagger, so the rows of L^{-1} are orthonormal.
CMatrix orthonormal_rows(const CMatrix& h) {
  const CMatrix L = h.llt().matrixL();
  return L.inverse();
}

// sum_a h(e_a A, e_a B) over an h-orthonormal frame, with h(s, t) = s h t^dagger.
Complex brute_pairing(const CMatrix& A, const CMatrix& B, const CMatrix& h) {
  const CMatrix E = orthonormal_rows(h);
  Complex acc = 0.0;
  for (Eigen::Index a = 0; a < E.rows(); ++a) {
    const Eigen::RowVectorXcd e = E.row(a);
    acc += (e * A * h * (e * B).adjoint())(0, 0);
  }
  return acc;
}

// Real roots of det(A - lambda) by sign changes and bisection.
std::vector<double> charpoly_roots(const CMatrix& A, double bound) {
  auto f = [&](double x) { return (A - x * CMatrix::Identity(A.rows(), A.cols())).determinant().real(); };
  std::vector<double> roots;
  const int samples = 20000;
  double x0 = -bound, f0 = f(x0);
  for (int k = 1; k <= samples; ++k) {
    const double x1 = -bound + 2 * bound * k / samples, f1 = f(x1);
    if (f0 == 0.0) roots.push_back(x0);
    if (f0 * f1 < 0.0) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if (flo * fm <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

// h-operator norm of s -> s A by power iteration on M M^dagger, M = L^{-1} A L.
double power_norm(const CMatrix& A, const CMatrix& h) {
  const CMatrix L = h.llt().matrixL();
  const CMatrix M = L.inverse() * A * L;
  const CMatrix K = M * M.adjoint();
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(K.rows());
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const Eigen::VectorXcd w = K * v;
    lambda = w.norm() / v.norm();
    v = w / w.norm();
  }
  return std::sqrt(lambda);
}

}  // namespace

TEST_CASE("metric field validation") {
  const GridSpec g = small_grid();
  CMatrix m(2, 2);
  m << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(HermitianMetricField(MatrixField::constant(g, m)), std::domain_error);
  m << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(HermitianMetricField(MatrixField::constant(g, m)), std::domain_error);
  CounterRng rng(4);
  const HermitianMetricField h = random_metric(g, 3, rng, 1, 0.5);
  for (std::size_t p = 0; p < g.size(); ++p)
    CHECK((h.at(p) * h.inverse().at(p) - CMatrix::Identity(3, 3)).norm() < 1e-13);
}

TEST_CASE("composition convention") {
  const GridSpec g = small_grid();
  CounterRng rng(1);
  const MatrixField A = random_matrix_field(g, 2, rng, 1, 1.0);
  const MatrixField I = MatrixField::identity(g, 2);
  CHECK(sup_frobenius(endo_product(A, I) - A) == 0.0);
  CMatrix e12 = CMatrix::Zero(2, 2), e21 = CMatrix::Zero(2, 2), e11 = CMatrix::Zero(2, 2);
  e12(0, 1) = 1.0;
  e21(1, 0) = 1.0;
  e11(0, 0) = 1.0;
  const MatrixField prod = endo_product(MatrixField::constant(g, e12), MatrixField::constant(g, e21));
  CHECK(sup_frobenius(prod - MatrixField::constant(g, e11)) == 0.0);
  const MatrixField B = random_matrix_field(g, 2, rng, 1, 1.0);
  const MatrixField AB = endo_product(A, B);
  for (std::size_t p = 0; p < g.size(); p += 7) CHECK((AB.at(p) - A.at(p) * B.at(p)).norm() < 1e-14);
}

TEST_CASE("adjoint and pairing against brute-force inner products") {
  const GridSpec g = small_grid();
  CounterRng rng(2);
  const HermitianMetricField h = random_metric(g, 3, rng, 1, 0.6);
  const MatrixField A = random_matrix_field(g, 3, rng, 1, 1.0);
  const MatrixField B = random_matrix_field(g, 3, rng, 1, 1.0);
  const MatrixField As = adjoint(A, h);
  const ScalarField pr = pairing(A, B, h);
  // h-self-adjoint P built from a Hermitian K.
  const MatrixField P = endo_product(random_hermitian_field(g, 3, rng, 1, 1.0), h.inverse());
  CHECK(self_adjointness_defect(P, h) < 1e-13);
  const MatrixField PA = endo_product(P, A), PB = endo_product(P, B);
  for (std::size_t p = 0; p < g.size(); p += 5) {
    const CMatrix hp = h.at(p);
    // h(sA, t) = h(s, t A*)
    const Eigen::RowVectorXcd s = Eigen::RowVectorXcd::Random(3), t = Eigen::RowVectorXcd::Random(3);
    const Complex lhs = (s * A.at(p) * hp * t.adjoint())(0, 0);
    const Complex rhs = (s * hp * (t * As.at(p)).adjoint())(0, 0);
    CHECK(std::abs(lhs - rhs) < 1e-12);
    CHECK(std::abs(pr[p] - brute_pairing(A.at(p), B.at(p), hp)) < 1e-12);
    CHECK(std::abs(brute_pairing(PA.at(p), B.at(p), hp) - brute_pairing(A.at(p), PB.at(p), hp)) < 1e-12);
  }
}

TEST_CASE("eigenvalue bounds") {
  const GridSpec g = small_grid();
  CounterRng rng(3);
  const HermitianMetricField h = random_metric(g, 2, rng, 1, 0.5);
  const EigenBounds c = herm_eig_bounds(MatrixField::identity(g, 2) * Complex(2.5), h);
  CHECK(sup_abs(c.min - ScalarField::constant(g, 2.5)) < 1e-13);
  CHECK(sup_abs(c.max - ScalarField::constant(g, 2.5)) < 1e-13);

  const HermitianMetricField id(MatrixField::identity(g, 2));
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  const EigenBounds b = herm_eig_bounds(MatrixField::constant(g, d), id);
  CHECK(b.min[0].real() == doctest::Approx(1.0));
  CHECK(b.max[0].real() == doctest::Approx(3.0));

  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(herm_eig_bounds(MatrixField::constant(g, bad), id), std::domain_error);
}

TEST_CASE("3x3 pencil against characteristic polynomial roots") {
  const GridSpec g = small_grid();
  CounterRng rng(5);
  const HermitianMetricField h = random_metric(g, 3, rng, 1, 0.7);
  const MatrixField A = endo_product(random_hermitian_field(g, 3, rng, 1, 1.0), h.inverse());
  const EigenBounds eb = herm_eig_bounds(A, h);
  for (std::size_t p : {std::size_t{0}, std::size_t{13}, std::size_t{40}}) {
    const std::vector<double> roots = charpoly_roots(A.at(p), 20.0);
    REQUIRE(roots.size() == 3);
    CHECK(eb.min[p].real() == doctest::Approx(roots.front()).epsilon(1e-10));
    CHECK(eb.max[p].real() == doctest::Approx(roots.back()).epsilon(1e-10));
  }
}

TEST_CASE("matrix exponential and logarithm") {
  const GridSpec g = small_grid();
  CounterRng rng(6);
  const HermitianMetricField h = random_metric(g, 3, rng, 1, 0.4);
  const MatrixField zero(g, 3);
  CHECK(sup_frobenius(exp_self_adjoint(zero, h) - MatrixField::identity(g, 3)) < 1e-15);
  MatrixField S = endo_product(random_hermitian_field(g, 3, rng, 1, 1.0), h.inverse());
  S *= Complex(2.0 / sup_norm(S, h));
  const MatrixField E = exp_self_adjoint(S, h);
  CHECK(sup_frobenius(E - matrix_exp(S)) < 1e-12);
  CHECK(sup_frobenius(matrix_log(E, h) - S) < 1e-10);

  const ScalarField s = random_trig_polynomial(g, rng, 2, 1.0, true);
  const MatrixField one = MatrixField::identity(g, 1);
  const HermitianMetricField h1(one);
  const MatrixField e = endo_product(exp_self_adjoint(scale(s, one), h1), exp_self_adjoint(scale(s * Complex(-1.0), one), h1));
  CHECK(sup_frobenius(e - one) < 1e-14);
}

TEST_CASE("operator norm against power iteration") {
  const GridSpec g = small_grid();
  CounterRng rng(7);
  const HermitianMetricField h = random_metric(g, 3, rng, 1, 0.6);
  CHECK(sup_norm(MatrixField(g, 3), h) == 0.0);
  CHECK(sup_norm(MatrixField::identity(g, 3), h) == doctest::Approx(1.0));
  const MatrixField A = random_matrix_field(g, 3, rng, 0, 1.0);  // constant entries
  double oracle = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) oracle = std::max(oracle, power_norm(A.at(p), h.at(p)));
  CHECK(sup_norm(A, h) == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("trace and scaling") {
  const GridSpec g = small_grid();
  CounterRng rng(8);
  const MatrixField A = random_matrix_field(g, 2, rng, 1, 1.0);
  const ScalarField f = random_trig_polynomial(g, rng, 1, 1.0, false);
  const ScalarField t = trace(scale(f, A));
  for (std::size_t p = 0; p < g.size(); p += 3) CHECK(std::abs(t[p] - f[p] * A.at(p).trace()) < 1e-14);
}

TEST_CASE("counter rng is a pure function of seed, stream and counter") {
  CounterRng a(42), b(42);
  for (int k = 0; k < 10; ++k) CHECK(a.next() == b.next());
  CounterRng s1 = CounterRng(42).split(1), s2 = CounterRng(42).split(2), s1b = CounterRng(42).split(1);
  CHECK(s1.next() != s2.next());
  s1 = CounterRng(42).split(1);
  CHECK(s1.next() == s1b.next());
  double lo = 1.0, hi = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
}
