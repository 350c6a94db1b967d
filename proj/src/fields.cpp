#include "hymh/fields.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace hymh {

namespace {

// Conjugates A by the Cholesky factor of h: Q = L^{-1} A L. Q is Hermitian
// exactly when A is h-self-adjoint, and has the same spectrum as A.
CMatrix to_orthonormal(const CMatrix& A, const CMatrix& L) {
  const auto tri = L.triangularView<Eigen::Lower>();
  return tri.solve(A * L);
}

CMatrix from_orthonormal(const CMatrix& Q, const CMatrix& L) {
  const auto tri = L.triangularView<Eigen::Lower>();
  // L Q L^{-1} = (L^{-dagger} (L Q)^dagger)^dagger
  const CMatrix LQ = L * Q;
  return tri.adjoint().solve(LQ.adjoint()).adjoint();
}

CMatrix hermitize(const CMatrix& Q) { return 0.5 * (Q + Q.adjoint()); }

double hermitian_defect(const CMatrix& Q) {
  const double scale = std::max(Q.norm(), 1e-300);
  return (Q - Q.adjoint()).norm() / scale;
}

template <typename F>
MatrixField spectral_map(const MatrixField& S, const HermitianMetricField& h, F&& f, const char* where) {
  S.check_shape(h.matrix(), where);
  MatrixField out(S.grid(), S.rank());
  Eigen::SelfAdjointEigenSolver<CMatrix> es;
  for (std::size_t p = 0; p < S.points(); ++p) {
    const CMatrix L = h.cholesky().at(p);
    const CMatrix Q = to_orthonormal(S.at(p), L);
    if ((Q - Q.adjoint()).norm() > 1e-8 * std::max(Q.norm(), 1.0))
      throw std::domain_error(std::string(where) + ": argument is not self-adjoint");
    es.compute(hermitize(Q));
    Eigen::VectorXd ev = es.eigenvalues();
    Eigen::VectorXcd fv(ev.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k) fv[k] = f(ev[k]);
    const CMatrix fQ = es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
    out.at(p) = from_orthonormal(fQ, L);
  }
  return out;
}

}  // namespace

HermitianMetricField::HermitianMetricField(MatrixField h, double floor) : h_(std::move(h)) {
  const int r = h_.rank();
  inv_ = MatrixField(h_.grid(), r);
  chol_ = MatrixField(h_.grid(), r);
  for (std::size_t p = 0; p < h_.points(); ++p) {
    const CMatrix m = h_.at(p);
    if (hermitian_defect(m) > 1e-12) throw std::domain_error("metric is not Hermitian");
    Eigen::LLT<CMatrix> llt(hermitize(m));
    if (llt.info() != Eigen::Success) throw std::domain_error("metric is not positive definite");
    if (floor > 0.0) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(m), Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() <= floor) throw std::domain_error("metric eigenvalue below floor");
    }
    chol_.at(p) = llt.matrixL();
    inv_.at(p) = llt.solve(CMatrix::Identity(r, r));
  }
}

MatrixField endo_product(const MatrixField& A, const MatrixField& B) {
  A.check_shape(B, "endo_product");
  // Plain loops: the blocks are tiny and dynamically sized.
  const int r = A.rank();
  const std::size_t rr = static_cast<std::size_t>(r) * r;
  MatrixField out(A.grid(), r);
  const Complex* a = A.data().data();
  const Complex* b = B.data().data();
  Complex* c = out.data().data();
  for (std::size_t p = 0; p < A.points(); ++p, a += rr, b += rr, c += rr)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        const Complex bkj = b[k + j * r];
        for (int i = 0; i < r; ++i) c[i + j * r] += a[i + k * r] * bkj;
      }
  return out;
}

MatrixField scale(const ScalarField& f, const MatrixField& A) {
  require_same_grid(f.grid(), A.grid(), "scale");
  return generate(A.grid(), A.rank(), [&](std::size_t p, auto out) { out = f[p] * A.at(p); });
}

MatrixField inverse(const MatrixField& A) {
  return generate(A.grid(), A.rank(), [&](std::size_t p, auto out) { out = A.at(p).inverse(); });
}

MatrixField conjugate_transpose(const MatrixField& A) {
  return generate(A.grid(), A.rank(), [&](std::size_t p, auto out) { out = A.at(p).adjoint(); });
}

MatrixField adjoint(const MatrixField& A, const HermitianMetricField& h) {
  A.check_shape(h.matrix(), "adjoint");
  return generate(A.grid(), A.rank(), [&](std::size_t p, auto out) {
    out.noalias() = h.at(p) * A.at(p).adjoint() * h.inverse().at(p);
  });
}

MatrixField hermitian_part(const MatrixField& A, const HermitianMetricField& h) {
  MatrixField out = A + adjoint(A, h);
  out *= Complex(0.5);
  return out;
}

ScalarField trace(const MatrixField& A) {
  ScalarField out(A.grid());
  for (std::size_t p = 0; p < A.points(); ++p) out[p] = A.at(p).trace();
  return out;
}

ScalarField pairing(const MatrixField& A, const MatrixField& B, const HermitianMetricField& h) {
  A.check_shape(B, "pairing");
  ScalarField out(A.grid());
  for (std::size_t p = 0; p < A.points(); ++p)
    out[p] = (A.at(p) * h.at(p) * B.at(p).adjoint() * h.inverse().at(p)).trace();
  return out;
}

EigenBounds herm_eig_bounds(const MatrixField& A, const HermitianMetricField& h) {
  A.check_shape(h.matrix(), "herm_eig_bounds");
  EigenBounds out{ScalarField(A.grid()), ScalarField(A.grid())};
  Eigen::SelfAdjointEigenSolver<CMatrix> es;
  std::vector<CMatrix> qs(A.points());
  double scale = 0.0, defect = 0.0;
  for (std::size_t p = 0; p < A.points(); ++p) {
    qs[p] = to_orthonormal(A.at(p), h.cholesky().at(p));
    scale = std::max(scale, qs[p].norm());
    defect = std::max(defect, (qs[p] - qs[p].adjoint()).norm());
  }
  // Relative to the field's magnitude, not the pointwise one.
  if (defect > 1e-9 * std::max(scale, 1e-300)) throw std::domain_error("herm_eig_bounds: argument is not self-adjoint");
  for (std::size_t p = 0; p < A.points(); ++p) {
    const CMatrix& Q = qs[p];
    es.compute(hermitize(Q), Eigen::EigenvaluesOnly);
    out.min[p] = es.eigenvalues().minCoeff();
    out.max[p] = es.eigenvalues().maxCoeff();
  }
  return out;
}

MatrixField matrix_exp(const MatrixField& S) {
  return generate(S.grid(), S.rank(), [&](std::size_t p, auto out) {
    const CMatrix m = S.at(p);
    out = m.exp();
  });
}

MatrixField exp_self_adjoint(const MatrixField& S, const HermitianMetricField& h) {
  return spectral_map(S, h, [](double x) { return Complex(std::exp(x)); }, "exp_self_adjoint");
}

MatrixField matrix_log(const MatrixField& H, const HermitianMetricField& h) {
  return spectral_map(
      H, h,
      [](double x) {
        if (!(x > 0.0)) throw std::domain_error("matrix_log: non-positive eigenvalue");
        return Complex(std::log(x));
      },
      "matrix_log");
}

MatrixField matrix_log(const HermitianMetricField& H) {
  const HermitianMetricField id(MatrixField::identity(H.grid(), H.rank()));
  return matrix_log(H.matrix(), id);
}

double sup_norm(const MatrixField& A, const HermitianMetricField& h) {
  A.check_shape(h.matrix(), "sup_norm");
  double best = 0.0;
  for (std::size_t p = 0; p < A.points(); ++p) {
    const CMatrix Q = to_orthonormal(A.at(p), h.cholesky().at(p));
    Eigen::JacobiSVD<CMatrix> svd(Q);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

double sup_frobenius(const MatrixField& A) {
  double best = 0.0;
  for (std::size_t p = 0; p < A.points(); ++p) best = std::max(best, A.at(p).norm());
  return best;
}

double self_adjointness_defect(const MatrixField& A, const HermitianMetricField& h) {
  A.check_shape(h.matrix(), "self_adjointness_defect");
  double worst = 0.0;
  for (std::size_t p = 0; p < A.points(); ++p) {
    const CMatrix a = A.at(p);
    const CMatrix s = h.at(p) * a.adjoint() * h.inverse().at(p);
    worst = std::max(worst, (a - s).norm() / std::max(a.norm(), 1e-300));
  }
  return worst;
}

}  // namespace hymh
