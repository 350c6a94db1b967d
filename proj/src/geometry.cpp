#include "hymh/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hymh {

BaseMetric BaseMetric::constant(const GridSpec& grid, const CMatrix& g0) {
  BaseMetric m;
  m.grid_ = grid;
  m.g0_ = g0;
  m.factor_ = ScalarField::constant(grid, 1.0);
  m.finish();
  return m;
}

BaseMetric BaseMetric::identity(const GridSpec& grid) {
  return constant(grid, CMatrix::Identity(grid.n(), grid.n()));
}

BaseMetric BaseMetric::conformal(const ScalarField& u, const CMatrix& g0) {
  if (u.values().imag().cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("BaseMetric::conformal: exponent must be real");
  BaseMetric m;
  m.grid_ = u.grid();
  m.g0_ = g0;
  m.factor_ = exp(u);
  m.finish();
  return m;
}

void BaseMetric::finish() {
  const int n = grid_.n();
  if (g0_.rows() != n || g0_.cols() != n) throw std::invalid_argument("BaseMetric: g0 must be n x n");
  if ((g0_ - g0_.adjoint()).norm() > 1e-12 * g0_.norm()) throw std::invalid_argument("BaseMetric: g0 not Hermitian");
  Eigen::LLT<CMatrix> llt(g0_);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("BaseMetric: g0 not positive definite");
  const CMatrix up0 = g0_.inverse().transpose();
  const Complex det0 = g0_.determinant();
  g_ = MatrixField(grid_, n);
  gup_ = MatrixField(grid_, n);
  det_ = ScalarField(grid_);
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const double e = factor_[p].real();
    g_.at(p) = e * g0_;
    gup_.at(p) = up0 / e;
    det_[p] = det0.real() * std::pow(e, n);
  }
  const double spread = factor_.values().real().maxCoeff() - factor_.values().real().minCoeff();
  flags_ = classify(*this);
  flags_.is_constant = spread == 0.0;
  if (flags_.is_constant) flags_.is_kahler = flags_.is_gauduchon = true;
}

ScalarField BaseMetric::volume_density() const { return det_ * Complex(std::pow(2.0, n())); }

ScalarField BaseMetric::omega_n_density() const {
  double fact = 1.0;
  for (int k = 2; k <= n(); ++k) fact *= k;
  return volume_density() * Complex(fact);
}

MatrixField lambda_contract(const FormMatrixField& F, const BaseMetric& g) {
  if (F.degree() != 2) throw std::invalid_argument("lambda_contract: expects a 2-form");
  require_same_grid(F.grid(), g.grid(), "lambda_contract");
  const int n = g.n();
  MatrixField out(F.grid(), F.rank());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = mixed_index(n, i, j);
      if (!F.has(k)) continue;
      const MatrixField& c = F.ref(k);
      if (g.is_constant()) {
        const Complex w = g.gup().at(0)(i, j);
        out.data() += w * c.data();
      } else {
        out += scale(g.gup().component(i, j), c);
      }
    }
  return out;
}

ScalarField laplacian(const ScalarField& f, const BaseMetric& g) {
  require_same_grid(f.grid(), g.grid(), "laplacian");
  if (g.is_constant()) return flat_laplacian(f, g.g0());
  // Conformal family: g^{i jbar} = e^{-u} (g0 inverse)^{...}
  ScalarField flat = flat_laplacian(f, g.g0());
  ScalarField out(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p) out[p] = flat[p] / g.factor()[p];
  return out;
}

double TorsionTensor::sup() const {
  double best = 0.0;
  for (const auto& a : theta)
    for (const auto& b : a)
      for (const auto& c : b) best = std::max(best, sup_abs(c));
  return best;
}

TorsionTensor torsion(const BaseMetric& g) {
  const int n = g.n();
  const GridSpec& grid = g.grid();
  // dg[i](j, l) = d_i g_{j lbar}
  std::vector<MatrixField> dg;
  for (int i = 0; i < n; ++i) dg.push_back(derivative(g.g(), i));
  TorsionTensor t;
  t.theta.assign(n, std::vector<std::vector<ScalarField>>(n, std::vector<ScalarField>(n, ScalarField(grid))));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        ScalarField& out = t.theta[k][i][j];
        for (std::size_t p = 0; p < grid.size(); ++p) {
          Complex s = 0.0;
          for (int l = 0; l < n; ++l) s += g.gup().at(p)(k, l) * (dg[i].at(p)(j, l) - dg[j].at(p)(i, l));
          out[p] = s;
        }
      }
  t.tau.assign(n, ScalarField(grid));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) t.tau[i] += t.theta[k][i][k];
  return t;
}

MetricFlags classify(const BaseMetric& g, double tol) {
  MetricFlags f;
  const int n = g.n();
  const double spread = g.factor().values().real().maxCoeff() - g.factor().values().real().minCoeff();
  f.is_constant = spread == 0.0;
  if (n == 1 || f.is_constant) {
    f.is_kahler = f.is_gauduchon = true;
    return f;
  }
  // d omega = 0  <=>  d_i g_{j lbar} = d_j g_{i lbar} (and its conjugate).
  std::vector<MatrixField> dg;
  for (int i = 0; i < n; ++i) dg.push_back(derivative(g.g(), i));
  double closed = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const ScalarField a = dg[i].component(j, l);
        const ScalarField b = dg[j].component(i, l);
        closed = std::max(closed, sup_abs(a - b));
      }
  f.is_kahler = closed <= tol;
  // n = 2: d d-bar omega = 0, single top-degree coefficient.
  auto dd = [&](int a, int b, int i, int j) {
    return derivative(derivative(g.g(), a), n + b).component(i, j);
  };
  const ScalarField defect = dd(0, 0, 1, 1) + dd(1, 1, 0, 0) - dd(0, 1, 1, 0) - dd(1, 0, 0, 1);
  f.is_gauduchon = sup_abs(defect) <= tol;
  return f;
}

}  // namespace hymh
