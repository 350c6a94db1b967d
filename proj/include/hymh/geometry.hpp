#pragma once

#include "hymh/forms.hpp"

namespace hymh {

struct MetricFlags {
  bool is_constant = false;
  bool is_kahler = false;
  bool is_gauduchon = false;
};

/// Hermitian metric g_{i jbar} on the base torus. Supported families are
/// constant matrices and conformal multiples e^{u(x)} g0 of a constant g0.
///
/// Storage: g(i, j) = g_{i jbar}; gup(i, j) = g^{i jbar}, i.e. the (j, i) entry
/// of the matrix inverse, so that sum_j g^{i jbar} g_{k jbar} = delta_ik.
class BaseMetric {
 public:
  BaseMetric() = default;
  static BaseMetric constant(const GridSpec& grid, const CMatrix& g0);
  static BaseMetric identity(const GridSpec& grid);
  /// e^{u} g0 for a real-valued field u.
  static BaseMetric conformal(const ScalarField& u, const CMatrix& g0);

  const GridSpec& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  const CMatrix& g0() const { return g0_; }
  /// Conformal factor e^u (identically 1 for constant metrics).
  const ScalarField& factor() const { return factor_; }
  const MatrixField& g() const { return g_; }
  const MatrixField& gup() const { return gup_; }
  /// det(g_{i jbar}) pointwise.
  const ScalarField& det() const { return det_; }
  /// Density of omega^n / n! against Lebesgue measure dx dy: 2^n det g.
  ScalarField volume_density() const;
  /// Density of omega^n against Lebesgue measure.
  ScalarField omega_n_density() const;
  const MetricFlags& flags() const { return flags_; }
  bool is_constant() const { return flags_.is_constant; }

 private:
  void finish();

  GridSpec grid_;
  CMatrix g0_;
  ScalarField factor_;
  MatrixField g_, gup_;
  ScalarField det_;
  MetricFlags flags_;
};

/// Contraction g^{i jbar} F_{i jbar} of the (1,1)-part of a 2-form. The factor
/// sqrt(-1) of Lambda(sqrt(-1) F) is absorbed here: for a 2-form F this returns
/// Lambda(sqrt(-1) F), so that lambda_contract of d'd''f equals laplacian(f).
MatrixField lambda_contract(const FormMatrixField& F, const BaseMetric& g);

/// Delta_g f = g^{i jbar} d_i d_jbar f.
ScalarField laplacian(const ScalarField& f, const BaseMetric& g);

/// Torsion components Theta^k_{ij} = g^{k lbar}(d_i g_{j lbar} - d_j g_{i lbar}),
/// stored as theta[k][i][j].
struct TorsionTensor {
  std::vector<std::vector<std::vector<ScalarField>>> theta;
  /// Trace tau_i = sum_k Theta^k_{i k}; the (1,0)-form of the torsion operator.
  std::vector<ScalarField> tau;
  double sup() const;
};
TorsionTensor torsion(const BaseMetric& g);

/// Numerical Kaehler / Gauduchon tests at tolerance `tol`.
MetricFlags classify(const BaseMetric& g, double tol = 1e-8);

}  // namespace hymh
