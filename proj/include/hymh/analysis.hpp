#pragma once

#include "hymh/higgs_ops.hpp"

#include <string>

namespace hymh {

/// Outcome of the comparison principle on a pair of metrics.
struct ComparisonVerdict {
  enum class Status { pass, fail, hypothesis_not_met };
  Status status = Status::fail;
  bool pass = false;
  double tolerance = 0.0;
  double scale = 1.0;            // lambda of the scaled variant
  double max_eigenvalue = 0.0;   // sup_x kappa(x) / lambda
  ScalarField kappa;             // maximal eigenvalue of H = h . h0^{-1} relative to h0
  double omega_min = 0.0;        // min eigenvalue of S^{h0}
  double hypothesis_gap = 0.0;   // min eigenvalue of lambda S^{h0} - S^h . H
  std::string hypothesis;        // empty when the hypotheses hold
};
const char* to_string(ComparisonVerdict::Status s);

/// Checks S^{h0} > 0 and S^h <= lambda S^{h0} as Hermitian tensors, then
/// reports whether h <= lambda h0 up to `tol`.
ComparisonVerdict comparison_check(const HermitianMetricField& h, const HermitianMetricField& h0,
                                   const HiggsBundle& bundle, const BaseMetric& g, double tol = 1e-6,
                                   double lambda = 1.0);

/// Chern-Weil representatives. Scalar 2-forms are rank-1 form fields; 4-forms
/// (n = 2) are stored as coefficients of dV0 = (sqrt(-1))^2 dz1 ^ dzbar1 ^ dz2 ^ dzbar2.
struct ChernForms {
  FormMatrixField c1, c1_tilde;
  ScalarField c1_squared, c2;              // from the full curvature
  ScalarField c1_tilde_squared, c2_tilde;  // from the (1,1) part only
};
/// Requires an integrable Higgs field, a constant base metric and n <= 2
/// (the 4-form fields are left empty for n = 1).
ChernForms chern_forms(const HermitianMetricField& h, const HiggsBundle& bundle, const BaseMetric& g);

/// Integral of the top-degree part of c1 ^ omega^{n-1}; zero for the untwisted bundle.
Complex integrate_c1_omega(const ChernForms& forms, const BaseMetric& g);
/// Integral of a dV0 coefficient.
Complex integrate_top(const ScalarField& coeff, const BaseMetric& g);

/// Pointwise curvature invariants of the (1,1) part in orthonormal frames of g and h.
struct CurvatureInvariants {
  ScalarField s;          // g^{i jbar} tr R_{i jbar}
  ScalarField ric1_sq;    // |Ric^(1)|^2_g
  ScalarField ric2_sq;    // |Ric^(2)|^2_h
  ScalarField r11_sq;     // |R^(1,1)|^2
  ScalarField t_sq;       // |T|^2 from the explicit tensor T
  ScalarField t_sq_formula;
  ScalarField spread;     // sum_{i<j} (lambda_i - lambda_j)^2 over eigenvalues of Ric^(2)
};
CurvatureInvariants curvature_invariants(const FormMatrixField& r11, const HermitianMetricField& h,
                                         const BaseMetric& g);

struct ChernReport {
  // Form pipeline.
  Complex c1_tilde_sq_form, c2_tilde_form;
  // Scalar pipeline.
  Complex c1_tilde_sq_scalar, c2_tilde_scalar;
  // |form - scalar| over the larger of |form|, |scalar| and the integral of |integrand|.
  double c1_residual = 0.0, c2_residual = 0.0;
  // Full Chern integrals.
  Complex c1_omega, c1_sq, c2;
  Complex discriminant_full;   // int (r-1) c1^2 - 2r c2
  Complex discriminant_tilde;  // the same with the (1,1) forms
  Complex eta_integral;        // int tr(eta20 ^ eta02)
  double eta_residual = 0.0;   // full - tilde + r/(2 pi^2) eta, relative
  double rhs = 0.0;            // r(r-1)(b-a)^2 / (8 pi^2 n^2) vol
  double a = 0.0, b = 0.0;
  double t2_residual = 0.0;    // pointwise max of |T|^2 direct vs formula
  double spread_identity_residual = 0.0;  // |s^2 - r|Ric2|^2 + spread|
  double spread_violation = 0.0;          // max(0, spread - r(r-1)(b-a)^2 / 2)
  double max_imaginary = 0.0;  // largest imaginary part among reported integrals
  bool eta_nonnegative = false;
  bool full_bound = false;   // discriminant_full <= rhs
  bool tilde_bound = false;  // discriminant_tilde <= rhs
  double invariants_sup[5] = {0, 0, 0, 0, 0};  // sup of s^2, |Ric1|^2, |Ric2|^2, |R11|^2, |T|^2
};

/// Relative residuals of the two integral identities for the (1,1) Chern forms.
/// Requires n = 2, constant g, integrable theta; std::domain_error otherwise.
ChernReport chern_identity_check(const HermitianMetricField& h, const HiggsBundle& bundle, const BaseMetric& g);
/// Pointwise max of | |T|^2 - (|R11|^2 - |Ric2|^2/n - |Ric1|^2/r + s^2/(nr)) |.
double t_tensor_check(const HermitianMetricField& h, const HiggsBundle& bundle, const BaseMetric& g);
/// The full report for h0, including the Chern number bound with a, b the
/// global eigenvalue bounds of S^{h0}. `tol` is the slack on the verdicts.
ChernReport chern_inequality_check(const HermitianMetricField& h0, const HiggsBundle& bundle, const BaseMetric& g,
                                   double tol = 1e-7);

/// s^2 - r sum lambda_k^2 and the spread bound for a Hermitian spectrum in [a, b].
double spread_identity_residual(const Eigen::VectorXd& lambda);
double spread_violation(const Eigen::VectorXd& lambda, double a, double b);

}  // namespace hymh
