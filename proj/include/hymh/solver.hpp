#pragma once

#include "hymh/higgs_ops.hpp"

#include <stdexcept>
#include <string>

namespace hymh {

/// A required hypothesis of the problem does not hold (e.g. Omega > 0).
class HypothesisError : public std::runtime_error {
 public:
  HypothesisError(std::string hypothesis, const std::string& detail)
      : std::runtime_error(hypothesis + ": " + detail), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const { return hypothesis_; }

 private:
  std::string hypothesis_;
};

/// A numerical procedure failed to produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double residual_tol = 1e-10;
  int newton_max_iter = 30;
  double krylov_tol = 1e-12;
  int krylov_restart = 150;
  int krylov_max_iter = 600;
  double pd_margin = 1e-8;
  // heat flow
  double dt = 0.05;
  double dt_min = 1e-8;
  int max_steps = 200000;
};

/// Data of the prescribed tensor problem S^h . H = P with h = H . h0.
/// P is stored as an endomorphism, h0-self-adjoint and positive.
struct ProblemSpec {
  BaseMetric g;
  HiggsBundle bundle;
  HermitianMetricField h0;
  MatrixField P;
  SolverOptions options;

  const GridSpec& grid() const { return g.grid(); }
  int rank() const { return h0.rank(); }
  /// Omega = S^{h0}.
  MatrixField omega() const;
  /// Throws HypothesisError if Omega or P is not positive relative to h0
  /// (minimum eigenvalue below options.pd_margin). `require_omega` = false
  /// skips the Omega check (Gauduchon-normalisation path).
  void validate(bool require_omega = true) const;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<double> step_history;  // damping factor (Newton) or dt at start and after each halving (flow)
  std::vector<int> krylov_iterations;
  int dt_halvings = 0;
  MatrixField H;
  double h_eig_min = 0.0;
  double h_eig_max = 0.0;
  double c1_proxy = 0.0;          // sup |d^{h0} H . H^{-1}|
  double self_test_max = 0.0;     // max over iterations of |L(Id) - Omega_1|
  double hermitian_defect_max = 0.0;  // anti-Hermitian part of L(Psi) h1, relative to the first step
  bool omega_positivity_lost = false;
  double wall_time = 0.0;
  std::string message;
};

/// S^{H h0} . H - P.
MatrixField residual(const MatrixField& H, const ProblemSpec& spec);
/// The same residual through (Omega + F_theta(H) + Lambda sqrt(-1) dbar(d^{h0}H . H^{-1})) . H - P.
MatrixField residual_expanded(const MatrixField& H, const ProblemSpec& spec);
/// sup over the grid of the h0-operator norm.
double residual_norm(const MatrixField& R, const ProblemSpec& spec);

/// Metric h = H . h0 (Hermitised to remove rounding asymmetry).
HermitianMetricField metric_from_endo(const MatrixField& H, const HermitianMetricField& h0);

/// L(Psi) = Lambda sqrt(-1) D'' D'^{h1} Psi + Omega_1 . Psi at the metric h1.
MatrixField linearized_apply(const MatrixField& Psi, const HermitianMetricField& h1, const HiggsBundle& bundle,
                             const BaseMetric& g, const MatrixField& omega1);

/// Newton-Krylov solve with multiplicative updates h <- exp(alpha Psi) h.
SolveReport newton_solve(const ProblemSpec& spec, const MatrixField* initial_H = nullptr);

/// Relaxation h <- exp(-dt (S^h - P H^{-1})) h. dt starts at min(options.dt, stability
/// estimate) and halves, restoring the best iterate, when the residual doubles.
SolveReport heat_flow_solve(const ProblemSpec& spec, double tol, const MatrixField* initial_H = nullptr);

struct GauduchonResult {
  HermitianMetricField h0;  // e^{-f} h0
  ScalarField f;
  double lambda0 = 0.0;
  ScalarField kappa_before;
  ScalarField kappa_after;
};
/// Conformal change with kappa_{h0} + Delta f = lambda0, where kappa is the
/// minimal eigenvalue of S^{h0} and lambda0 its mean. Constant g only.
GauduchonResult gauduchon_normalize(const HermitianMetricField& h0, const HiggsBundle& bundle, const BaseMetric& g,
                                    double pd_margin = 1e-8);

}  // namespace hymh
