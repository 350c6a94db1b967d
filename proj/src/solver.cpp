#include "hymh/solver.hpp"

#include <Eigen/Sparse>
#include <unsupported/Eigen/IterativeSolvers>

#include <chrono>
#include <optional>
#include <cmath>

namespace hymh {
class LinearizedOperator;
}

namespace Eigen::internal {
template <>
struct traits<hymh::LinearizedOperator> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace hymh {

namespace {

// Removes the Nyquist modes. First-derivative symbols vanish there, so the
// linearization cannot control them and they accumulate across updates.
// Zeroes every Fourier mode with |k| > kcut on some axis.
MatrixField spectral_cut(const MatrixField& K, int kcut) {
  const GridSpec& grid = K.grid();
  const int N = grid.N();
  const int howmany = K.rank() * K.rank();
  MatrixField out = K;
  std::span<Complex> data(out.data().data(), static_cast<std::size_t>(out.data().size()));
  fft_forward(grid, data, howmany);
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int axis = 0; axis < grid.axes(); ++axis) {
      const int i = grid.index(p, axis);
      if (std::min(i, N - i) > kcut) {
        out.at(p).setZero();
        break;
      }
    }
  fft_inverse(grid, data, howmany);
  return out;
}

MatrixField drop_nyquist(const MatrixField& K) { return spectral_cut(K, K.grid().N() / 2 - 1); }

// Updated metric E.H.h0 with the top two shells removed. Pointwise products
// alias into them and the error there grows under Newton once the smooth
// modes have converged.
HermitianMetricField filtered_metric(const MatrixField& EH, const HermitianMetricField& h0) {
  MatrixField h = spectral_cut(endo_product(EH, h0.matrix()), h0.grid().N() / 2 - 2);
  h = h + conjugate_transpose(h);
  h *= Complex(0.5);
  return HermitianMetricField(std::move(h));
}

// Hermitian r x r matrices packed into r^2 reals per grid point, stored
// component-major so that each packed slot is a contiguous grid field.
struct HermitianPacking {
  int rank;
  std::size_t points;

  Eigen::Index size() const { return static_cast<Eigen::Index>(rank) * rank * static_cast<Eigen::Index>(points); }

  Eigen::VectorXd pack(const MatrixField& K) const {
    Eigen::VectorXd x(size());
    for (std::size_t p = 0; p < points; ++p) {
      auto m = K.at(p);
      Eigen::Index c = 0;
      for (int a = 0; a < rank; ++a) {
        x[c++ * points + p] = m(a, a).real();
        for (int b = a + 1; b < rank; ++b) {
          const Complex v = 0.5 * (m(a, b) + std::conj(m(b, a)));
          x[c++ * points + p] = v.real();
          x[c++ * points + p] = v.imag();
        }
      }
    }
    return x;
  }

  MatrixField unpack(const GridSpec& grid, const Eigen::VectorXd& x) const {
    MatrixField K(grid, rank);
    for (std::size_t p = 0; p < points; ++p) {
      auto m = K.at(p);
      Eigen::Index c = 0;
      for (int a = 0; a < rank; ++a) {
        m(a, a) = x[c++ * points + p];
        for (int b = a + 1; b < rank; ++b) {
          const double re = x[c++ * points + p];
          const double im = x[c++ * points + p];
          m(a, b) = Complex(re, im);
          m(b, a) = Complex(re, -im);
        }
      }
    }
    return K;
  }
};

double antihermitian_sup(const MatrixField& K) {
  double worst = 0.0;
  for (std::size_t p = 0; p < K.points(); ++p) worst = std::max(worst, (K.at(p) - K.at(p).adjoint()).norm());
  return 0.5 * worst;
}

}  // namespace

/// L acting on packed h1-Hermitian data K = Psi . h1.
class LinearizedOperator : public Eigen::EigenBase<LinearizedOperator> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  LinearizedOperator(const HermitianMetricField& h1, const HiggsBundle& bundle, const BaseMetric& g,
                     const MatrixField& omega1)
      : h1_(&h1), bundle_(&bundle), g_(&g), omega1_(&omega1), pack_{h1.rank(), h1.grid().size()} {}

  Eigen::Index rows() const { return pack_.size(); }
  Eigen::Index cols() const { return pack_.size(); }

  template <typename Rhs>
  Eigen::Product<LinearizedOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<LinearizedOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    const MatrixField Psi = endo_product(pack_.unpack(h1_->grid(), x), h1_->inverse());
    return pack_.pack(endo_product(linearized_apply(Psi, *h1_, *bundle_, *g_, *omega1_), h1_->matrix()));
  }

  const HermitianPacking& packing() const { return pack_; }

 private:
  const HermitianMetricField* h1_;
  const HiggsBundle* bundle_;
  const BaseMetric* g_;
  const MatrixField* omega1_;
  HermitianPacking pack_;
};

namespace {

// (c - Delta_flat)^{-1} applied to every packed slot.
class ShiftedLaplacePreconditioner {
 public:
  using StorageIndex = int;
  ShiftedLaplacePreconditioner() = default;

  void configure(const GridSpec& grid, const CMatrix& g0, double shift) {
    grid_ = grid;
    g0_ = g0;
    shift_ = shift;
  }

  template <typename M>
  ShiftedLaplacePreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  ShiftedLaplacePreconditioner& factorize(const M&) { return *this; }
  template <typename M>
  ShiftedLaplacePreconditioner& compute(const M&) { return *this; }

  template <typename Rhs>
  Eigen::VectorXd solve(const Rhs& b) const {
    Eigen::VectorXd out(b.size());
    if (g0_.size() == 0) return b;
    const std::size_t np = grid_.size();
    const Eigen::Index slots = b.size() / static_cast<Eigen::Index>(np);
    Eigen::VectorXcd buf(static_cast<Eigen::Index>(np));
    for (Eigen::Index c = 0; c < slots; ++c) {
      buf = b.segment(c * np, np).template cast<Complex>();
      apply_shifted_inverse(grid_, g0_, shift_, std::span<Complex>(buf.data(), np));
      out.segment(c * np, np) = buf.real();
    }
    return out;
  }

  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  GridSpec grid_;
  CMatrix g0_;
  double shift_ = 1.0;
};

}  // namespace
}  // namespace hymh

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<hymh::LinearizedOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<hymh::LinearizedOperator, Rhs,
                                generic_product_impl<hymh::LinearizedOperator, Rhs>> {
  using Scalar = typename Product<hymh::LinearizedOperator, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const hymh::LinearizedOperator& lhs, const Rhs& rhs, const Scalar& alpha) {
    dst.noalias() += alpha * lhs.apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace hymh {

MatrixField ProblemSpec::omega() const { return hym_higgs_tensor(h0, bundle, g); }

void ProblemSpec::validate(bool require_omega) const {
  require_same_grid(g.grid(), h0.grid(), "ProblemSpec");
  require_same_grid(g.grid(), P.grid(), "ProblemSpec");
  if (bundle.rank() != h0.rank() || P.rank() != h0.rank()) throw std::invalid_argument("ProblemSpec: rank mismatch");
  if (self_adjointness_defect(P, h0) > 1e-9) throw HypothesisError("P Hermitian", "P is not h0-self-adjoint");
  const double pmin = herm_eig_bounds(P, h0).min.values().real().minCoeff();
  if (pmin < options.pd_margin) throw HypothesisError("P > 0", "minimum eigenvalue " + std::to_string(pmin));
  if (require_omega) {
    const double omin = herm_eig_bounds(hermitian_part(omega(), h0), h0).min.values().real().minCoeff();
    if (omin < options.pd_margin) throw HypothesisError("Omega > 0", "minimum eigenvalue " + std::to_string(omin));
  }
}

HermitianMetricField metric_from_endo(const MatrixField& H, const HermitianMetricField& h0) {
  MatrixField h = endo_product(H, h0.matrix());
  h = h + conjugate_transpose(h);
  h *= Complex(0.5);
  return HermitianMetricField(std::move(h));
}

MatrixField residual(const MatrixField& H, const ProblemSpec& spec) {
  const HermitianMetricField h = metric_from_endo(H, spec.h0);
  return endo_product(hym_higgs_tensor(h, spec.bundle, spec.g), H) - spec.P;
}

MatrixField residual_expanded(const MatrixField& H, const ProblemSpec& spec) {
  const HiggsField none(spec.g.n(), spec.rank());
  const FormMatrixField Q = right_multiply(dprime(as_form(H), spec.h0, none), inverse(H));
  MatrixField T = spec.omega() + f_theta(H, spec.h0, spec.bundle.theta, spec.g) +
                  lambda_contract(delbar(Q), spec.g);
  return endo_product(T, H) - spec.P;
}

double residual_norm(const MatrixField& R, const ProblemSpec& spec) { return sup_norm(R, spec.h0); }

MatrixField linearized_apply(const MatrixField& Psi, const HermitianMetricField& h1, const HiggsBundle& bundle,
                             const BaseMetric& g, const MatrixField& omega1) {
  const FormMatrixField d2 = dsecond(dprime(as_form(Psi), h1, bundle.theta), bundle.theta);
  return lambda_contract(d2, g) + endo_product(omega1, Psi);
}

namespace {

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void finish_report(SolveReport& rep, const ProblemSpec& spec, const MatrixField& H) {
  rep.H = H;
  const EigenBounds eb = herm_eig_bounds(H, spec.h0);
  rep.h_eig_min = eb.min.values().real().minCoeff();
  rep.h_eig_max = eb.max.values().real().maxCoeff();
  const HiggsField none(spec.g.n(), spec.rank());
  const FormMatrixField Q = right_multiply(dprime(as_form(H), spec.h0, none), inverse(H));
  rep.c1_proxy = sup_frobenius(Q);
}

double mean_eigenvalue(const MatrixField& omega) {
  const ScalarField tr = trace(omega);
  return tr.values().real().mean() / omega.rank();
}

}  // namespace

SolveReport newton_solve(const ProblemSpec& spec, const MatrixField* initial_H) {
  const auto t0 = std::chrono::steady_clock::now();
  const SolverOptions& opt = spec.options;
  SolveReport rep;
  MatrixField H = initial_H ? *initial_H : MatrixField::identity(spec.grid(), spec.rank());
  HermitianMetricField h1 = metric_from_endo(H, spec.h0);
  MatrixField S1 = hym_higgs_tensor(h1, spec.bundle, spec.g);
  MatrixField R = endo_product(S1, H) - spec.P;
  double rn = residual_norm(R, spec);
  rep.residual_history.push_back(rn);

  const MatrixField id = MatrixField::identity(spec.grid(), spec.rank());
  double rhs_scale = 1.0;
  while (rn > opt.residual_tol && rep.iterations < opt.newton_max_iter) {
    // Self-test: L(Id) = Omega_1.
    rep.self_test_max =
        std::max(rep.self_test_max, sup_frobenius(linearized_apply(id, h1, spec.bundle, spec.g, S1) - S1));
    const double omin = herm_eig_bounds(hermitian_part(S1, h1), h1).min.values().real().minCoeff();
    if (omin < opt.pd_margin) rep.omega_positivity_lost = true;

    // L(Psi) = P H^{-1} - S^{h1}
    const MatrixField rhs = endo_product(spec.P, inverse(H)) - S1;
    LinearizedOperator op(h1, spec.bundle, spec.g, S1);
    Eigen::GMRES<LinearizedOperator, ShiftedLaplacePreconditioner> gmres;
    gmres.preconditioner().configure(spec.grid(), spec.g.g0(), std::max(mean_eigenvalue(S1), 1e-3));
    gmres.set_restart(opt.krylov_restart);
    gmres.setMaxIterations(opt.krylov_max_iter);
    gmres.setTolerance(opt.krylov_tol);
    gmres.compute(op);
    const Eigen::VectorXd b = op.packing().pack(endo_product(rhs, h1.matrix()));
    const Eigen::VectorXd x = gmres.solve(b);
    rep.krylov_iterations.push_back(static_cast<int>(gmres.iterations()));
    const MatrixField Psi =
        endo_product(drop_nyquist(op.packing().unpack(spec.grid(), x)), h1.inverse());
    // The Hermitian step must solve the unprojected equation as well.
    const MatrixField LK = endo_product(linearized_apply(Psi, h1, spec.bundle, spec.g, S1), h1.matrix());
    if (rep.iterations == 0) rhs_scale = std::max(sup_frobenius(LK), 1e-300);
    rep.hermitian_defect_max = std::max(rep.hermitian_defect_max, antihermitian_sup(LK) / rhs_scale);

    // Armijo backtracking on the residual sup-norm.
    bool accepted = false;
    for (int k = 0; k <= 8 && !accepted; ++k) {
      const double alpha = std::ldexp(1.0, -k);
      MatrixField step = Psi;
      step *= Complex(alpha);
      MatrixField Hn, Sn, Rn;
      std::optional<HermitianMetricField> hn;
      try {
        const MatrixField E = exp_self_adjoint(step, h1);
        hn.emplace(filtered_metric(endo_product(E, H), spec.h0));
        Hn = endo_product(hn->matrix(), spec.h0.inverse());
      } catch (const std::domain_error&) {
        continue;
      }
      Sn = hym_higgs_tensor(*hn, spec.bundle, spec.g);
      Rn = endo_product(Sn, Hn) - spec.P;
      const double rnn = residual_norm(Rn, spec);
      if (rnn <= (1.0 - 1e-4 * alpha) * rn) {
        H = std::move(Hn);
        h1 = std::move(*hn);
        S1 = std::move(Sn);
        rn = rnn;
        rep.step_history.push_back(alpha);
        accepted = true;
      }
    }
    ++rep.iterations;
    if (!accepted) {
      rep.message = "line search failed";
      break;
    }
    rep.residual_history.push_back(rn);
  }
  rep.converged = rn <= opt.residual_tol;
  if (rep.message.empty()) rep.message = rep.converged ? "converged" : "iteration limit reached";
  finish_report(rep, spec, H);
  rep.wall_time = elapsed(t0);
  return rep;
}

SolveReport heat_flow_solve(const ProblemSpec& spec, double tol, const MatrixField* initial_H) {
  const auto t0 = std::chrono::steady_clock::now();
  const SolverOptions& opt = spec.options;
  SolveReport rep;
  MatrixField H = initial_H ? *initial_H : MatrixField::identity(spec.grid(), spec.rank());
  HermitianMetricField h = metric_from_endo(H, spec.h0);
  MatrixField S = hym_higgs_tensor(h, spec.bundle, spec.g);
  double rn = residual_norm(endo_product(S, H) - spec.P, spec);
  rep.residual_history.push_back(rn);

  // Explicit Euler is stable for dt below 2 / (largest eigenvalue of the
  // linearization); its principal part is the Laplacian of g.
  const double lap_max = laplacian_symbol(spec.grid(), spec.g.g0()).cwiseAbs().maxCoeff() /
                         spec.g.factor().values().real().minCoeff();
  double dt = std::min(opt.dt, 1.0 / (lap_max + sup_frobenius(S)));
  rep.step_history.push_back(dt);

  // Slow growth of an unstable mode never doubles the residual in one step,
  // so doubling is measured against the best iterate, which is restored.
  MatrixField H_best = H;
  double r_best = rn;
  while (rn > tol && rep.iterations < opt.max_steps) {
    MatrixField G = S - endo_product(spec.P, inverse(H));
    G *= Complex(-dt);
    const MatrixField K = drop_nyquist(endo_product(hermitian_part(G, h), h.matrix()));
    h = filtered_metric(endo_product(exp_self_adjoint(endo_product(K, h.inverse()), h), H), spec.h0);
    H = endo_product(h.matrix(), spec.h0.inverse());
    S = hym_higgs_tensor(h, spec.bundle, spec.g);
    rn = residual_norm(endo_product(S, H) - spec.P, spec);
    ++rep.iterations;
    if (rn < r_best) {
      r_best = rn;
      H_best = H;
    } else if (!(rn < 2.0 * r_best)) {
      dt *= 0.5;
      ++rep.dt_halvings;
      rep.step_history.push_back(dt);
      H = H_best;
      h = metric_from_endo(H, spec.h0);
      S = hym_higgs_tensor(h, spec.bundle, spec.g);
      rn = r_best;
      if (dt < opt.dt_min) {
        rep.message = "time step below minimum";
        break;
      }
    }
    if (rep.iterations % 50 == 0 || rn <= tol) rep.residual_history.push_back(rn);
  }
  rep.converged = rn <= tol;
  if (rep.message.empty()) rep.message = rep.converged ? "converged" : "step limit reached";
  finish_report(rep, spec, H);
  rep.wall_time = elapsed(t0);
  return rep;
}

GauduchonResult gauduchon_normalize(const HermitianMetricField& h0, const HiggsBundle& bundle, const BaseMetric& g,
                                    double pd_margin) {
  if (!g.flags().is_gauduchon) throw HypothesisError("g Gauduchon", "base metric is not Gauduchon");
  if (!g.is_constant()) throw std::invalid_argument("gauduchon_normalize: only constant base metrics are supported");
  GauduchonResult out;
  out.kappa_before = herm_eig_bounds(hermitian_part(hym_higgs_tensor(h0, bundle, g), h0), h0).min;
  const ScalarField vol = g.volume_density();
  out.lambda0 = (integrate(out.kappa_before, vol) / integrate(ScalarField::constant(g.grid(), 1.0), vol)).real();
  if (!(out.lambda0 > 0.0))
    throw HypothesisError("integral of kappa > 0", "mean of kappa is " + std::to_string(out.lambda0));
  ScalarField rhs = ScalarField::constant(g.grid(), out.lambda0) - out.kappa_before;
  rhs.values() -= rhs.values().mean() * Eigen::VectorXcd::Ones(rhs.values().size());
  out.f = invert_laplacian(rhs, g.g0());
  out.f.values() = out.f.values().real().cast<Complex>();
  out.h0 = HermitianMetricField(scale(exp(out.f * Complex(-1.0)), h0.matrix()));
  out.kappa_after = herm_eig_bounds(hermitian_part(hym_higgs_tensor(out.h0, bundle, g), out.h0), out.h0).min;
  if (out.kappa_after.values().real().minCoeff() < pd_margin)
    throw HypothesisError("Omega > 0", "normalised tensor is not positive definite");
  return out;
}

}  // namespace hymh
