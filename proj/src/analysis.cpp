#include "hymh/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hymh {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

// Complementary pairs (a<b | c<d) of {0,1,2,3} with the sign of e_a e_b e_c e_d
// against e_0 e_1 e_2 e_3 = dz1 ^ dz2 ^ dzbar1 ^ dzbar2 = dV0.
struct Split {
  int a, b, c, d, sign;
};
constexpr Split kSplits[6] = {{0, 1, 2, 3, 1},  {0, 2, 1, 3, -1}, {0, 3, 1, 2, 1},
                              {1, 2, 0, 3, 1},  {1, 3, 0, 2, -1}, {2, 3, 0, 1, 1}};

// Component k of a 2-form at point p as a dense block (zero when unset).
CMatrix block(const FormMatrixField& F, int k, std::size_t p) {
  if (!F.has(k)) return CMatrix::Zero(F.rank(), F.rank());
  return F.ref(k).at(p);
}

void require_chern_setting(const HiggsBundle& bundle, const BaseMetric& g, bool need_n2, const char* where) {
  if (!bundle.theta.is_integrable()) throw std::domain_error(std::string(where) + ": theta ^ theta != 0");
  if (!g.is_constant()) throw std::domain_error(std::string(where) + ": base metric must be constant (Kaehler)");
  if (need_n2 && g.n() != 2) throw std::domain_error(std::string(where) + ": requires n = 2");
  if (g.n() > 2) throw std::domain_error(std::string(where) + ": requires n <= 2");
}

// Top coefficient of the wedge of two 2-forms given blockwise by F(k), G(k).
template <typename BF, typename BG>
Complex trace_wedge(int n, BF&& F, BG&& G) {
  Complex out = 0.0;
  for (const Split& s : kSplits)
    out += double(s.sign) * (F(pair_index(n, s.a, s.b)) * G(pair_index(n, s.c, s.d))).trace();
  return out;
}

double relative_gap(Complex x, Complex y, double floor = 0.0) {
  const double scale = std::max({std::abs(x), std::abs(y), floor});
  const double diff = std::abs(x - y);
  return scale < 1e-14 ? diff : diff / scale;
}

}  // namespace

const char* to_string(ComparisonVerdict::Status s) {
  switch (s) {
    case ComparisonVerdict::Status::pass: return "pass";
    case ComparisonVerdict::Status::fail: return "fail";
    case ComparisonVerdict::Status::hypothesis_not_met: return "hypothesis-not-met";
  }
  return "unknown";
}

ComparisonVerdict comparison_check(const HermitianMetricField& h, const HermitianMetricField& h0,
                                   const HiggsBundle& bundle, const BaseMetric& g, double tol, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("comparison_check: scale must be positive");
  ComparisonVerdict v;
  v.tolerance = tol;
  v.scale = lambda;
  const MatrixField S0 = hym_higgs_tensor(h0, bundle, g);
  const MatrixField S = hym_higgs_tensor(h, bundle, g);
  const MatrixField H = endo_product(h.matrix(), h0.inverse());

  const EigenBounds b0 = herm_eig_bounds(hermitian_part(S0, h0), h0);
  v.omega_min = b0.min.values().real().minCoeff();
  MatrixField M = S0;
  M *= Complex(lambda);
  M -= endo_product(S, H);
  // A difference of nearly equal tensors: strip the rounding-level skew part.
  const EigenBounds bm = herm_eig_bounds(hermitian_part(M, h0), h0);
  v.hypothesis_gap = bm.min.values().real().minCoeff();
  const double scale = std::max(1.0, lambda * b0.max.values().real().maxCoeff());

  v.kappa = herm_eig_bounds(H, h0).max;
  v.max_eigenvalue = v.kappa.values().real().maxCoeff() / lambda;

  if (!(v.omega_min > 0.0)) {
    v.status = ComparisonVerdict::Status::hypothesis_not_met;
    v.hypothesis = "Omega > 0";
  } else if (v.hypothesis_gap < -tol * scale) {
    v.status = ComparisonVerdict::Status::hypothesis_not_met;
    v.hypothesis = "S^h <= lambda S^{h0}";
  } else {
    v.pass = v.max_eigenvalue <= 1.0 + tol;
    v.status = v.pass ? ComparisonVerdict::Status::pass : ComparisonVerdict::Status::fail;
  }
  return v;
}

namespace {

ChernForms forms_from_curvature(const HiggsCurvature& curv, const GridSpec& grid, int rank) {
  const int n = grid.n();
  const int count = form_basis_count(n, 2);
  ChernForms out;
  out.c1 = FormMatrixField(grid, 1, 2);
  out.c1_tilde = FormMatrixField(grid, 1, 2);
  const Complex c1f = kI / (2.0 * kPi);
  for (int k = 0; k < count; ++k) {
    const bool in11 = curv.r11.has(k);
    const FormMatrixField* src = in11 ? &curv.r11 : curv.r20.has(k) ? &curv.r20 : curv.r02.has(k) ? &curv.r02 : nullptr;
    if (!src) continue;
    MatrixField tr(grid, 1);
    for (std::size_t p = 0; p < grid.size(); ++p) tr.at(p)(0, 0) = c1f * src->ref(k).at(p).trace();
    if (in11) out.c1_tilde.set(k, tr);
    out.c1.set(k, std::move(tr));
  }
  if (n < 2) return out;

  out.c1_squared = ScalarField(grid);
  out.c2 = ScalarField(grid);
  out.c1_tilde_squared = ScalarField(grid);
  out.c2_tilde = ScalarField(grid);
  const double c2f = -1.0 / (8.0 * kPi * kPi);
  std::vector<CMatrix> R(count, CMatrix::Zero(rank, rank)), R11(count, CMatrix::Zero(rank, rank));
  std::vector<CMatrix> trR(count, CMatrix::Zero(1, 1)), trR11(count, CMatrix::Zero(1, 1));
  std::vector<const MatrixField*> full_src(count, nullptr), r11_src(count, nullptr);
  for (int k = 0; k < count; ++k) {
    if (curv.r11.has(k)) r11_src[k] = full_src[k] = &curv.r11.ref(k);
    if (curv.r20.has(k)) full_src[k] = &curv.r20.ref(k);
    if (curv.r02.has(k)) full_src[k] = &curv.r02.ref(k);
  }
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (int k = 0; k < count; ++k) {
      if (r11_src[k]) R11[k] = r11_src[k]->at(p); else R11[k].setZero();
      if (full_src[k]) R[k] = full_src[k]->at(p); else R[k].setZero();
      trR[k](0, 0) = R[k].trace();
      trR11[k](0, 0) = R11[k].trace();
    }
    auto at = [](const std::vector<CMatrix>& v) { return [&v](int k) -> const CMatrix& { return v[k]; }; };
    const Complex xx = trace_wedge(n, at(trR), at(trR)), yy = trace_wedge(n, at(R), at(R));
    const Complex xt = trace_wedge(n, at(trR11), at(trR11)), yt = trace_wedge(n, at(R11), at(R11));
    out.c1_squared[p] = c1f * c1f * xx;
    out.c2[p] = c2f * (xx - yy);
    out.c1_tilde_squared[p] = c1f * c1f * xt;
    out.c2_tilde[p] = c2f * (xt - yt);
  }
  return out;
}

}  // namespace

ChernForms chern_forms(const HermitianMetricField& h, const HiggsBundle& bundle, const BaseMetric& g) {
  require_chern_setting(bundle, g, false, "chern_forms");
  return forms_from_curvature(full_higgs_curvature(h, bundle), h.grid(), h.rank());
}

Complex integrate_top(const ScalarField& coeff, const BaseMetric& g) {
  return integrate(coeff) * std::pow(2.0, g.n());
}

Complex integrate_c1_omega(const ChernForms& forms, const BaseMetric& g) {
  const GridSpec& grid = g.grid();
  const int n = g.n();
  ScalarField top(grid);
  if (n == 1) {
    // dz ^ dzbar = -sqrt(-1) dV0
    if (forms.c1.has(0))
      for (std::size_t p = 0; p < grid.size(); ++p) top[p] = -kI * forms.c1.ref(0).at(p)(0, 0);
    return integrate_top(top, g);
  }
  if (n != 2) throw std::domain_error("integrate_c1_omega: requires n <= 2");
  const int count = form_basis_count(n, 2);
  std::vector<CMatrix> omega(count, CMatrix::Zero(1, 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) omega[mixed_index(n, i, j)](0, 0) = kI * g.g0()(i, j);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    auto c = [&](int k) { return block(forms.c1, k, p); };
    auto w = [&](int k) { return omega[k]; };
    top[p] = trace_wedge(n, c, w);
  }
  return integrate_top(top, g);
}

CurvatureInvariants curvature_invariants(const FormMatrixField& r11, const HermitianMetricField& h,
                                         const BaseMetric& g) {
  if (!g.is_constant()) throw std::domain_error("curvature_invariants: base metric must be constant");
  const GridSpec& grid = h.grid();
  const int n = grid.n(), r = h.rank();
  const CMatrix G = g.g0().llt().matrixL();
  const CMatrix E = G.inverse();  // g-orthonormal coframe
  CurvatureInvariants inv{ScalarField(grid), ScalarField(grid), ScalarField(grid), ScalarField(grid),
                          ScalarField(grid), ScalarField(grid), ScalarField(grid)};
  std::vector<CMatrix> R(n * n), Q(n * n);
  Eigen::SelfAdjointEigenSolver<CMatrix> es;
  const CMatrix id = CMatrix::Identity(r, r);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R[i * n + j] = block(r11, mixed_index(n, i, j), p);
    const CMatrix L = h.cholesky().at(p);
    const auto tri = L.triangularView<Eigen::Lower>();
    CMatrix ric2 = CMatrix::Zero(r, r);
    CMatrix rho(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        CMatrix hat = CMatrix::Zero(r, r);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) hat += E(a, i) * std::conj(E(b, j)) * R[i * n + j];
        Q[a * n + b] = tri.solve(hat * L);  // h-orthonormal frame
        rho(a, b) = hat.trace();
        if (a == b) ric2 += Q[a * n + b];
      }
    const Complex s = rho.trace();
    double r11_sq = 0.0;
    for (const CMatrix& q : Q) r11_sq += q.squaredNorm();
    const double ric1_sq = rho.squaredNorm(), ric2_sq = ric2.squaredNorm();
    double t_sq = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        CMatrix t = Q[a * n + b] - rho(a, b) / double(r) * id;
        if (a == b) t += -ric2 / double(n) + s / double(n * r) * id;
        t_sq += t.squaredNorm();
      }
    es.compute(0.5 * (ric2 + ric2.adjoint()), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd lam = es.eigenvalues();
    double spread = 0.0;
    for (int k = 0; k < r; ++k)
      for (int l = k + 1; l < r; ++l) spread += (lam[k] - lam[l]) * (lam[k] - lam[l]);
    inv.s[p] = s;
    inv.ric1_sq[p] = ric1_sq;
    inv.ric2_sq[p] = ric2_sq;
    inv.r11_sq[p] = r11_sq;
    inv.t_sq[p] = t_sq;
    inv.t_sq_formula[p] = r11_sq - ric2_sq / n - ric1_sq / r + std::norm(s) / (n * r);
    inv.spread[p] = spread;
  }
  return inv;
}

double spread_identity_residual(const Eigen::VectorXd& lambda) {
  const double r = double(lambda.size());
  const double s = lambda.sum();
  double spread = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    for (Eigen::Index l = k + 1; l < lambda.size(); ++l) spread += (lambda[k] - lambda[l]) * (lambda[k] - lambda[l]);
  return std::abs(s * s - r * lambda.squaredNorm() + spread);
}

double spread_violation(const Eigen::VectorXd& lambda, double a, double b) {
  const double r = double(lambda.size());
  double spread = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    for (Eigen::Index l = k + 1; l < lambda.size(); ++l) spread += (lambda[k] - lambda[l]) * (lambda[k] - lambda[l]);
  return std::max(0.0, spread - r * (r - 1.0) * (b - a) * (b - a) / 2.0);
}

namespace {

ChernReport build_report(const HermitianMetricField& h, const HiggsBundle& bundle, const BaseMetric& g, double tol) {
  require_chern_setting(bundle, g, true, "chern_identity_check");
  const GridSpec& grid = h.grid();
  const int n = 2, r = h.rank();
  ChernReport rep;

  const HiggsCurvature curv = full_higgs_curvature(h, bundle);
  const ChernForms forms = forms_from_curvature(curv, grid, r);
  rep.c1_tilde_sq_form = integrate_top(forms.c1_tilde_squared, g);
  rep.c2_tilde_form = integrate_top(forms.c2_tilde, g);
  rep.c1_sq = integrate_top(forms.c1_squared, g);
  rep.c2 = integrate_top(forms.c2, g);
  rep.c1_omega = integrate_c1_omega(forms, g);
  rep.discriminant_full = double(r - 1) * rep.c1_sq - 2.0 * r * rep.c2;
  rep.discriminant_tilde = double(r - 1) * rep.c1_tilde_sq_form - 2.0 * r * rep.c2_tilde_form;

  const CurvatureInvariants inv = curvature_invariants(curv.r11, h, g);
  const ScalarField wn = g.omega_n_density();
  ScalarField f1(grid), f2(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Complex s2 = inv.s[p] * inv.s[p];
    f1[p] = s2 - inv.ric1_sq[p];
    f2[p] = s2 - inv.ric1_sq[p] - inv.ric2_sq[p] + inv.r11_sq[p];
  }
  rep.c1_tilde_sq_scalar = integrate(f1, wn) / (4.0 * kPi * kPi * n * (n - 1));
  rep.c2_tilde_scalar = integrate(f2, wn) / (8.0 * kPi * kPi * n * (n - 1));
  // Integrals of exact forms vanish and the integrands can cancel pointwise
  // (for r = 1, c2 is identically zero); measure against the size of the terms.
  ScalarField a1(grid), a2(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    a1[p] = std::norm(inv.s[p]) + std::abs(inv.ric1_sq[p]);
    a2[p] = a1[p] + std::abs(inv.ric2_sq[p]) + std::abs(inv.r11_sq[p]);
  }
  const double m1 = integrate(a1, wn).real() / (4.0 * kPi * kPi * n * (n - 1));
  const double m2 = integrate(a2, wn).real() / (8.0 * kPi * kPi * n * (n - 1));
  rep.c1_residual = relative_gap(rep.c1_tilde_sq_form, rep.c1_tilde_sq_scalar, m1);
  rep.c2_residual = relative_gap(rep.c2_tilde_form, rep.c2_tilde_scalar, m2);

  // Trace-free (2,0) and (0,2) parts.
  const int k20 = pair_index(n, 0, 1), k02 = pair_index(n, 2, 3);
  ScalarField eta(grid);
  const CMatrix id = CMatrix::Identity(r, r);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    CMatrix e20 = block(curv.r20, k20, p), e02 = block(curv.r02, k02, p);
    e20 -= e20.trace() / double(r) * id;
    e02 -= e02.trace() / double(r) * id;
    eta[p] = (e20 * e02).trace();
  }
  rep.eta_integral = integrate_top(eta, g);
  const Complex eta_term = -double(r) / (2.0 * kPi * kPi) * rep.eta_integral;
  rep.eta_residual = relative_gap(rep.discriminant_full - rep.discriminant_tilde, eta_term);
  rep.eta_nonnegative = rep.eta_integral.real() >= -tol;

  double t2 = 0.0;
  double sup[5] = {0, 0, 0, 0, 0};
  for (std::size_t p = 0; p < grid.size(); ++p) {
    t2 = std::max(t2, std::abs(inv.t_sq[p] - inv.t_sq_formula[p]));
    const double vals[5] = {std::norm(inv.s[p]), inv.ric1_sq[p].real(), inv.ric2_sq[p].real(), inv.r11_sq[p].real(),
                            inv.t_sq[p].real()};
    for (int k = 0; k < 5; ++k) sup[k] = std::max(sup[k], vals[k]);
  }
  rep.t2_residual = t2;
  std::copy(sup, sup + 5, rep.invariants_sup);

  for (const Complex z : {rep.c1_tilde_sq_form, rep.c2_tilde_form, rep.c1_tilde_sq_scalar, rep.c2_tilde_scalar,
                          rep.c1_omega, rep.c1_sq, rep.c2, rep.eta_integral})
    rep.max_imaginary = std::max(rep.max_imaginary, std::abs(z.imag()));
  return rep;
}

}  // namespace

ChernReport chern_identity_check(const HermitianMetricField& h, const HiggsBundle& bundle, const BaseMetric& g) {
  return build_report(h, bundle, g, 1e-9);
}

double t_tensor_check(const HermitianMetricField& h, const HiggsBundle& bundle, const BaseMetric& g) {
  if (!g.is_constant()) throw std::domain_error("t_tensor_check: base metric must be constant");
  const HiggsCurvature curv = full_higgs_curvature(h, bundle);
  const CurvatureInvariants inv = curvature_invariants(curv.r11, h, g);
  double worst = 0.0;
  for (std::size_t p = 0; p < h.grid().size(); ++p)
    worst = std::max(worst, std::abs(inv.t_sq[p] - inv.t_sq_formula[p]));
  return worst;
}

ChernReport chern_inequality_check(const HermitianMetricField& h0, const HiggsBundle& bundle, const BaseMetric& g,
                                   double tol) {
  ChernReport rep = build_report(h0, bundle, g, tol);
  const GridSpec& grid = h0.grid();
  const int n = 2, r = h0.rank();
  const MatrixField S0 = hym_higgs_tensor(h0, bundle, g);
  const EigenBounds eb = herm_eig_bounds(hermitian_part(S0, h0), h0);
  rep.a = eb.min.values().real().minCoeff();
  rep.b = eb.max.values().real().maxCoeff();
  const double vol = integrate(ScalarField::constant(grid, 1.0), g.omega_n_density()).real();
  rep.rhs = r * (r - 1.0) * (rep.b - rep.a) * (rep.b - rep.a) / (8.0 * kPi * kPi * n * n) * vol;
  rep.full_bound = rep.discriminant_full.real() <= rep.rhs + tol;
  rep.tilde_bound = rep.discriminant_tilde.real() <= rep.rhs + tol;

  // Spread on the spectrum of S^{h0} directly.
  Eigen::SelfAdjointEigenSolver<CMatrix> es;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const CMatrix L = h0.cholesky().at(p);
    const CMatrix Q = L.triangularView<Eigen::Lower>().solve(S0.at(p) * L);
    es.compute(0.5 * (Q + Q.adjoint()), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd lam = es.eigenvalues();
    rep.spread_identity_residual = std::max(rep.spread_identity_residual, spread_identity_residual(lam));
    rep.spread_violation = std::max(rep.spread_violation, spread_violation(lam, rep.a, rep.b));
  }
  return rep;
}

}  // namespace hymh
