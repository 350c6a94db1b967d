#include "hymh/higgs_ops.hpp"

#include "hymh/random.hpp"

#include <algorithm>
#include <cmath>

namespace hymh {

HiggsField::HiggsField(int n, int rank) : rank_(rank), theta_(n, CMatrix::Zero(rank, rank)) {}

HiggsField::HiggsField(std::vector<CMatrix> components) : theta_(std::move(components)) {
  if (theta_.empty()) throw std::invalid_argument("HiggsField: need at least one component");
  rank_ = static_cast<int>(theta_[0].rows());
  for (const auto& t : theta_)
    if (t.rows() != rank_ || t.cols() != rank_) throw std::invalid_argument("HiggsField: component shape");
}

HiggsField HiggsField::from_fields(const std::vector<MatrixField>& components) {
  std::vector<CMatrix> c;
  for (const auto& f : components) {
    const int n = f.grid().n();
    for (int j = 0; j < n; ++j)
      if (sup_frobenius(derivative(f, n + j)) > 1e-8) throw std::domain_error("Higgs field is not holomorphic");
    CMatrix mean = CMatrix::Zero(f.rank(), f.rank());
    for (std::size_t p = 0; p < f.points(); ++p) mean += f.at(p);
    mean /= static_cast<double>(f.points());
    for (std::size_t p = 0; p < f.points(); ++p)
      if ((f.at(p) - mean).norm() > 1e-8) throw std::domain_error("Higgs field is not constant");
    c.push_back(mean);
  }
  return HiggsField(std::move(c));
}

bool HiggsField::is_zero() const {
  return std::all_of(theta_.begin(), theta_.end(), [](const CMatrix& t) { return t.norm() == 0.0; });
}

double HiggsField::wedge_defect() const {
  double worst = 0.0;
  for (int i = 0; i < n(); ++i)
    for (int j = i + 1; j < n(); ++j)
      worst = std::max(worst, (theta_[i] * theta_[j] - theta_[j] * theta_[i]).norm());
  return worst;
}

std::vector<MatrixField> HiggsField::fields(const GridSpec& grid) const {
  std::vector<MatrixField> out;
  for (const auto& t : theta_) out.push_back(MatrixField::constant(grid, t));
  return out;
}

FormMatrixField HiggsField::form(const GridSpec& grid) const { return holomorphic_one_form(fields(grid)); }

HiggsBundle::HiggsBundle(HiggsField t) : theta(std::move(t)), twist(CMatrix::Zero(theta.n(), theta.n())) {}

HiggsBundle::HiggsBundle(HiggsField t, CMatrix b) : theta(std::move(t)), twist(std::move(b)) {
  if (twist.rows() != theta.n() || twist.cols() != theta.n())
    throw std::invalid_argument("HiggsBundle: twist must be n x n");
  if ((twist - twist.adjoint()).norm() > 1e-14 * std::max(1.0, twist.norm()))
    throw std::invalid_argument("HiggsBundle: twist must be Hermitian");
}

std::vector<MatrixField> higgs_adjoint(const HiggsField& theta, const HermitianMetricField& h) {
  if (theta.rank() != h.rank()) throw std::invalid_argument("higgs_adjoint: rank mismatch");
  std::vector<MatrixField> out;
  for (int j = 0; j < theta.n(); ++j) {
    const CMatrix td = theta[j].adjoint();
    out.push_back(generate(h.grid(), h.rank(), [&](std::size_t p, auto o) {
      o.noalias() = h.at(p) * td * h.inverse().at(p);
    }));
  }
  return out;
}

double adjoint_transform_check(const HiggsField& theta, const HermitianMetricField& h0,
                               const HermitianMetricField& h) {
  const auto ts = higgs_adjoint(theta, h);
  const auto t0 = higgs_adjoint(theta, h0);
  const MatrixField H = endo_product(h.matrix(), h0.inverse());
  const MatrixField Hinv = endo_product(h0.matrix(), h.inverse());
  double diff = 0.0, scale = 0.0;
  for (int j = 0; j < theta.n(); ++j) {
    diff = std::max(diff, sup_frobenius(ts[j] - endo_product(endo_product(H, t0[j]), Hinv)));
    scale = std::max(scale, sup_frobenius(ts[j]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

std::vector<MatrixField> chern_connection(const HermitianMetricField& h) {
  const int n = h.grid().n();
  std::vector<int> dirs(n);
  for (int i = 0; i < n; ++i) dirs[i] = i;
  std::vector<MatrixField> A = derivatives(h.matrix(), dirs);
  for (auto& a : A) a = endo_product(a, h.inverse());
  return A;
}

FormMatrixField chern_curvature(const HermitianMetricField& h) {
  const int n = h.grid().n();
  const auto A = chern_connection(h);
  FormMatrixField R(h.grid(), h.rank(), 2);
  std::vector<int> dirs(n);
  for (int j = 0; j < n; ++j) dirs[j] = n + j;
  for (int i = 0; i < n; ++i) {
    std::vector<MatrixField> d = derivatives(A[i], dirs);
    for (int j = 0; j < n; ++j) R.set(mixed_index(n, i, j), -d[j]);
  }
  return R;
}

namespace {

Complex twist_trace(const HiggsBundle& b, const BaseMetric& g, std::size_t p) {
  if (!b.twisted()) return 0.0;
  Complex s = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) s += g.gup().at(p)(i, j) * b.twist(i, j);
  return s;
}

}  // namespace

MatrixField hym_higgs_tensor(const HermitianMetricField& h, const HiggsBundle& bundle, const BaseMetric& g) {
  require_same_grid(h.grid(), g.grid(), "hym_higgs_tensor");
  if (bundle.rank() != h.rank() || bundle.n() != g.n()) throw std::invalid_argument("hym_higgs_tensor: shape mismatch");
  const int n = g.n();
  const int r = h.rank();
  const auto R = chern_curvature(h);
  const auto& theta = bundle.theta;
  std::vector<CMatrix> td(n);
  for (int j = 0; j < n; ++j) td[j] = theta[j].adjoint();
  const bool higgs = !theta.is_zero();
  return generate(h.grid(), r, [&](std::size_t p, auto out) {
    out.setZero();
    const CMatrix hp = h.at(p), hi = h.inverse().at(p);
    for (int j = 0; j < n; ++j) {
      CMatrix ts;
      if (higgs) ts = hp * td[j] * hi;
      for (int i = 0; i < n; ++i) {
        const Complex w = g.gup().at(p)(i, j);
        CMatrix term = R.ref(mixed_index(n, i, j)).at(p);
        if (higgs) term += ts * theta[i] - theta[i] * ts;
        out += w * term;
      }
    }
    const Complex b = twist_trace(bundle, g, p);
    if (b != 0.0) out.diagonal().array() += b;
  });
}

FormMatrixField dprime(const FormMatrixField& P, const HermitianMetricField& h0, const HiggsField& theta) {
  const int n = P.grid().n();
  FormMatrixField B(P.grid(), P.rank(), 1);
  const auto A = chern_connection(h0);
  const auto ts = higgs_adjoint(theta, h0);
  for (int i = 0; i < n; ++i) B.set(i, A[i]);
  if (!theta.is_zero())
    for (int j = 0; j < n; ++j) B.set(n + j, ts[j]);
  return del(P) + graded_action(B, P);
}

FormMatrixField dsecond(const FormMatrixField& P, const HiggsField& theta) {
  FormMatrixField out = delbar(P);
  if (!theta.is_zero()) out += graded_action(theta.form(P.grid()), P);
  return out;
}

MatrixField curvature_difference(const MatrixField& H, const HermitianMetricField& h0, const HiggsField& theta,
                                 const BaseMetric& g) {
  const FormMatrixField Q = right_multiply(dprime(as_form(H), h0, theta), inverse(H));
  return lambda_contract(dsecond(Q, theta), g);
}

MatrixField f_theta(const MatrixField& H, const HermitianMetricField& h0, const HiggsField& theta,
                    const BaseMetric& g) {
  if (theta.is_zero()) return MatrixField(H.grid(), H.rank());
  const FormMatrixField ts = antiholomorphic_one_form(higgs_adjoint(theta, h0));
  const FormMatrixField Q = right_multiply(graded_action(ts, as_form(H)), inverse(H));
  return lambda_contract(graded_action(theta.form(H.grid()), Q), g);
}

MatrixField f_theta_expanded(const MatrixField& H, const HermitianMetricField& h0, const HiggsField& theta,
                             const BaseMetric& g) {
  const int n = g.n();
  const auto ts = higgs_adjoint(theta, h0);
  return generate(H.grid(), H.rank(), [&](std::size_t p, auto out) {
    const CMatrix Hp = H.at(p);
    const CMatrix Hi = Hp.inverse();
    CMatrix acc = CMatrix::Zero(H.rank(), H.rank());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const CMatrix t = theta[i];
        const CMatrix s = ts[j].at(p);
        acc += g.gup().at(p)(i, j) * (Hp * s * Hi * t * Hp - s * t * Hp - t * Hp * s + t * s * Hp);
      }
    out = acc * Hi;
  });
}

double BochnerKodairaTerms::residual() const {
  const Complex lhs = dprime_term + torsion_term;
  const double scale = std::max({std::abs(lhs), std::abs(rhs), std::abs(dprime_term)});
  if (scale < 1e-300) return 0.0;
  return std::abs(lhs - rhs) / scale;
}

BochnerKodairaTerms bochner_kodaira_terms(const MatrixField& s, const FormMatrixField& t, const HiggsField& theta,
                                          const HermitianMetricField& h0, const BaseMetric& g) {
  if (t.degree() != 1) throw std::invalid_argument("bochner_kodaira_terms: t must be a 1-form");
  const int n = g.n();
  const GridSpec& grid = g.grid();
  const auto A = chern_connection(h0);
  const auto ts = higgs_adjoint(theta, h0);
  const auto tor = torsion(g);
  const ScalarField vol = g.volume_density();

  // D' s = (d s + s A) + s theta*, components indexed like the 1-form basis.
  std::vector<MatrixField> ds;
  for (int i = 0; i < n; ++i) ds.push_back(derivative(s, i) + endo_product(s, A[i]));
  for (int j = 0; j < n; ++j) ds.push_back(endo_product(s, ts[j]));

  auto pair_one_forms = [&](const std::vector<MatrixField>& a) {
    ScalarField dens(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const CMatrix hp = h0.at(p);
      Complex acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const Complex w = g.gup().at(p)(i, j);
          if (t.has(j)) acc += w * (a[i].at(p) * hp * t.ref(j).at(p).adjoint()).trace();
          if (t.has(n + j) && !a[n + i].empty())
            acc += std::conj(w) * (a[n + i].at(p) * hp * t.ref(n + j).at(p).adjoint()).trace();
        }
      dens[p] = acc;
    }
    return integrate(dens, vol);
  };

  BochnerKodairaTerms out;
  out.dprime_term = pair_one_forms(ds);

  std::vector<MatrixField> taus(2 * n);
  for (int i = 0; i < n; ++i) taus[i] = scale(tor.tau[i], s);
  out.torsion_term = pair_one_forms(taus);

  // sqrt(-1) Lambda D'' t = g^{i jbar}(-d_jbar t_i + t_jbar theta_i)
  MatrixField v(grid, s.rank());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      MatrixField term(grid, s.rank());
      if (t.has(i)) term -= derivative(t.ref(i), n + j);
      if (t.has(n + j)) term += endo_product(t.ref(n + j), MatrixField::constant(grid, theta[i]));
      v += scale(g.gup().component(i, j), term);
    }
  ScalarField dens(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) dens[p] = (s.at(p) * h0.at(p) * v.at(p).adjoint()).trace();
  out.rhs = integrate(dens, vol);
  return out;
}

double bochner_kodaira_residual(const HiggsField& theta, const HermitianMetricField& h0, const BaseMetric& g,
                                std::uint64_t seed) {
  CounterRng rng(seed, 0xb0c4);
  const GridSpec& grid = g.grid();
  const int r = h0.rank();
  const int kmax = std::min(3, grid.N() / 4);
  const MatrixField s = random_matrix_field(grid, r, rng, kmax, 1.0);
  FormMatrixField t(grid, r, 1);
  for (int k = 0; k < t.count(); ++k) t.set(k, random_matrix_field(grid, r, rng, kmax, 1.0));
  return bochner_kodaira_terms(s, t, theta, h0, g).residual();
}

HiggsCurvature full_higgs_curvature(const HermitianMetricField& h, const HiggsBundle& bundle) {
  const auto& theta = bundle.theta;
  if (!theta.is_integrable()) throw std::domain_error("theta ^ theta != 0");
  const GridSpec& grid = h.grid();
  const int n = grid.n();
  HiggsCurvature c;
  const FormMatrixField th = theta.form(grid);
  const FormMatrixField Aform = holomorphic_one_form(chern_connection(h));
  const FormMatrixField ts = antiholomorphic_one_form(higgs_adjoint(theta, h));

  // theta has constant components, so d'theta vanishes and d^h theta = [A, theta].
  c.r20 = graded_action(Aform, th);
  c.r02 = delbar(ts);
  c.r11 = chern_curvature(h);
  if (!theta.is_zero()) {
    c.r11 -= wedge(th, ts);
    c.r11 -= wedge(ts, th);
  }
  if (bundle.twisted())
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        c.r11.add(mixed_index(n, i, j), MatrixField::identity(grid, h.rank()), bundle.twist(i, j));
  // Drop the (1,1) / (2,0) / (0,2) components that belong to the other bidegrees.
  for (int a = 0; a < 2 * n; ++a)
    for (int b = a + 1; b < 2 * n; ++b) {
      const bool hol = b < n, anti = a >= n;
      const int k = pair_index(n, a, b);
      if (!hol) c.r20.set(k, MatrixField());
      if (!anti) c.r02.set(k, MatrixField());
      if (hol || anti) c.r11.set(k, MatrixField());
    }
  return c;
}

}  // namespace hymh
