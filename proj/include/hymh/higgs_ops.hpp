#pragma once

#include "hymh/geometry.hpp"

namespace hymh {

/// Higgs field theta = sum_i theta_i dz^i on the trivial bundle. Global
/// holomorphic endomorphisms of a trivial bundle over a torus are constant,
/// so the components are stored as constant matrices.
class HiggsField {
 public:
  HiggsField() = default;
  HiggsField(int n, int rank);
  explicit HiggsField(std::vector<CMatrix> components);
  /// Accepts arbitrary fields; throws std::domain_error unless each component
  /// has |dbar theta_i| <= 1e-8 (which forces it to be constant).
  static HiggsField from_fields(const std::vector<MatrixField>& components);

  int n() const { return static_cast<int>(theta_.size()); }
  int rank() const { return rank_; }
  const CMatrix& operator[](int i) const { return theta_.at(i); }
  const std::vector<CMatrix>& components() const { return theta_; }
  bool is_zero() const;
  /// max_{i<j} |[theta_i, theta_j]|_F, i.e. the size of theta ^ theta.
  double wedge_defect() const;
  bool is_integrable(double tol = 1e-12) const { return wedge_defect() <= tol; }

  std::vector<MatrixField> fields(const GridSpec& grid) const;
  FormMatrixField form(const GridSpec& grid) const;

 private:
  int rank_ = 0;
  std::vector<CMatrix> theta_;
};

/// Holomorphic data of the bundle: the Higgs field and the constant curvature
/// B_{i jbar} of an auxiliary line factor. The bundle is O^r twisted by a line
/// bundle whose curvature is the constant form B; B enters every curvature as
/// B_{i jbar} Id and drops out of every H-dependent operator.
struct HiggsBundle {
  HiggsField theta;
  CMatrix twist;  // n x n Hermitian; zero for the untwisted bundle

  HiggsBundle() = default;
  explicit HiggsBundle(HiggsField t);
  HiggsBundle(HiggsField t, CMatrix b);
  int rank() const { return theta.rank(); }
  int n() const { return theta.n(); }
  bool twisted() const { return twist.size() && twist.norm() > 0.0; }
};

/// (theta*_h)_jbar = h theta_j^dagger h^{-1}: h(s theta_j, t) = h(s, t theta*_j).
std::vector<MatrixField> higgs_adjoint(const HiggsField& theta, const HermitianMetricField& h);
/// sup |theta*_h - H theta*_{h0} H^{-1}| relative to sup |theta*_h|.
double adjoint_transform_check(const HiggsField& theta, const HermitianMetricField& h0,
                               const HermitianMetricField& h);

/// Chern connection coefficients A_i = (d_i h) h^{-1}, so that d^h s = ds + s A.
std::vector<MatrixField> chern_connection(const HermitianMetricField& h);
/// Chern curvature (1,1)-form R^h = dbar A of the untwisted bundle.
FormMatrixField chern_curvature(const HermitianMetricField& h);

/// S^h = Lambda(sqrt(-1) R^{D^h}) =
///   g^{i jbar}(R_{i jbar} + B_{i jbar} Id - theta_i theta*_j + theta*_j theta_i).
MatrixField hym_higgs_tensor(const HermitianMetricField& h, const HiggsBundle& bundle, const BaseMetric& g);

/// D'^{h0} P = d^{h0} P + (-1)^p P.theta*_{h0} - theta*_{h0}.P for P of degree 0 or 1.
FormMatrixField dprime(const FormMatrixField& P, const HermitianMetricField& h0, const HiggsField& theta);
/// D'' P = dbar P + (-1)^p P.theta - theta.P for P of degree 0 or 1.
FormMatrixField dsecond(const FormMatrixField& P, const HiggsField& theta);

/// Lambda sqrt(-1) D''(D'^{h0} H . H^{-1}).
MatrixField curvature_difference(const MatrixField& H, const HermitianMetricField& h0, const HiggsField& theta,
                                 const BaseMetric& g);

/// F_theta(H) = Lambda sqrt(-1) theta(theta*_{h0}(H) . H^{-1}), evaluated from the
/// definition through the form calculus.
MatrixField f_theta(const MatrixField& H, const HermitianMetricField& h0, const HiggsField& theta,
                    const BaseMetric& g);
/// The same quantity from the four-term expansion
/// g^{i jbar}(H t*_j H^{-1} t_i H - t*_j t_i H - t_i H t*_j + t_i t*_j H) H^{-1}.
MatrixField f_theta_expanded(const MatrixField& H, const HermitianMetricField& h0, const HiggsField& theta,
                             const BaseMetric& g);

/// E-valued test data for the Bochner-Kodaira pairing: a section s (rows of a
/// matrix field are independent sections) and a 1-form t.
struct BochnerKodairaTerms {
  Complex dprime_term;   // (D' s, t)
  Complex torsion_term;  // (tau s, t)
  Complex rhs;           // (s, sqrt(-1) Lambda D'' t)
  double residual() const;
};
BochnerKodairaTerms bochner_kodaira_terms(const MatrixField& s, const FormMatrixField& t, const HiggsField& theta,
                                          const HermitianMetricField& h0, const BaseMetric& g);
/// Relative residual of the identity for seeded random smooth s and t.
double bochner_kodaira_residual(const HiggsField& theta, const HermitianMetricField& h0, const BaseMetric& g,
                                std::uint64_t seed = 1);

/// Full curvature of D^h split by bidegree.
struct HiggsCurvature {
  FormMatrixField r20;  // d^h theta
  FormMatrixField r11;  // R^h + B Id - theta.theta* - theta*.theta
  FormMatrixField r02;  // dbar theta*_h
};
/// Throws std::domain_error when theta is not integrable.
HiggsCurvature full_higgs_curvature(const HermitianMetricField& h, const HiggsBundle& bundle);

}  // namespace hymh
