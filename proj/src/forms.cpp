#include "hymh/forms.hpp"

#include <algorithm>

namespace hymh {

FormMatrixField::FormMatrixField(GridSpec grid, int rank, int degree)
    : grid_(std::move(grid)), rank_(rank), degree_(degree) {
  if (degree < 0 || degree > 2) throw std::invalid_argument("FormMatrixField: degree must be 0, 1 or 2");
  comp_.resize(static_cast<std::size_t>(form_basis_count(grid_.n(), degree)));
}

MatrixField FormMatrixField::get(int k) const {
  const MatrixField& c = comp_.at(k);
  return c.empty() ? MatrixField(grid_, rank_) : c;
}

void FormMatrixField::set(int k, MatrixField m) {
  if (!m.empty()) {
    require_same_grid(grid_, m.grid(), "FormMatrixField::set");
    if (m.rank() != rank_) throw std::invalid_argument("FormMatrixField::set: rank mismatch");
  }
  comp_.at(k) = std::move(m);
}

void FormMatrixField::add(int k, const MatrixField& m, Complex sign) {
  if (m.empty()) return;
  MatrixField& c = comp_.at(k);
  if (c.empty()) {
    set(k, sign == Complex(1.0) ? m : m * sign);
  } else {
    c.check_shape(m, "FormMatrixField::add");
    c.data() += sign * m.data();
  }
}

void FormMatrixField::add_pair(int a, int b, const MatrixField& m, Complex sign) {
  if (degree_ != 2) throw std::logic_error("add_pair on a form that is not a 2-form");
  if (a == b) return;
  if (a < b)
    add(pair_index(grid_.n(), a, b), m, sign);
  else
    add(pair_index(grid_.n(), b, a), m, -sign);
}

MatrixField FormMatrixField::pair(int a, int b) const {
  if (a == b) return MatrixField(grid_, rank_);
  if (a < b) return get(pair_index(grid_.n(), a, b));
  return -get(pair_index(grid_.n(), b, a));
}

FormMatrixField& FormMatrixField::operator+=(const FormMatrixField& o) {
  if (o.degree_ != degree_) throw std::invalid_argument("form +=: degree mismatch");
  for (int k = 0; k < count(); ++k) add(k, o.comp_[k]);
  return *this;
}

FormMatrixField& FormMatrixField::operator-=(const FormMatrixField& o) {
  if (o.degree_ != degree_) throw std::invalid_argument("form -=: degree mismatch");
  for (int k = 0; k < count(); ++k) add(k, o.comp_[k], -1.0);
  return *this;
}

FormMatrixField& FormMatrixField::operator*=(Complex c) {
  for (auto& m : comp_)
    if (!m.empty()) m *= c;
  return *this;
}

int form_basis_count(int n, int degree) {
  const int d = 2 * n;
  switch (degree) {
    case 0: return 1;
    case 1: return d;
    case 2: return d * (d - 1) / 2;
    default: throw std::invalid_argument("form degree out of range");
  }
}

int pair_index(int n, int a, int b) {
  const int d = 2 * n;
  if (!(0 <= a && a < b && b < d)) throw std::out_of_range("pair_index");
  // rows a = 0..: (d-1) + (d-2) + ... entries before row a
  return a * (2 * d - a - 1) / 2 + (b - a - 1);
}

FormMatrixField as_form(const MatrixField& m) {
  FormMatrixField f(m.grid(), m.rank(), 0);
  f.set(0, m);
  return f;
}

namespace {

FormMatrixField one_form(const std::vector<MatrixField>& c, int offset) {
  if (c.empty()) throw std::invalid_argument("one_form: no components");
  const MatrixField* ref = nullptr;
  for (const auto& m : c)
    if (!m.empty()) ref = &m;
  if (!ref) throw std::invalid_argument("one_form: all components empty");
  FormMatrixField f(ref->grid(), ref->rank(), 1);
  if (static_cast<int>(c.size()) != ref->grid().n()) throw std::invalid_argument("one_form: need n components");
  for (std::size_t i = 0; i < c.size(); ++i) f.set(offset + static_cast<int>(i), c[i]);
  return f;
}

}  // namespace

FormMatrixField holomorphic_one_form(const std::vector<MatrixField>& c) { return one_form(c, 0); }

FormMatrixField antiholomorphic_one_form(const std::vector<MatrixField>& c) {
  return one_form(c, static_cast<int>(c.size()));
}

FormMatrixField wedge(const FormMatrixField& P, const FormMatrixField& Q) {
  require_same_grid(P.grid(), Q.grid(), "wedge");
  if (P.rank() != Q.rank()) throw std::invalid_argument("wedge: rank mismatch");
  const int deg = P.degree() + Q.degree();
  if (deg > 2) throw std::invalid_argument("wedge: total degree above 2");
  FormMatrixField out(P.grid(), P.rank(), deg);
  if (P.degree() == 0) {
    if (!P.has(0)) return out;
    for (int k = 0; k < Q.count(); ++k)
      if (Q.has(k)) out.set(k, endo_product(P.ref(0), Q.ref(k)));
    return out;
  }
  if (Q.degree() == 0) {
    if (!Q.has(0)) return out;
    for (int k = 0; k < P.count(); ++k)
      if (P.has(k)) out.set(k, endo_product(P.ref(k), Q.ref(0)));
    return out;
  }
  for (int a = 0; a < P.count(); ++a) {
    if (!P.has(a)) continue;
    for (int b = 0; b < Q.count(); ++b) {
      if (a == b || !Q.has(b)) continue;
      out.add_pair(a, b, endo_product(P.ref(a), Q.ref(b)));
    }
  }
  return out;
}

FormMatrixField left_multiply(const MatrixField& A, const FormMatrixField& P) { return wedge(as_form(A), P); }

FormMatrixField right_multiply(const FormMatrixField& P, const MatrixField& A) { return wedge(P, as_form(A)); }

MatrixField derivative(const MatrixField& A, int k) {
  const int n = A.grid().n();
  if (k < 0 || k >= 2 * n) throw std::out_of_range("derivative: direction out of range");
  return std::move(derivatives(A, {k}).front());
}

std::vector<MatrixField> derivatives(const MatrixField& A, const std::vector<int>& dirs) {
  const GridSpec& grid = A.grid();
  const int n = grid.n(), r = A.rank();
  std::vector<Eigen::VectorXcd> syms;
  std::vector<MatrixField> out;
  for (int k : dirs) {
    if (k < 0 || k >= 2 * n) throw std::out_of_range("derivative: direction out of range");
    syms.push_back(complex_derivative_symbol(grid, k < n ? k : k - n, k < n));
    out.emplace_back(grid, r);
  }
  const std::size_t np = A.points();
  const int rr = r * r;
  MatrixField spec = A;
  fft_forward(grid, std::span<Complex>(spec.data().data(), np * rr), rr);
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    Complex* dst = out[d].data().data();
    const Complex* src = spec.data().data();
    for (std::size_t p = 0; p < np; ++p) {
      const Complex s = syms[d][static_cast<Eigen::Index>(p)];
      for (int c = 0; c < rr; ++c) dst[p * rr + c] = s * src[p * rr + c];
    }
    fft_inverse(grid, std::span<Complex>(dst, np * rr), rr);
  }
  return out;
}

std::vector<MatrixField> gradient(const MatrixField& A) {
  std::vector<int> dirs(2 * A.grid().n());
  for (int k = 0; k < static_cast<int>(dirs.size()); ++k) dirs[k] = k;
  return derivatives(A, dirs);
}

namespace {

// Applies sum_k e_k ^ d_k P over directions k in [k0, k1).
FormMatrixField exterior(const FormMatrixField& P, int k0, int k1) {
  if (P.degree() > 1) throw std::invalid_argument("exterior derivative: degree must be 0 or 1");
  FormMatrixField out(P.grid(), P.rank(), P.degree() + 1);
  std::vector<int> dirs;
  for (int k = k0; k < k1; ++k) dirs.push_back(k);
  if (P.degree() == 0) {
    if (!P.has(0)) return out;
    std::vector<MatrixField> d = derivatives(P.ref(0), dirs);
    for (std::size_t m = 0; m < dirs.size(); ++m) out.set(dirs[m], std::move(d[m]));
    return out;
  }
  for (int c = 0; c < P.count(); ++c) {
    if (!P.has(c)) continue;
    std::vector<MatrixField> d = derivatives(P.ref(c), dirs);
    for (std::size_t m = 0; m < dirs.size(); ++m)
      if (dirs[m] != c) out.add_pair(dirs[m], c, d[m]);
  }
  return out;
}

}  // namespace

FormMatrixField del(const FormMatrixField& P) { return exterior(P, 0, P.grid().n()); }

FormMatrixField delbar(const FormMatrixField& P) { return exterior(P, P.grid().n(), 2 * P.grid().n()); }

FormMatrixField graded_action(const FormMatrixField& B, const FormMatrixField& P) {
  if (B.degree() != 1) throw std::invalid_argument("graded_action: B must be a 1-form");
  FormMatrixField out = wedge(P, B);
  if (P.degree() % 2 == 1) out *= -1.0;
  out -= wedge(B, P);
  return out;
}

double sup_frobenius(const FormMatrixField& P) {
  double best = 0.0;
  for (int k = 0; k < P.count(); ++k)
    if (P.has(k)) best = std::max(best, sup_frobenius(P.ref(k)));
  return best;
}

}  // namespace hymh
