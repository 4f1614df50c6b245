#include "imk/error.hpp"
#include "imk/linpoly.hpp"

namespace imk {

Eigen::MatrixXd to_eigen(const RatMatrix& m) {
  const int r = static_cast<int>(m.size());
  const int c = r ? static_cast<int>(m[0].size()) : 0;
  Eigen::MatrixXd out(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out(i, j) = m[i][j].get_d();
  return out;
}

Eigen::RowVectorXd to_eigen_row(const RatVector& v) {
  Eigen::RowVectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i].get_d();
  return out;
}

void LinSys::validate() const {
  const std::size_t n = A.size();
  if (n == 0) throw InvalidInput("linear system needs n >= 1");
  for (const auto& row : A)
    if (row.size() != n) throw InvalidInput("A must be square");
  if (b.size() != n) throw InvalidInput("b must have " + std::to_string(n) + " entries");
  if (c.size() != n) throw InvalidInput("c must have " + std::to_string(n) + " entries");
}

AffineSystem to_affine_system(const LinSys& sys) {
  sys.validate();
  const int n = sys.n();
  VectorField f = VectorField::zero(n), g = VectorField::zero(n);
  Expr h;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (sys.A[i][j] != 0) f[i] += Expr(sys.A[i][j]) * Expr::variable(j + 1);
    g[i] = Expr(sys.b[i]);
    if (sys.c[i] != 0) h += Expr(sys.c[i]) * Expr::variable(i + 1);
  }
  return make_affine_system(n, {}, {}, std::move(f), std::move(g), std::move(h));
}

LinSys controller_form(const RationalFn& s) {
  const Poly den = s.den.monic();
  const Rational scale = 1 / s.den.lead();
  const int n = den.degree();
  if (n < 1) throw InvalidInput("controller form needs deg den >= 1");
  if (s.num.degree() >= n) throw InvalidInput("controller form needs a strictly proper S");
  LinSys out;
  out.A.assign(n, RatVector(n));
  for (int i = 0; i + 1 < n; ++i) out.A[i][i + 1] = 1;
  for (int j = 0; j < n; ++j) out.A[n - 1][j] = -den.coeff(j);
  out.b.assign(n, 0);
  out.b[n - 1] = 1;
  out.c.assign(n, 0);
  for (int j = 0; j < n; ++j) out.c[j] = s.num.coeff(j) * scale;
  return out;
}

namespace {

RatMatrix matmul(const RatMatrix& a, const RatMatrix& b) {
  const std::size_t n = a.size(), k = b.size(), m = b[0].size();
  RatMatrix c(n, RatVector(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
    }
  return c;
}

Rational trace(const RatMatrix& a) {
  Rational t = 0;
  for (std::size_t i = 0; i < a.size(); ++i) t += a[i][i];
  return t;
}

// Returns the characteristic coefficients and M_1..M_n with
// adj(sI - A) = sum_k M_k s^{n-k}.
std::pair<std::vector<Rational>, std::vector<RatMatrix>> leverrier(const RatMatrix& A) {
  const int n = static_cast<int>(A.size());
  std::vector<Rational> a(n + 1);
  a[n] = 1;
  std::vector<RatMatrix> ms;
  RatMatrix m(n, RatVector(n));
  for (int k = 1; k <= n; ++k) {
    m = matmul(A, m);
    for (int i = 0; i < n; ++i) m[i][i] += a[n - k + 1];
    ms.push_back(m);
    a[n - k] = -trace(matmul(A, m)) / k;
  }
  return {a, ms};
}

}  // namespace

Poly characteristic_polynomial(const RatMatrix& A) { return Poly(leverrier(A).first); }

RationalFn transfer_function(const LinSys& sys) {
  sys.validate();
  const int n = sys.n();
  auto [a, ms] = leverrier(sys.A);
  std::vector<Rational> p(n);
  for (int k = 1; k <= n; ++k) {
    Rational v = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += sys.c[i] * ms[k - 1][i][j] * sys.b[j];
    p[n - k] = v;
  }
  return RationalFn::make(Poly(std::move(p)), Poly(std::move(a)));
}

int markov_relative_degree(const LinSys& sys) {
  sys.validate();
  const int n = sys.n();
  RatVector v = sys.b;  // A^k b
  for (int k = 0; k < n; ++k) {
    Rational m = 0;
    for (int i = 0; i < n; ++i) m += sys.c[i] * v[i];
    if (m != 0) return k + 1;
    RatVector next(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) next[i] += sys.A[i][j] * v[j];
    v = std::move(next);
  }
  return 0;
}

FeedbackDecomposition feedback_decomposition(const RationalFn& s) {
  if (s.num.is_zero())
    throw InvalidInput("feedback decomposition needs a nonzero numerator p (S = 0)");
  if (s.num.degree() >= s.den.degree())
    throw InvalidInput("feedback decomposition needs deg p < deg q");
  FeedbackDecomposition d;
  d.p = s.num;
  auto [a, b] = poly_divmod(s.den, s.num);
  d.a = std::move(a);
  d.b = std::move(b);
  d.fb = RationalFn::make(d.b, d.p);
  d.zero_feedback = d.b.is_zero();
  return d;
}

RationalFn reassemble(const FeedbackDecomposition& d) {
  // p / (a p + b)
  return RationalFn::make(d.p, d.a * d.p + d.b);
}

}  // namespace imk
