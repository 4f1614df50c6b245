// Randomized property suites, fixed seeds, at least 50 cases each.
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "imk/exo.hpp"
#include "imk/linpoly.hpp"
#include "imk/sim.hpp"
#include "imk/vfield.hpp"

using namespace imk;

namespace {

constexpr int kCases = 60;

int rint(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Expr random_scalar(std::mt19937_64& rng, int n) {
  Expr e(rint(rng, -3, 3));
  for (int t = 0; t < 3; ++t) {
    Expr term(rint(rng, -4, 4));
    for (int i = 1; i <= n; ++i) term *= pow(Expr::variable(i), rint(rng, 0, 2));
    e += term;
  }
  switch (rint(rng, 0, 3)) {
    case 0: e += sin(Expr::variable(1)); break;
    case 1: e += exp(Expr::variable(n) * Expr(rint(rng, -1, 1))); break;
    default: break;
  }
  return e;
}

VectorField random_field(std::mt19937_64& rng, int n) {
  std::vector<Expr> c;
  for (int i = 0; i < n; ++i) c.push_back(random_scalar(rng, n));
  return VectorField(c);
}

RatMatrix matmul(const RatMatrix& a, const RatMatrix& b) {
  RatMatrix c(a.size(), RatVector(b[0].size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

RatMatrix identity(int n) {
  RatMatrix m(n, RatVector(n));
  for (int i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

// Unimodular P with its exact inverse, built from elementary row operations.
std::pair<RatMatrix, RatMatrix> unimodular(std::mt19937_64& rng, int n) {
  RatMatrix P = identity(n), Pi = identity(n);
  if (n == 1) return {P, Pi};
  for (int step = 0; step < 4; ++step) {
    const int i = rint(rng, 0, n - 1);
    int j = rint(rng, 0, n - 2);
    if (j >= i) ++j;
    const Rational c = rint(rng, -2, 2);
    for (int k = 0; k < n; ++k) P[i][k] += c * P[j][k];    // E P
    for (int k = 0; k < n; ++k) Pi[k][j] -= c * Pi[k][i];  // Pi E^{-1}
  }
  return {P, Pi};
}

RatMatrix block_diag(const RatMatrix& a, const RatMatrix& b) {
  const std::size_t n = a.size(), m = b.size();
  RatMatrix out(n + m, RatVector(n + m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = a[i][j];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[n + i][n + j] = b[i][j];
  return out;
}

Poly random_poly(std::mt19937_64& rng, int degree, bool monic = false) {
  std::vector<Rational> c;
  for (int i = 0; i < degree; ++i) c.push_back(Rational(rint(rng, -9, 9), rint(rng, 1, 4)));
  c.push_back(monic ? Rational(1) : Rational(rint(rng, 1, 5) * (rint(rng, 0, 1) ? 1 : -1)));
  return Poly(c);
}

}  // namespace

TEST(Property, BracketAntisymmetryAndLeibniz) {
  std::mt19937_64 rng(20261018);
  for (int k = 0; k < kCases; ++k) {
    const int n = rint(rng, 1, 3);
    const VectorField X = random_field(rng, n), Y = random_field(rng, n);
    const Expr h = random_scalar(rng, n);
    const VectorField xy = lie_bracket(X, Y);
    const VectorField yx = lie_bracket(Y, X);
    for (int i = 0; i < n; ++i)
      ASSERT_EQ(is_zero(xy[i] + yx[i], k).kind, ZeroStatus::Kind::ProvenZero) << k;
    const Expr leib = lie_derivative(h, xy) -
                      (lie_derivative(lie_derivative(h, Y), X) - lie_derivative(lie_derivative(h, X), Y));
    ASSERT_EQ(is_zero(leib, k).kind, ZeroStatus::Kind::ProvenZero) << k;
  }
}

TEST(Property, LinearRelativeDegreeIsFirstMarkovIndex) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < kCases; ++k) {
    const int n = rint(rng, 1, 4);
    LinSys l;
    l.A.assign(n, RatVector(n));
    for (auto& row : l.A)
      for (auto& v : row) v = rint(rng, -2, 2);
    l.b.assign(n, 0);
    l.c.assign(n, 0);
    for (auto& v : l.b) v = rint(rng, 0, 3) == 0 ? rint(rng, -2, 2) : 0;
    for (auto& v : l.c) v = rint(rng, -2, 2);
    l.b[rint(rng, 0, n - 1)] = 1;
    // Oracle: first i with c A^i b != 0.
    int first = -1;
    RatVector v = l.b;
    for (int i = 0; i < n && first < 0; ++i) {
      Rational m = 0;
      for (int j = 0; j < n; ++j) m += l.c[j] * v[j];
      if (m != 0) first = i;
      RatVector next(n);
      for (int r = 0; r < n; ++r)
        for (int j = 0; j < n; ++j) next[r] += l.A[r][j] * v[j];
      v = next;
    }
    const RelDegree rd = relative_degree(to_affine_system(l), k);
    if (first < 0) {
      EXPECT_NE(rd.status, RelDegree::Status::Uniform) << k;
      EXPECT_EQ(markov_relative_degree(l), 0);
    } else {
      ASSERT_EQ(rd.status, RelDegree::Status::Uniform) << k;
      EXPECT_EQ(rd.r, first + 1) << k;
      EXPECT_EQ(markov_relative_degree(l), first + 1) << k;
    }
  }
}

TEST(Property, DivisionReconstructsExactly) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < kCases; ++k) {
    const Poly q = random_poly(rng, rint(rng, 0, 6));
    const Poly p = random_poly(rng, rint(rng, 0, 4));
    const auto [a, b] = poly_divmod(q, p);
    EXPECT_EQ(a * p + b, q) << k;
    EXPECT_LT(b.degree(), p.degree()) << k;
  }
}

TEST(Property, TransferFunctionPointwise) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> re(-2.0, 2.0);
  for (int k = 0; k < kCases; ++k) {
    const int n = rint(rng, 1, 5);
    LinSys l;
    l.A.assign(n, RatVector(n));
    for (auto& row : l.A)
      for (auto& v : row) v = Rational(rint(rng, -5, 5), rint(rng, 1, 3));
    l.b.assign(n, 0);
    l.c.assign(n, 0);
    for (auto& v : l.b) v = rint(rng, -3, 3);
    for (auto& v : l.c) v = rint(rng, -3, 3);
    const RationalFn S = transfer_function(l);
    const Eigen::MatrixXd A = to_eigen(l.A);
    for (int t = 0; t < 3; ++t) {
      const Complex s(re(rng), 3.0 + re(rng));
      Eigen::MatrixXcd M = s * Eigen::MatrixXcd::Identity(n, n) - A.cast<Complex>();
      Eigen::VectorXcd b(n);
      for (int i = 0; i < n; ++i) b(i) = l.b[i].get_d();
      const Eigen::VectorXcd xs = M.fullPivLu().solve(b);
      Complex y = 0;
      for (int i = 0; i < n; ++i) y += l.c[i].get_d() * xs(i);
      const Complex got = S.eval(s);
      EXPECT_LE(std::abs(got - y), 1e-9 * std::max(1.0, std::abs(y))) << k;
    }
  }
}

TEST(Property, Rk4LocalErrorOrder) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < kCases; ++k) {
    const int n = rint(rng, 1, 3);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = u(rng);
    Eigen::VectorXd x0(n);
    for (int i = 0; i < n; ++i) x0(i) = u(rng);
    const OdeRhs rhs = [&A, n](double, std::span<const double> x, std::span<double> dx) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += A(i, j) * x[j];
        dx[i] = acc;
      }
    };
    // Power series oracle for exp(A h) x0.
    auto exact = [&](double h) {
      Eigen::VectorXd term = x0, sum = x0;
      for (int m = 1; m < 30; ++m) {
        term = A * term * (h / m);
        sum += term;
      }
      return sum;
    };
    auto one_step = [&](double h) {
      IntegratorOptions o;
      o.method = IntegratorOptions::Method::Rk4;
      o.fixed_step = h;
      const Solution sol = integrate(rhs, 0.0, std::vector<double>(x0.data(), x0.data() + n), h, o);
      const auto x = sol.at(h);
      return (Eigen::Map<const Eigen::VectorXd>(x.data(), n) - exact(h)).norm();
    };
    const double h = 0.2;
    const double e1 = one_step(h), e2 = one_step(h / 2);
    if (e1 < 1e-14) continue;  // degenerate (e.g. x0 in a trivial subspace)
    EXPECT_GE(e1 / e2, 16.0) << k << " " << e1 << " " << e2;
  }
}

TEST(Property, PoissonSpectralClassification) {
  std::mt19937_64 rng(19);
  const auto harmonic = [](int w) { return RatMatrix{{0, 1}, {Rational(-w * w), 0}}; };
  int counts[4] = {0, 0, 0, 0};
  for (int k = 0; k < kCases; ++k) {
    const int cls = k % 4;
    RatMatrix Q;
    PoissonVerdict::Status want;
    switch (cls) {
      case 0: {  // w' = 0 in any dimension
        const int m = rint(rng, 1, 3);
        Q = RatMatrix(m, RatVector(m));
        want = PoissonVerdict::Status::Proven;
        break;
      }
      case 1:
        Q = harmonic(rint(rng, 1, 5));
        want = PoissonVerdict::Status::Proven;
        break;
      case 2:  // w' = w, optionally beside an oscillator
        Q = rint(rng, 0, 1) ? RatMatrix{{1}} : block_diag({{1}}, harmonic(rint(rng, 1, 3)));
        want = PoissonVerdict::Status::ProvenNot;
        break;
      default:  // companion of s^2
        Q = {{0, 1}, {0, 0}};
        want = PoissonVerdict::Status::ProvenNot;
        break;
    }
    const int m = static_cast<int>(Q.size());
    const auto [P, Pi] = unimodular(rng, m);
    const RatMatrix Qs = matmul(matmul(P, Q), Pi);
    RatVector theta(m);
    theta[0] = 1;
    const PoissonVerdict v = check_poisson_stable(Exosystem::linear(Qs, theta), 20, 1e-2, k);
    EXPECT_EQ(v.status, want) << "case " << k << " class " << cls;
    ++counts[cls];
  }
  for (int c : counts) EXPECT_GE(c, 15);
}
