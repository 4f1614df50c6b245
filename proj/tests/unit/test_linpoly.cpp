#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "imk/error.hpp"
#include "imk/linpoly.hpp"

using namespace imk;

namespace {

const Poly s{0, 1};

bool has_root(const std::vector<Complex>& roots, Complex r, double tol = 1e-9) {
  return std::any_of(roots.begin(), roots.end(), [&](Complex z) { return std::abs(z - r) < tol; });
}

// Independent oracle: c (sI - A)^{-1} b by a dense complex solve.
Complex direct_tf(const LinSys& l, Complex sv) {
  const int n = l.n();
  Eigen::MatrixXcd M = sv * Eigen::MatrixXcd::Identity(n, n) - to_eigen(l.A).cast<Complex>();
  Eigen::VectorXcd b(n);
  for (int i = 0; i < n; ++i) b(i) = l.b[i].get_d();
  const Eigen::VectorXcd xsol = M.partialPivLu().solve(b);
  Complex y = 0;
  for (int i = 0; i < n; ++i) y += l.c[i].get_d() * xsol(i);
  return y;
}

RationalFn integrator_fixture() {
  return RationalFn::make(s * Poly{3, 1}, Poly{1, 1} * Poly{2, 1} * Poly{4, 1});
}

}  // namespace

TEST(Poly, ArithmeticAndPrinting) {
  const Poly q = Poly{2, 3, 1};
  EXPECT_EQ(q.degree(), 2);
  EXPECT_EQ(to_string(q), "s^2 + 3*s + 2");
  EXPECT_EQ((Poly{1, 1} * Poly{2, 1}), q);
  EXPECT_EQ(q - q, Poly());
  EXPECT_EQ(Poly().degree(), -1);
  EXPECT_EQ(q.derivative(), (Poly{3, 2}));
  EXPECT_EQ(Poly::from_roots({-1, -2}), q);
  EXPECT_EQ(q.eval(Rational(1)), 6);
}

TEST(Poly, FromDoublesIsExact) {
  const Poly p = Poly::from_doubles({0.1});
  EXPECT_EQ(p.coeff(0).get_d(), 0.1);
  EXPECT_NE(p.coeff(0), Rational(1, 10));  // binary value, not the decimal
}

TEST(PolyDivmod, Examples) {
  const Poly q{2, 3, 1};
  auto [a, b] = poly_divmod(q, s);
  EXPECT_EQ(a, (Poly{3, 1}));
  EXPECT_EQ(b, Poly{2});
  auto [a1, b1] = poly_divmod(q, Poly{1});
  EXPECT_EQ(a1, q);
  EXPECT_TRUE(b1.is_zero());
  EXPECT_THROW(poly_divmod(q, Poly()), InvalidInput);
}

TEST(PolyGcd, Monic) {
  EXPECT_EQ(poly_gcd(Poly{2, 3, 1}, Poly{3, 4, 1}), (Poly{1, 1}));
  EXPECT_EQ(poly_gcd(2 * Poly{1, 1}, Poly{0, 0, 5}), Poly{1});
}

TEST(PolyRoots, Examples) {
  const auto r = poly_roots(Poly{2, 3, 1});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_TRUE(has_root(r, -1.0));
  EXPECT_TRUE(has_root(r, -2.0));
  const auto h = poly_roots(Poly{4, 0, 1});
  EXPECT_TRUE(has_root(h, Complex(0, 2)));
  EXPECT_TRUE(has_root(h, Complex(0, -2)));
  const auto z = poly_roots(Poly{0, 0, 1, 1});
  EXPECT_EQ(std::count(z.begin(), z.end(), Complex(0, 0)), 2);
}

TEST(Hurwitz, RouthArray) {
  EXPECT_TRUE(is_hurwitz(Poly{8, 14, 7, 1}));
  EXPECT_FALSE(is_hurwitz(Poly{4, 0, 1}));
  EXPECT_FALSE(is_hurwitz(Poly{-1, 1}));
  EXPECT_FALSE(is_hurwitz(Poly{1, 1, 1, 1, 1, 1}));
}

TEST(TransferFunction, Examples) {
  LinSys a;
  a.A = {{-1}};
  a.b = {1};
  a.c = {1};
  EXPECT_EQ(transfer_function(a), RationalFn::make(Poly{1}, Poly{1, 1}));
  LinSys d;
  d.A = {{0, 1}, {0, 0}};
  d.b = {0, 1};
  d.c = {1, 0};
  EXPECT_EQ(transfer_function(d), RationalFn::make(Poly{1}, Poly{0, 0, 1}));
}

TEST(TransferFunction, ControllerFormRoundTrip) {
  const RationalFn S = integrator_fixture();
  const LinSys l = controller_form(S);
  EXPECT_EQ(transfer_function(l), S);
  for (Complex z : {Complex(0.3, 1.0), Complex(-0.5, 2.0), Complex(2.0, 0.0)})
    EXPECT_LT(std::abs(S.eval(z) - direct_tf(l, z)), 1e-12);
}

TEST(TransferFunction, FaddeevLeVerrier) {
  const RatMatrix A = {{0, 1, 0}, {0, 0, 1}, {-8, -14, -7}};
  EXPECT_EQ(characteristic_polynomial(A), (Poly{8, 14, 7, 1}));
}

TEST(Feedback, IntegratorAppears) {
  const RationalFn S = RationalFn::make(s, Poly{2, 3, 1});
  const FeedbackDecomposition fd = feedback_decomposition(S);
  EXPECT_EQ(fd.a, (Poly{3, 1}));
  EXPECT_EQ(fd.fb, RationalFn::make(Poly{2}, s));
  EXPECT_FALSE(fd.zero_feedback);
  EXPECT_EQ(reassemble(fd), S);
}

TEST(Feedback, ZeroFeedbackFlagged) {
  const FeedbackDecomposition fd = feedback_decomposition(RationalFn::make(Poly{1}, Poly{1, 1}));
  EXPECT_EQ(fd.a, (Poly{1, 1}));
  EXPECT_TRUE(fd.zero_feedback);
}

TEST(Feedback, ZeroNumeratorRejected) {
  EXPECT_THROW(feedback_decomposition(RationalFn::make(Poly(), Poly{1, 1})), InvalidInput);
}

TEST(LinearAdaptation, Examples) {
  const RationalFn G = RationalFn::make(Poly{1}, s);
  const LinearAdaptation ok = check_linear_adaptation(RationalFn::make(s, Poly{2, 3, 1}), G);
  EXPECT_TRUE(ok.stable);
  EXPECT_EQ(ok.grade, Grade::Proven);
  EXPECT_TRUE(has_root(ok.poles, -1.0));
  EXPECT_TRUE(has_root(ok.poles, -2.0));

  const LinearAdaptation bad = check_linear_adaptation(RationalFn::make(Poly{1, 1}, Poly{2, 3, 1}), G);
  EXPECT_FALSE(bad.stable);
  EXPECT_EQ(bad.grade, Grade::Failed);

  const RationalFn Sh = RationalFn::make(Poly{4, 0, 1}, Poly{1, 1} * Poly{2, 1} * Poly{3, 1});
  const LinearAdaptation h = check_linear_adaptation(Sh, RationalFn::make(Poly{1}, Poly{4, 0, 1}));
  EXPECT_TRUE(h.stable);
  EXPECT_DOUBLE_EQ(h.pairing_tolerance, kPairingTolerance);
}

TEST(LinearIM, IntegratorFixture) {
  const LinearIMResult im = extract_internal_model_linear(integrator_fixture(), s);
  EXPECT_EQ(im.p0, (Poly{3, 1}));
  EXPECT_EQ(im.pi * im.p0, integrator_fixture().num);
  ASSERT_EQ(im.companion.size(), 1u);
  EXPECT_EQ(im.companion[0][0], 0);
}

TEST(LinearIM, Errors) {
  EXPECT_THROW(extract_internal_model_linear(RationalFn::make(Poly{1}, Poly{1, 1}), s), NoInternalModel);
  EXPECT_THROW(extract_internal_model_linear(integrator_fixture(), Poly{1, 1}), InvalidInput);
  EXPECT_THROW(extract_internal_model_linear(integrator_fixture(), 2 * s), InvalidInput);
}

TEST(Embedding, Integrator) {
  Eigen::MatrixXd one(1, 1), zero(1, 1);
  one << 1;
  zero << 0;
  Eigen::RowVectorXd e(1);
  e << 1;
  const EmbeddingResult r = solve_embedding(zero, e, zero, e);
  EXPECT_NEAR(r.T(0, 0), 1.0, 1e-12);
  EXPECT_LT(r.residual_FT, 1e-12);
  EXPECT_LT(r.residual_phi, 1e-12);
}

TEST(Embedding, HarmonicBlock) {
  Eigen::MatrixXd Q(2, 2);
  Q << 0, 1, -4, 0;
  Eigen::RowVectorXd th(2);
  th << 1, 0;
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(3, 3);
  F.topLeftCorner(2, 2) = Q;
  F(2, 2) = -1;
  Eigen::RowVectorXd ph(3);
  ph << 1, 0, 1;
  const EmbeddingResult r = solve_embedding(Q, th, F, ph);
  EXPECT_LT((F * r.T - r.T * Q).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((ph * r.T - th).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((r.block_form.topLeftCorner(2, 2) - Q).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(r.block_form.bottomLeftCorner(1, 2).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(r.orientation, "upper");
}

TEST(Embedding, DecayingModeRejected) {
  Eigen::MatrixXd Q(1, 1), F(1, 1);
  Q << 0;
  F << -1;
  Eigen::RowVectorXd e(1);
  e << 1;
  EXPECT_THROW(solve_embedding(Q, e, F, e), NoEmbedding);
}

TEST(MarkovRelativeDegree, Index) {
  LinSys l;
  l.A = {{0, 1, 0}, {0, 0, 1}, {-1, -3, -3}};
  l.b = {0, 0, 1};
  l.c = {1, 0, 0};
  EXPECT_EQ(markov_relative_degree(l), 3);
  l.c = {0, 0, 0};
  EXPECT_EQ(markov_relative_degree(l), 0);
}

TEST(LinSys, Validate) {
  LinSys l;
  l.A = {{0, 1}};
  l.b = {0, 1};
  l.c = {1, 0};
  EXPECT_THROW(l.validate(), InvalidInput);
}
