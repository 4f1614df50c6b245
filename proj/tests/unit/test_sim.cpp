#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "imk/error.hpp"
#include "imk/exo.hpp"
#include "imk/linpoly.hpp"
#include "imk/sim.hpp"

using namespace imk;

namespace {

AffineSystem ecoli_unit() {
  const std::vector<std::string> names{"a1", "a2", "a3", "a4", "a5", "a6"};
  std::map<std::string, Rational> values;
  for (const auto& n : names) values[n] = 1;
  return parse_affine_system(2, names, values, {"a1 - a2*x1 + a3*x2", "a5 - a6*x2"},
                             {"-a4*x1", "a4*x1"}, "(a1 + a5) - (a2*x1 + (a6 - a3)*x2)",
                             {{1e-6, 10.0}, {1e-6, 10.0}});
}

AffineSystem harmonic_plant() {
  const RationalFn S = RationalFn::make(Poly{4, 0, 1}, Poly{1, 1} * Poly{2, 1} * Poly{3, 1});
  return to_affine_system(controller_form(S));
}

// Steady state of the linear plant under u = theta w, w' = Q w, solved
// independently from the Sylvester equation A X - X Q = -b theta,
// x = X w.
std::vector<double> steady_state(const AffineSystem& sys, const Exosystem& exo,
                                  const std::vector<double>& w) {
  const int n = sys.n, m = exo.m;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const auto af = as_affine(sys.f[i], n);
    for (int j = 0; j < n; ++j) A(i, j) = af->coeffs[j].as_rational()->get_d();
    b(i) = sys.g[i].as_rational()->get_d();
  }
  const Eigen::MatrixXd Q = exo.Q_double();
  const Eigen::RowVectorXd th = exo.theta_double();
  // vec(A X - X Q) = (I (x) A - Q^T (x) I) vec(X)
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * m, n * m);
  for (int c = 0; c < m; ++c) {
    K.block(c * n, c * n, n, n) += A;
    for (int r = 0; r < m; ++r) K.block(c * n, r * n, n, n) -= Q(r, c) * Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::VectorXd rhs(n * m);
  for (int c = 0; c < m; ++c) rhs.segment(c * n, n) = -b * th(c);
  const Eigen::VectorXd X = K.fullPivLu().solve(rhs);
  std::vector<double> x(n, 0.0);
  for (int c = 0; c < m; ++c)
    for (int i = 0; i < n; ++i) x[i] += X(c * n + i) * w[c];
  return x;
}

}  // namespace

TEST(Integrate, ExponentialDecay) {
  const OdeRhs rhs = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
  const Solution sol = integrate(rhs, 0.0, {1.0}, 1.0);
  EXPECT_NEAR(sol.at(1.0)[0], std::exp(-1.0), 1e-8);
  EXPECT_NEAR(sol.at(0.37)[0], std::exp(-0.37), 1e-8);  // dense output
  EXPECT_EQ(sol.status(), Solution::Status::Completed);
}

TEST(Integrate, HarmonicEnergy) {
  const OdeRhs rhs = [](double, std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = -x[0];
  };
  const double T = 20 * std::numbers::pi;
  const Solution sol = integrate(rhs, 0.0, {1.0, 0.0}, T);
  const auto x = sol.at(T);
  EXPECT_LT(std::abs(x[0] * x[0] + x[1] * x[1] - 1.0), 1e-6);
}

TEST(Integrate, Rk4) {
  const OdeRhs rhs = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
  IntegratorOptions o;
  o.method = IntegratorOptions::Method::Rk4;
  o.fixed_step = 1e-2;
  const Solution sol = integrate(rhs, 0.0, {1.0}, 1.0, o);
  EXPECT_NEAR(sol.at(1.0)[0], std::exp(-1.0), 1e-9);
}

TEST(Integrate, BlowUpIsDivergence) {
  const OdeRhs rhs = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; };
  EXPECT_THROW(integrate(rhs, 0.0, {1.0}, 2.0), DivergenceError);
  IntegratorOptions o;
  o.bound = 1e3;
  const Solution sol = integrate(rhs, 0.0, {1.0}, 2.0, o);
  EXPECT_EQ(sol.status(), Solution::Status::BoundExceeded);
  EXPECT_LT(sol.t_end(), 1.0);
}

TEST(Integrate, EcoliEquilibrium) {
  const Cascade c(ecoli_unit(), constant_exosystem());
  const Solution sol = integrate(c.ode(), 0.0, {1.0, 1.0, 1.0}, 50.0);
  const auto s = sol.at(50.0);
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_NEAR(s[1], 2.0, 1e-7);
  EXPECT_NEAR(s[2], 3.0, 1e-7);
}

TEST(Trace, CsvLayout) {
  const Cascade c(ecoli_unit(), constant_exosystem());
  const Trace tr = simulate(c, {1.0, 1.0}, {1.0}, 1.0, 10);
  const std::string csv = tr.csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2,w1,u,y");
  EXPECT_EQ(tr.t.size(), 11u);
  EXPECT_DOUBLE_EQ(tr.y.front(), 1.0);  // h(1,1) = 2 - 1
}

TEST(Adaptation, EcoliPasses) {
  const Cascade c(ecoli_unit(), constant_exosystem());
  const AdaptationReport r = check_adaptation(c, trial_product({{1.0, 1.0}}, {{0.5}, {1.0}, {2.0}}));
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.max_y_final, 1e-6);
  EXPECT_EQ(r.grade, Grade::Sampled);
}

TEST(Adaptation, NoIntegralActionFails) {
  const AffineSystem s = parse_affine_system(1, {}, {}, {"-x1"}, {"1"}, "x1");
  const Cascade c(s, constant_exosystem());
  const AdaptationReport r = check_adaptation(c, {{{0.0}, {1.0}}});
  EXPECT_FALSE(r.pass);
  EXPECT_TRUE(r.trials[0].bounded);
  EXPECT_NEAR(r.trials[0].max_y_final, 1.0, 1e-6);
  EXPECT_EQ(r.grade, Grade::Failed);
}

TEST(Adaptation, UnboundedIsDistinct) {
  const AffineSystem s = parse_affine_system(1, {}, {}, {"x1"}, {"1"}, "x1");
  const Cascade c(s, constant_exosystem());
  const AdaptationReport r = check_adaptation(c, {{{0.0}, {1.0}}});
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.trials[0].bounded);
}

TEST(Adaptation, LinearFixturePasses) {
  const RationalFn S = RationalFn::make(Poly{0, 1} * Poly{3, 1}, Poly{1, 1} * Poly{2, 1} * Poly{4, 1});
  const Cascade c(to_affine_system(controller_form(S)), constant_exosystem());
  EXPECT_TRUE(check_adaptation(c, {{{0.5, 0.0, -1.0}, {2.0}}}).pass);
}

TEST(Omega, EcoliSingleCluster) {
  const Cascade c(ecoli_unit(), constant_exosystem());
  const OmegaSample om = omega_limit_sample(c, {1.0, 1.0}, {1.0});
  const auto cand = om.candidates();
  ASSERT_FALSE(cand.empty());
  EXPECT_NEAR(cand[0].w[0], 1.0, 1e-12);
  EXPECT_NEAR(cand[0].x[0], 2.0, 1e-3);
  EXPECT_NEAR(cand[0].x[1], 3.0, 1e-3);
}

TEST(Omega, AlreadyAtEquilibrium) {
  const AffineSystem s = parse_affine_system(1, {}, {}, {"-x1"}, {"1"}, "x1");
  const Cascade c(s, constant_exosystem());
  const OmegaSample om = omega_limit_sample(c, {0.0}, {0.0});
  ASSERT_FALSE(om.candidates().empty());
  EXPECT_NEAR(om.candidates()[0].x[0], 0.0, 1e-12);
}

TEST(Omega, HarmonicClosedOrbit) {
  const AffineSystem s = harmonic_plant();
  const Exosystem exo = harmonic_exosystem(2);
  const Cascade c(s, exo);
  const OmegaSample om = omega_limit_sample(c, {0.0, 0.0, 0.0}, {1.0, 0.0});
  const auto cand = om.candidates();
  ASSERT_FALSE(cand.empty());
  for (const auto& p : cand) {
    EXPECT_LT(std::abs(c.system().output(p.x)), 1e-6);
    const auto xs = steady_state(s, exo, p.w);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(p.x[i], xs[i], 1e-5);
  }
}

TEST(OutputZeroing, Examples) {
  const Cascade c(ecoli_unit(), constant_exosystem());
  OmegaPoint eq{{1.0}, {2.0, 3.0}, 1, 0.0};
  const ZeroingVerdict ok = verify_output_zeroing(c, {eq}, 1e-6, 20);
  EXPECT_TRUE(ok.pass);
  EXPECT_EQ(ok.grade, Grade::Sampled);
  EXPECT_NEAR(ok.points[0].h_value, 0.0, 1e-15);

  OmegaPoint bumped{{1.0}, {2.1, 3.0}, 1, 0.0};
  const ZeroingVerdict bad = verify_output_zeroing(c, {bumped}, 1e-6, 20);
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.points[0].h_value, -0.1, 1e-12);

  const AffineSystem lin = harmonic_plant();
  const Cascade cl(lin, harmonic_exosystem(2));
  EXPECT_TRUE(verify_output_zeroing(cl, {OmegaPoint{{0.0, 0.0}, {0.0, 0.0, 0.0}, 1, 0.0}}, 1e-9, 5).pass);
}

TEST(Reproduction, EcoliPhi) {
  // z2 = B, f2(0, B) = 0, phi(B) = (B - 3)/2.
  const VectorField f2({Expr(0)});
  const Expr phi = (Expr::variable(1) - Expr(3)) / Expr(2);
  for (double u : {0.5, 1.0, 2.0}) {
    const ReproductionVerdict v =
        verify_im_reproduction(f2, phi, {}, constant_exosystem(), {u}, {3.0 + 2.0 * u}, 50, 1e-6);
    EXPECT_TRUE(v.pass) << u;
    EXPECT_LT(v.max_deviation, 1e-12);
  }
}

TEST(Reproduction, ZeroInput) {
  const VectorField f2({Expr(0)});
  const Expr phi = (Expr::variable(1) - Expr(3)) / Expr(2);
  EXPECT_TRUE(verify_im_reproduction(f2, phi, {}, constant_exosystem(), {0.0}, {3.0}, 10, 1e-9).pass);
}

TEST(Reproduction, WrongInitialState) {
  // phi(0) = -3/2 against u = 1.
  const VectorField f2({Expr(0)});
  const Expr phi = (Expr::variable(1) - Expr(3)) / Expr(2);
  const ReproductionVerdict v =
      verify_im_reproduction(f2, phi, {}, constant_exosystem(), {1.0}, {0.0}, 50, 1e-6);
  EXPECT_FALSE(v.pass);
  EXPECT_NEAR(v.max_deviation, 2.5, 1e-12);
  EXPECT_EQ(v.grade, Grade::Failed);
}

TEST(Parallel, ExceptionsPropagate) {
  EXPECT_THROW(parallel_for(8, [](int i) {
                 if (i == 5) throw InvalidInput("boom");
               }),
               InvalidInput);
  std::vector<int> hit(16, 0);
  parallel_for(16, [&](int i) { hit[i] = i * i; });
  for (int i = 0; i < 16; ++i) EXPECT_EQ(hit[i], i * i);
}
