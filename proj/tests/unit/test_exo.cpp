#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "imk/error.hpp"
#include "imk/exo.hpp"

using namespace imk;

namespace {

Expr w(int i) { return Expr::variable(i); }

}  // namespace

TEST(OdeCoeffs, Constants) {
  const Exosystem e = from_ode_coeffs({Rational(0)});
  ASSERT_EQ(e.m, 1);
  EXPECT_EQ(e.Q, (RatMatrix{{0}}));
  EXPECT_EQ(e.theta, (RatVector{1}));
}

TEST(OdeCoeffs, Harmonic) {
  const Exosystem e = from_ode_coeffs({Rational(0), Rational(9)});
  EXPECT_EQ(e.Q, (RatMatrix{{0, 1}, {-9, 0}}));
  EXPECT_EQ(e.theta, (RatVector{1, 0}));
  EXPECT_EQ(harmonic_exosystem(3).Q, e.Q);
}

TEST(OdeCoeffs, Ramps) {
  const Exosystem e = from_ode_coeffs({Rational(0), Rational(0)});
  EXPECT_EQ(e.Q, (RatMatrix{{0, 1}, {0, 0}}));
  EXPECT_EQ(e.characteristic(), (Poly{0, 0, 1}));
}

TEST(Exosystem, Validation) {
  EXPECT_THROW(Exosystem::linear({{0, 1}}, {1, 0}), InvalidInput);
  EXPECT_THROW(harmonic_exosystem(0), InvalidInput);
}

TEST(StableModes, Examples) {
  EXPECT_TRUE(check_no_stable_modes(constant_exosystem()).ok);
  EXPECT_TRUE(check_no_stable_modes(harmonic_exosystem(2)).ok);
  EXPECT_FALSE(check_no_stable_modes(Exosystem::linear({{-1}}, {1})).ok);
}

TEST(Poisson, Linear) {
  EXPECT_EQ(check_poisson_stable(constant_exosystem(), 50, 1e-2, 0).status,
            PoissonVerdict::Status::Proven);
  const PoissonVerdict h = check_poisson_stable(harmonic_exosystem(2), 50, 1e-2, 0);
  EXPECT_EQ(h.status, PoissonVerdict::Status::Proven);
  EXPECT_EQ(h.grade(), Grade::Proven);
  const PoissonVerdict g = check_poisson_stable(Exosystem::linear({{1}}, {1}), 50, 1e-2, 0);
  EXPECT_EQ(g.status, PoissonVerdict::Status::ProvenNot);
  EXPECT_EQ(g.grade(), Grade::Failed);
}

TEST(Poisson, DefectiveImaginaryEigenvalue) {
  EXPECT_EQ(check_poisson_stable(from_ode_coeffs({0, 0}), 50, 1e-2, 0).status,
            PoissonVerdict::Status::ProvenNot);
  // Repeated semisimple zero eigenvalue is fine.
  EXPECT_EQ(check_poisson_stable(Exosystem::linear({{0, 0}, {0, 0}}, {1, 1}), 50, 1e-2, 0).status,
            PoissonVerdict::Status::Proven);
}

TEST(Poisson, SymbolicSampled) {
  // Harmonic oscillator written symbolically: never Proven.
  const Exosystem e = Exosystem::symbolic(VectorField({w(2), -w(1)}), w(1));
  const PoissonVerdict v = check_poisson_stable(e, 50, 1e-2, 1);
  EXPECT_EQ(v.status, PoissonVerdict::Status::Sampled);
  EXPECT_EQ(v.return_distances.size(), 4u);
  const Exosystem grow = Exosystem::symbolic(VectorField({w(1)}), w(1));
  EXPECT_EQ(check_poisson_stable(grow, 10, 1e-2, 1).status, PoissonVerdict::Status::Unknown);
}

TEST(GenerateInput, Constant) {
  const InputSignal s = generate_input(constant_exosystem(), {3.0}, 10, 0.5);
  for (double u : s.u) EXPECT_DOUBLE_EQ(u, 3.0);
}

TEST(GenerateInput, Cosine) {
  const double half_pi = std::numbers::pi / 2;
  const InputSignal s = generate_input(harmonic_exosystem(1), {1.0, 0.0}, half_pi, half_pi / 100);
  EXPECT_LT(std::abs(s.u.back()), 1e-8);
  for (std::size_t k = 0; k < s.t.size(); ++k) EXPECT_NEAR(s.u[k], std::cos(s.t[k]), 1e-12);
}

TEST(GenerateInput, Ramp) {
  const InputSignal s = generate_input(from_ode_coeffs({0, 0}), {1.0, 1.0}, 5, 0.25);
  for (std::size_t k = 0; k < s.t.size(); ++k) EXPECT_NEAR(s.u[k], 1.0 + s.t[k], 1e-12);
}

TEST(GenerateInput, SymbolicAgreesWithLinear) {
  const Exosystem lin = harmonic_exosystem(2);
  const Exosystem sym = Exosystem::symbolic(VectorField({w(2), Expr(-4) * w(1)}), w(1));
  const InputSignal a = generate_input(lin, {0.3, -1.0}, 5, 0.1);
  const InputSignal b = generate_input(sym, {0.3, -1.0}, 5, 0.1);
  for (std::size_t k = 0; k < a.u.size(); ++k) EXPECT_NEAR(a.u[k], b.u[k], 1e-7);
}

TEST(GenerateInput, BadArguments) {
  EXPECT_THROW(generate_input(constant_exosystem(), {1.0, 2.0}, 1, 0.1), InvalidInput);
  EXPECT_THROW(generate_input(constant_exosystem(), {1.0}, -1, 0.1), InvalidInput);
}
