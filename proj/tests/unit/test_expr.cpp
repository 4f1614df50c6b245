#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "imk/error.hpp"
#include "imk/expr.hpp"

using namespace imk;

namespace {

const std::vector<std::string> kEcoliParams{"a1", "a2", "a3", "a4", "a5", "a6"};

Expr x(int i) { return Expr::variable(i); }
Expr p(const char* name) { return Expr::parameter(name); }

Expr ecoli_h() { return parse("(a1+a5) - (a2*x1 + (a6-a3)*x2)", 2, kEcoliParams); }

}  // namespace

TEST(ExprParse, LinearExpression) {
  const Expr e = parse("2*x1 + 1", 1, {});
  EXPECT_EQ(e, Expr(2) * x(1) + Expr(1));
}

TEST(ExprParse, EcoliOutput) {
  const Expr want = (p("a1") + p("a5")) - (p("a2") * x(1) + (p("a6") - p("a3")) * x(2));
  EXPECT_EQ(ecoli_h(), want);
}

TEST(ExprParse, RationalLiterals) {
  EXPECT_EQ(parse_rational("7/2"), Rational(7, 2));
  EXPECT_EQ(parse_rational("-0.25"), Rational(-1, 4));
  EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
  EXPECT_EQ(parse("x1^3", 1, {}), x(1) * x(1) * x(1));
}

TEST(ExprParse, SyntaxErrorCarriesOffset) {
  try {
    parse("2*x1 + * 3", 1, {});
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
}

TEST(ExprParse, UnknownIdentifierAndRange) {
  EXPECT_THROW(parse("k*x1", 1, {}), ParseError);
  EXPECT_THROW(parse("x3", 2, {}), ParseError);
  EXPECT_THROW(parse("x0", 2, {}), ParseError);
}

TEST(ExprCanonical, EqualFormsAreStructurallyEqual) {
  const Expr a = (x(1) + 1) * (x(1) - 1);
  const Expr b = x(1) * x(1) - 1;
  EXPECT_EQ(a, b);
  EXPECT_EQ((x(1) * x(1) - 1) / (x(1) - 1), x(1) + 1);
  EXPECT_TRUE(((x(1) + x(2)) - x(2) - x(1)).is_zero());
}

TEST(ExprCanonical, DivisionByZeroThrows) {
  EXPECT_THROW(x(1) / (x(1) - x(1)), DomainError);
}

TEST(ExprDiff, Power) { EXPECT_EQ(differentiate(x(1) * x(1), 1), Expr(2) * x(1)); }

TEST(ExprDiff, EcoliOutput) { EXPECT_EQ(differentiate(ecoli_h(), 1), -p("a2")); }

TEST(ExprDiff, ProductWithExp) {
  const Expr e = x(1) * exp(x(1));
  EXPECT_EQ(differentiate(e, 1), (Expr(1) + x(1)) * exp(x(1)));
}

TEST(ExprDiff, MatchesFiniteDifferences) {
  const Expr e = parse("sin(x1*x2) + ln(x1 + 3)/(1 + x2^2)", 2, {});
  const std::vector<double> pt{0.4, -0.7};
  const double hstep = 1e-6;
  for (int i = 1; i <= 2; ++i) {
    std::vector<double> up = pt, dn = pt;
    up[i - 1] += hstep;
    dn[i - 1] -= hstep;
    const double fd = (eval(e, up) - eval(e, dn)) / (2 * hstep);
    EXPECT_NEAR(eval(differentiate(e, i), pt), fd, 1e-7);
  }
}

TEST(ExprZero, BinomialIdentity) {
  const Expr e = pow(x(1) + 1, 2) - x(1) * x(1) - Expr(2) * x(1) - Expr(1);
  EXPECT_EQ(is_zero(e, 0).kind, ZeroStatus::Kind::ProvenZero);
}

TEST(ExprZero, TranscendentalIdentityIsSampled) {
  const Expr e = pow(sin(x(1)), 2) + pow(cos(x(1)), 2) - Expr(1);
  const ZeroStatus zs = is_zero(e, 3);
  EXPECT_EQ(zs.kind, ZeroStatus::Kind::SampledZero);
  EXPECT_GE(zs.samples, kMinSamples);
  EXPECT_EQ(zs.grade(), Grade::Sampled);
}

TEST(ExprZero, NonzeroWithWitness) {
  const Expr e = x(1) * x(2) - x(2);
  const ZeroStatus zs = is_zero(e, 0);
  EXPECT_FALSE(zs.zero());
  EXPECT_EQ(zs.kind, ZeroStatus::Kind::SampledNonzero);
  ASSERT_TRUE(zs.witness.has_value());
  EXPECT_GT(std::abs(zs.witness->x[0] * zs.witness->x[1] - zs.witness->x[1]), kWitnessThreshold);
}

TEST(ExprZero, EcoliLieDerivativeIdentity) {
  // L_g h written out by hand against D x1.
  const Expr lgh = (-p("a4") * x(1)) * (-p("a2")) + (p("a4") * x(1)) * (p("a3") - p("a6"));
  const Expr D = p("a2") * p("a4") + (p("a3") - p("a6")) * p("a4");
  EXPECT_EQ(is_zero(lgh - D * x(1), 0).kind, ZeroStatus::Kind::ProvenZero);
}

TEST(ExprZero, AllSamplesFailingIsDistinctError) {
  // ln of a negative quantity everywhere on the box.
  const Expr e = ln(-(x(1) * x(1)) - Expr(1)) * x(1);
  EXPECT_THROW(is_zero(e, 0), ZeroTestUnknown);
}

TEST(ExprEval, Values) {
  const std::vector<double> three{3.0};
  EXPECT_DOUBLE_EQ(eval(parse("2*x1 + 1", 1, {}), three), 7.0);
  ParamValues ones;
  for (const auto& n : kEcoliParams) ones[n] = 1.0;
  const std::vector<double> pt{2.0, 1.0};
  EXPECT_DOUBLE_EQ(eval(ecoli_h(), pt, ones), 0.0);
}

TEST(ExprEval, DomainErrorNamesSubexpression) {
  const std::vector<double> zero{0.0};
  try {
    eval(ln(x(1)), zero);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(e.subexpression().find("x1"), std::string::npos);
  }
}

TEST(ExprEval, UnboundParameter) {
  const std::vector<double> pt{1.0, 1.0};
  EXPECT_THROW(eval(ecoli_h(), pt), InvalidInput);
}

TEST(ExprEval, CompiledMatchesInterpreter) {
  const Expr e = parse("exp(-x1)*cos(x2) + x1^2/(2 + x2^2) - k*x2", 2, {"k"});
  const ParamValues pv{{"k", 0.3}};
  const CompiledExpr c(e, pv);
  for (double a : {-1.0, 0.0, 0.5, 2.0})
    for (double b : {-2.0, 0.25, 1.5}) {
      const std::vector<double> pt{a, b};
      EXPECT_NEAR(c(pt), eval(e, pt, pv), 1e-14);
    }
}

TEST(ExprNonvanishing, Grades) {
  EXPECT_EQ(check_nonvanishing(Expr(3), 0).kind, NonvanishingStatus::Kind::ProvenNonzero);
  EXPECT_EQ(check_nonvanishing(x(1), 0).kind, NonvanishingStatus::Kind::Vanishes);
  SampleDomain pos;
  pos.box = {{0.1, 5.0}};
  pos.dim = 1;
  EXPECT_EQ(check_nonvanishing(x(1), 0, pos).kind, NonvanishingStatus::Kind::SampledNonzero);
}

TEST(ExprAffine, Decomposition) {
  const auto af = as_affine(parse("3 + 2*x1 - k*x2", 2, {"k"}), 2);
  ASSERT_TRUE(af.has_value());
  EXPECT_EQ(af->constant, Expr(3));
  EXPECT_EQ(af->coeffs[0], Expr(2));
  EXPECT_EQ(af->coeffs[1], -p("k"));
  EXPECT_FALSE(as_affine(x(1) * x(2), 2).has_value());
}

TEST(ExprPrint, RoundTrip) {
  const Expr e = parse("(a1+a5) - (a2*x1 + (a6-a3)*x2) + x1^2/(1+x2)", 2, kEcoliParams);
  EXPECT_EQ(parse(to_string(e), 2, kEcoliParams), e);
}
