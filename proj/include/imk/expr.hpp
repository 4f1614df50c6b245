#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "imk/grade.hpp"

namespace imk {

using Rational = mpq_class;

/// Parses "3", "-0.25", "7/2", "1e-3" into an exact rational.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
/// Exact rational equal to the shortest decimal that round-trips `v`.
Rational rational_from_double(double v);

enum class Func { Exp, Ln, Sin, Cos };

namespace detail {
struct ExprRep;
struct Atom;
}  // namespace detail

/// Symbolic scalar over state variables x1..xn and named parameters.
///
/// Every Expr is held in canonical form: a quotient of two expanded
/// multivariate polynomials over atoms (state variables, parameters and
/// calls exp/ln/sin/cos of canonical arguments), with exact rational
/// coefficients, the multivariate gcd cancelled and the denominator monic.
/// Two Exprs denoting the same rational function of their atoms are
/// therefore structurally equal, and normalization is the identity.
class Expr {
 public:
  Expr();  // zero
  Expr(long value);  // NOLINT(google-explicit-constructor)
  explicit Expr(const Rational& value);

  static Expr variable(int index);  // 1-based
  static Expr parameter(std::string name);
  static Expr call(Func fn, const Expr& arg);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  /// Throws DomainError when `b` is identically zero.
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr& operator+=(const Expr& b) { return *this = *this + b; }
  Expr& operator-=(const Expr& b) { return *this = *this - b; }
  Expr& operator*=(const Expr& b) { return *this = *this * b; }

  friend bool operator==(const Expr& a, const Expr& b);
  friend std::strong_ordering operator<=>(const Expr& a, const Expr& b);

  /// True for the canonical zero.
  bool is_zero() const;
  /// Value if the expression contains no atoms at all.
  std::optional<Rational> as_rational() const;
  bool is_polynomial() const;  // denominator is 1
  bool depends_on_state() const;
  bool depends_on_variable(int index) const;
  /// Largest state-variable index referenced anywhere (0 if none).
  int max_variable() const;
  std::set<std::string> parameters() const;
  /// True if the expression contains an exp/ln/sin/cos call.
  bool has_calls() const;

  const detail::ExprRep& rep() const { return *rep_; }
  explicit Expr(std::shared_ptr<const detail::ExprRep> rep) : rep_(std::move(rep)) {}

 private:
  std::shared_ptr<const detail::ExprRep> rep_;
};

Expr pow(const Expr& base, int exponent);
Expr exp(const Expr& e);
Expr ln(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);

/// Parses the infix grammar: + - * / ^(integer), exp ln sin cos, variables
/// <prefix>1..<prefix>n, parameter identifiers [a-z][a-z0-9_]*, rational
/// literals. Throws ParseError with a byte offset.
Expr parse(std::string_view text, int n, const std::vector<std::string>& params,
           char var_prefix = 'x');

/// Exact partial derivative with respect to variable `index` (1-based).
Expr differentiate(const Expr& e, int index);

/// Replaces variable i by replacements[i-1] (variables beyond the list are
/// kept).
Expr substitute(const Expr& e, const std::vector<Expr>& replacements);
Expr substitute_params(const Expr& e, const std::map<std::string, Rational>& values);

/// Printing. `var_names[i-1]` names variable i; default "x<i>".
std::string to_string(const Expr& e, const std::vector<std::string>& var_names = {});

using ParamValues = std::map<std::string, double>;

/// IEEE evaluation. Throws DomainError (ln of nonpositive, division by zero)
/// naming the offending subexpression, InvalidInput for unbound parameters.
double eval(const Expr& e, std::span<const double> x, const ParamValues& params = {});

struct AffineForm {
  Expr constant;
  std::vector<Expr> coeffs;  // coeffs[i] multiplies x_{i+1}
};
/// Decomposes e = constant + sum coeffs[i] x_{i+1} with state-free pieces.
std::optional<AffineForm> as_affine(const Expr& e, int n);

// ---------------------------------------------------------------------------
// Zero testing

inline constexpr double kWitnessThreshold = 1e-8;
inline constexpr int kMinSamples = 32;

struct Interval {
  double lo = -3.0;
  double hi = 3.0;
};

/// Where sampling happens. Unset box coordinates use [-3, 3]; unbound
/// parameters are drawn from (0, 3].
struct SampleDomain {
  std::vector<Interval> box;
  ParamValues params;
  int dim = 0;
};

struct SamplePoint {
  std::vector<double> x;
  ParamValues params;
  double value = 0.0;
};

struct ZeroStatus {
  enum class Kind { ProvenZero, ProvenNonzeroConstant, SampledZero, SampledNonzero };
  Kind kind = Kind::ProvenZero;
  int samples = 0;
  double max_abs = 0.0;
  std::optional<SamplePoint> witness;  // set for SampledNonzero

  bool zero() const { return kind == Kind::ProvenZero || kind == Kind::SampledZero; }
  Grade grade() const {
    return (kind == Kind::ProvenZero || kind == Kind::ProvenNonzeroConstant) ? Grade::Proven
                                                                             : Grade::Sampled;
  }
};
std::string_view to_string(ZeroStatus::Kind k);

/// Exact on the rational fragment; seeded sampling otherwise. Throws
/// ZeroTestUnknown if no sample point can be evaluated.
ZeroStatus is_zero(const Expr& e, std::uint64_t seed, const SampleDomain& domain = {});

/// Verdict on "e(x) != 0 for every x in the domain".
struct NonvanishingStatus {
  enum class Kind { ProvenNonzero, SampledNonzero, Vanishes, Inconclusive };
  Kind kind = Kind::Inconclusive;
  int samples = 0;
  double min_abs = 0.0;
  std::optional<SamplePoint> root;  // witness for Vanishes
  std::string detail;

  Grade grade() const {
    switch (kind) {
      case Kind::ProvenNonzero: return Grade::Proven;
      case Kind::SampledNonzero: return Grade::Sampled;
      case Kind::Vanishes: return Grade::Failed;
      case Kind::Inconclusive: return Grade::Unknown;
    }
    return Grade::Unknown;
  }
};
std::string_view to_string(NonvanishingStatus::Kind k);

NonvanishingStatus check_nonvanishing(const Expr& e, std::uint64_t seed,
                                      const SampleDomain& domain = {});

/// Flattened double-precision evaluator with parameters bound at
/// construction. Used on integrator hot paths.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const ParamValues& params);
  double operator()(std::span<const double> x) const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
};

}  // namespace imk
