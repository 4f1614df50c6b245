#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imk/expr.hpp"
#include "imk/grade.hpp"

namespace imk {

/// One Expr per state coordinate.
struct VectorField {
  std::vector<Expr> components;

  VectorField() = default;
  explicit VectorField(std::vector<Expr> c) : components(std::move(c)) {}
  static VectorField zero(int n) { return VectorField(std::vector<Expr>(n)); }

  int dim() const { return static_cast<int>(components.size()); }
  const Expr& operator[](int i) const { return components[i]; }
  Expr& operator[](int i) { return components[i]; }

  bool depends_on_state() const;
  friend bool operator==(const VectorField&, const VectorField&) = default;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(const Expr& s, const VectorField& v);

/// Rows are components, columns partial derivatives.
std::vector<std::vector<Expr>> jacobian(const VectorField& v, int n);

/// L_X h = grad h . X
Expr lie_derivative(const Expr& h, const VectorField& x);

/// [X, Y] = (DY) X - (DX) Y; for X = Ax, Y = Bx this is (BA - AB) x.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

/// Whether f(0) = 0 and h(0) = 0 could be established.
struct OriginCondition {
  enum class Status { Holds, Violated, UserAsserted };
  Status status = Status::Holds;
  std::string detail;
};

/// x' = f(x) + u g(x), y = h(x) over R^n (or a declared box).
struct AffineSystem {
  int n = 0;
  std::vector<std::string> params;
  std::map<std::string, Rational> param_values;  // bound defaults, may be partial
  VectorField f;
  VectorField g;
  Expr h;
  std::vector<Interval> domain;  // empty: unrestricted
  OriginCondition origin;
  std::vector<std::string> warnings;

  SampleDomain sample_domain() const;
  ParamValues numeric_params() const;
  /// Copy with every bound parameter substituted by its value.
  AffineSystem bind_params() const;
};

/// Validates dimensions and references, then evaluates the origin condition.
/// Violations become warnings, never errors.
AffineSystem make_affine_system(int n, std::vector<std::string> params,
                                std::map<std::string, Rational> values, VectorField f,
                                VectorField g, Expr h, std::vector<Interval> domain = {});

/// Parses component strings with the shared grammar.
AffineSystem parse_affine_system(int n, std::vector<std::string> params,
                                 std::map<std::string, Rational> values,
                                 const std::vector<std::string>& f,
                                 const std::vector<std::string>& g, const std::string& h,
                                 std::vector<Interval> domain = {});

struct RelDegree {
  enum class Status { Uniform, NoUniform, Unknown };
  Status status = Status::Unknown;
  int r = 0;                       // valid when Uniform
  std::vector<Expr> lf_chain;      // L_f^k h, k = 0..r (last entry is L_f^r h)
  Expr lg_lf;                      // L_g L_f^{r-1} h
  std::vector<ZeroStatus> vanishing;  // L_g L_f^k h for k < r-1
  std::optional<NonvanishingStatus> nonvanishing;
  Grade quality = Grade::Unknown;
  std::string detail;
  std::optional<SamplePoint> witness;
};
std::string_view to_string(RelDegree::Status s);

RelDegree relative_degree(const AffineSystem& sys, std::uint64_t seed);

struct TauFields {
  VectorField g_tilde;
  VectorField f_tilde;
  std::vector<VectorField> tau;  // tau[0] = g_tilde
};

/// g~ = g / L_g L_f^{r-1} h, f~ = f - (L_f^r h) g~, tau_i = ad_{f~}^{i-1} g~.
/// Throws InvalidInput when the normalizing factor is identically zero.
TauFields tau_fields(const AffineSystem& sys, const RelDegree& rd);

struct CompletenessStatus {
  Grade grade = Grade::Unknown;  // Proven or Unknown
  std::string reason;            // "constant", "linear-affine", "not certified"
};
CompletenessStatus check_completeness(const VectorField& v, int n);

struct BracketCheck {
  int i = 0, j = 0;  // 1-based field indices
  Grade grade = Grade::Proven;
  VectorField bracket;
  std::optional<int> nonzero_component;  // 1-based
  std::optional<SamplePoint> witness;
};

struct CommutativityStatus {
  Grade grade = Grade::Proven;
  std::vector<BracketCheck> pairs;
  std::optional<BracketCheck> failure;
};
CommutativityStatus check_commutativity(const std::vector<VectorField>& fields,
                                        std::uint64_t seed, const SampleDomain& domain = {});

struct AssumptionReport {
  RelDegree relative_degree;
  std::optional<TauFields> tau;
  std::vector<CompletenessStatus> completeness;
  Grade completeness_grade = Grade::Unknown;
  CommutativityStatus commutativity;
  std::string detail;
};

AssumptionReport check_assumptions(const AffineSystem& sys, std::uint64_t seed);

/// Deterministic sub-seed for the k-th independent check.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

}  // namespace imk
