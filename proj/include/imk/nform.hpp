#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imk/error.hpp"
#include "imk/expr.hpp"
#include "imk/grade.hpp"
#include "imk/vfield.hpp"

namespace imk {

using ExprMatrix = std::vector<std::vector<Expr>>;

/// Gauss-Jordan over the field of rational functions in the parameters.
/// Pivots are accepted when they are not the canonical zero, so results hold
/// for generic parameter values.
std::optional<ExprMatrix> inverse(const ExprMatrix& m);
Expr determinant(const ExprMatrix& m);
/// Rows spanning {w : w M = 0} for an n x k matrix M.
ExprMatrix left_nullspace(const ExprMatrix& m);
/// Scales a row with rational entries to coprime integers, first nonzero
/// entry positive. Rows with symbolic entries are scaled so that their first
/// nonzero entry is 1.
std::vector<Expr> normalize_row(std::vector<Expr> row);

struct NamedCheck {
  std::string name;
  Grade grade = Grade::Unknown;
  std::string detail;
};

/// Refusal: the normal-form construction needs constant tau fields.
class NonConstantTau : public Error {
 public:
  using Error::Error;
};

struct NormalForm {
  enum class Construction { Constructed, VerifiedUserSupplied, Failed };
  Construction construction = Construction::Failed;
  int r = 0;
  int n = 0;
  std::vector<Expr> zeta;     // zeta_k(x) = L_f^{k-1} h
  ExprMatrix W;               // (n - r) x n
  std::vector<Expr> z2;       // W x
  /// x as functions of z = (zeta_1..zeta_r, z2_1..z2_{n-r}), written as
  /// variables 1..n.
  std::vector<Expr> inverse_map;
  Expr a;                     // zeta_r' = b + a u, in z
  Expr b;
  VectorField f2;             // z2' in z
  VectorField f2_zero;        // z2' at z1 = 0, variables z2 renumbered 1..n-r
  bool output_driven = false;
  std::vector<NamedCheck> checks;
  Grade grade = Grade::Unknown;
  std::string detail;

  /// Names for printing expressions in z: zeta1.., z2_1..
  std::vector<std::string> z_names() const;
  std::vector<std::string> z2_names() const;
};

std::vector<Expr> zeta_coordinates(const AffineSystem& sys, int r);

/// Constant-tau construction. Throws NonConstantTau when some tau_i depends
/// on the state, InvalidInput when the relative degree is not uniform or the
/// zeta coordinates are not affine in x, and PropertyFailure when the
/// coordinate map is singular.
NormalForm build_normal_form(const AffineSystem& sys, const AssumptionReport& rep,
                             std::uint64_t seed);

struct CoordinateCheck {
  Grade grade = Grade::Unknown;
  std::vector<NamedCheck> checks;
};

/// Verification of user-supplied coordinates (zeta, z2) for any system.
CoordinateCheck verify_coordinate_change(const AffineSystem& sys, const std::vector<Expr>& zeta,
                                         const std::vector<Expr>& z2, std::uint64_t seed);

struct IMOutput {
  Expr phi;   // in z2 variables renumbered 1..n-r
  Expr a0;    // a(0, z2)
  Expr b0;    // b(0, z2)
  NonvanishingStatus a0_check;
  Grade grade = Grade::Unknown;
};

/// phi(z2) = -b(0, z2) / a(0, z2). Throws PropertyFailure if a(0, z2) is
/// zero somewhere on the sampled domain.
IMOutput internal_model_output(const NormalForm& nf, const ParamValues& params,
                               std::uint64_t seed);

}  // namespace imk
