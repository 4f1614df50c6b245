#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "imk/expr.hpp"
#include "imk/grade.hpp"
#include "imk/vfield.hpp"

namespace imk {

using Complex = std::complex<double>;

/// Polynomial in s with exact rational coefficients, ascending order.
/// Invariant: no trailing zero coefficients (the zero polynomial is empty).
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> ascending);
  Poly(std::initializer_list<long> ascending);
  /// Each double is converted exactly (binary value, not a decimal guess).
  static Poly from_doubles(const std::vector<double>& ascending);
  static Poly constant(const Rational& c);
  static Poly monomial(int degree, const Rational& c = 1);
  /// prod (s - r_i) for rational roots.
  static Poly from_roots(const std::vector<Rational>& roots);

  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  bool is_zero() const { return c_.empty(); }
  const std::vector<Rational>& coeffs() const { return c_; }
  Rational coeff(int i) const;
  Rational lead() const;
  bool is_monic() const;
  Poly monic() const;
  Poly derivative() const;

  Rational eval(const Rational& s) const;
  Complex eval(Complex s) const;
  std::vector<double> to_doubles() const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(const Rational& k, const Poly& a);
  friend Poly operator-(const Poly& a);
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

 private:
  void trim();
  std::vector<Rational> c_;
};

std::string to_string(const Poly& p, char var = 's');

/// q = a p + b with deg b < deg p, exact. Throws InvalidInput if p is zero.
std::pair<Poly, Poly> poly_divmod(const Poly& q, const Poly& p);
/// Monic gcd (zero if both are zero).
Poly poly_gcd(Poly a, Poly b);

/// Roots via eigenvalues of the balanced companion matrix, sorted by
/// (Re, Im). Exact zero roots are split off first. Throws NumericalFailure
/// if the eigen-iteration does not converge.
std::vector<Complex> poly_roots(const Poly& p);

/// Strict Hurwitz test by the exact Routh array.
bool is_hurwitz(const Poly& p);

/// num/den with gcd cancelled and den monic.
struct RationalFn {
  Poly num;
  Poly den{1};
  bool reduced = false;

  static RationalFn make(Poly num, Poly den);
  Complex eval(Complex s) const;
  friend RationalFn operator*(const RationalFn& a, const RationalFn& b);
  friend bool operator==(const RationalFn& a, const RationalFn& b) {
    return a.num == b.num && a.den == b.den;
  }
};
std::string to_string(const RationalFn& r);

using RatMatrix = std::vector<std::vector<Rational>>;
using RatVector = std::vector<Rational>;

Eigen::MatrixXd to_eigen(const RatMatrix& m);
Eigen::RowVectorXd to_eigen_row(const RatVector& v);

/// x' = A x + u b, y = c x.
struct LinSys {
  RatMatrix A;
  RatVector b;
  RatVector c;

  int n() const { return static_cast<int>(A.size()); }
  /// Throws InvalidInput on inconsistent dimensions.
  void validate() const;
};

AffineSystem to_affine_system(const LinSys& sys);
/// Controller-form realization of num/den (deg num < deg den).
LinSys controller_form(const RationalFn& s);

/// Characteristic polynomial and adjugate chain (Faddeev-LeVerrier), exact.
Poly characteristic_polynomial(const RatMatrix& A);
RationalFn transfer_function(const LinSys& sys);
/// Index r of the first nonzero Markov parameter c A^{r-1} b, or 0 if none
/// up to n.
int markov_relative_degree(const LinSys& sys);

struct FeedbackDecomposition {
  Poly a;           // quotient
  Poly b;           // remainder
  Poly p;           // numerator of S
  RationalFn fb;    // b/p
  bool zero_feedback = false;  // b = 0: y = u/a with no feedback path
};

/// S = p/q, q = a p + b, S = 1/(a + b/p). Throws InvalidInput when p = 0 or
/// S is not strictly proper.
FeedbackDecomposition feedback_decomposition(const RationalFn& s);
RationalFn reassemble(const FeedbackDecomposition& d);

struct LinearAdaptation {
  bool stable = false;
  Grade grade = Grade::Unknown;
  RationalFn product;                 // G S after exact cancellation
  std::vector<Complex> poles;         // of the reduced product
  std::vector<Complex> paired;        // numerically cancelled poles
  double pairing_tolerance = 1e-6;
  double eps_stab = 1e-9;
  std::string detail;
};

inline constexpr double kPairingTolerance = 1e-6;
inline constexpr double kEpsStab = 1e-9;

LinearAdaptation check_linear_adaptation(const RationalFn& s, const RationalFn& g,
                                         double eps_stab = kEpsStab,
                                         double pairing_tol = kPairingTolerance);

struct LinearIMResult {
  Poly pi;
  Poly p0;
  Poly a;
  Poly b;
  Poly b1;
  Poly b2;
  RatMatrix companion;   // controller form of b2/pi
  RatVector input;       // e_l
  RatVector output;      // b2 coefficients, ascending
};

/// Throws NoInternalModel if pi does not divide the numerator of S and
/// InvalidInput if pi is not monic, has a stable mode or S has p = 0.
LinearIMResult extract_internal_model_linear(const RationalFn& s, const Poly& pi,
                                             double eps_stab = kEpsStab);

struct EmbeddingResult {
  Eigen::MatrixXd T;
  Eigen::MatrixXd P;
  Eigen::MatrixXd block_form;   // P^{-1} F P, upper block-triangular, Q leading
  std::string orientation = "upper";
  Eigen::MatrixXd F_used;       // F, or its observable quotient
  Eigen::RowVectorXd phi_used;
  Eigen::MatrixXd Q_used;       // Q, or its observable quotient
  Eigen::RowVectorXd theta_used;
  bool reduced_F = false;
  bool reduced_Q = false;
  double matching_residual = 0.0;
  double residual_FT = 0.0;     // ||F T - T Q||_inf
  double residual_phi = 0.0;    // ||phi T - theta||_inf
  double min_singular_value = 0.0;
};

/// Solves phi F^k T = theta Q^k for k = 0..dim F + dim Q - 1 after reducing
/// both pairs to their observable parts. Throws NoEmbedding when the
/// residuals exceed tol or T loses rank.
EmbeddingResult solve_embedding(const Eigen::MatrixXd& Q, const Eigen::RowVectorXd& theta,
                                const Eigen::MatrixXd& F, const Eigen::RowVectorXd& phi,
                                double tol = 1e-8);

/// Observability matrix [c; cA; ...; cA^{k-1}].
Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& c,
                                     int k);

}  // namespace imk
