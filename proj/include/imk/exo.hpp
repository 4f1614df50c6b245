#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imk/linpoly.hpp"
#include "imk/vfield.hpp"

namespace imk {

/// w' = Q(w), u = theta(w). Symbolic exosystems use variables w1..wm,
/// stored as state variables 1..m.
struct Exosystem {
  enum class Kind { Linear, Symbolic };
  Kind kind = Kind::Linear;
  int m = 0;
  RatMatrix Q;          // Linear
  RatVector theta;      // Linear
  VectorField field_s;  // Symbolic
  Expr theta_s;         // Symbolic
  std::string label;    // constant, harmonic, ode_coeffs, linear, symbolic
  ParamValues params;   // values for parameters in symbolic Q, theta

  static Exosystem linear(RatMatrix Q, RatVector theta, std::string label = "linear");
  static Exosystem symbolic(VectorField Q, Expr theta, ParamValues params = {},
                            std::string label = "symbolic");

  bool is_linear() const { return kind == Kind::Linear; }
  /// Characteristic polynomial of Q (linear only).
  Poly characteristic() const;
  Eigen::MatrixXd Q_double() const;
  Eigen::RowVectorXd theta_double() const;
};

/// Companion form of u^(l) + b1 u^(l-1) + ... + bl u = 0, theta = e1.
Exosystem from_ode_coeffs(const std::vector<Rational>& b);
Exosystem constant_exosystem();
Exosystem harmonic_exosystem(const Rational& omega);

struct ModesVerdict {
  bool ok = false;
  std::vector<Complex> eigenvalues;
};
ModesVerdict check_no_stable_modes(const Exosystem& exo, double eps = kEpsStab);

struct PoissonVerdict {
  enum class Status { Proven, ProvenNot, Sampled, Unknown };
  Status status = Status::Unknown;
  std::vector<Complex> eigenvalues;
  std::vector<double> return_distances;  // symbolic: per sampled w0
  std::string detail;

  Grade grade() const;
};
std::string_view to_string(PoissonVerdict::Status s);

/// Linear: spectral criterion (imaginary, semisimple spectrum). Symbolic:
/// recurrence sampling, never Proven.
PoissonVerdict check_poisson_stable(const Exosystem& exo, double horizon, double delta,
                                    std::uint64_t seed, double eps = kEpsStab);

struct InputSignal {
  std::vector<double> t;
  std::vector<std::vector<double>> w;
  std::vector<double> u;
};

/// Linear: exact matrix exponential at each grid point. Symbolic: DOPRI5.
InputSignal generate_input(const Exosystem& exo, const std::vector<double>& w0, double horizon,
                           double step);

}  // namespace imk
