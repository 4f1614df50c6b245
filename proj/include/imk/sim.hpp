#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imk/error.hpp"
#include "imk/expr.hpp"
#include "imk/grade.hpp"
#include "imk/vfield.hpp"

namespace imk {

struct Exosystem;

// ---------------------------------------------------------------------------
// Integrator

using OdeRhs = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

struct IntegratorOptions {
  enum class Method { Dopri5, Rk4 };
  Method method = Method::Dopri5;
  double rtol = 1e-8;
  double atol = 1e-10;
  double fixed_step = 1e-2;   // Rk4 only
  double initial_step = 0.0;  // 0: automatic
  long max_steps = 5'000'000;
  /// Integration stops (status BoundExceeded) once the max-norm of the
  /// state exceeds this.
  double bound = std::numeric_limits<double>::infinity();
};

/// Step-size underflow or non-finite state.
class DivergenceError : public NumericalFailure {
 public:
  DivergenceError(const std::string& what, double t, std::vector<double> state)
      : NumericalFailure(what + " at t = " + std::to_string(t)), t_(t), state_(std::move(state)) {}
  double time() const { return t_; }
  const std::vector<double>& state() const { return state_; }

 private:
  double t_;
  std::vector<double> state_;
};

/// Continuous solution: per-step polynomial interpolants (DOPRI5 dense
/// output of order 4, cubic Hermite for Rk4).
class Solution {
 public:
  enum class Status { Completed, BoundExceeded };

  int dim() const { return dim_; }
  double t0() const { return t0_; }
  double t_end() const { return t_end_; }  // last reached time
  Status status() const { return status_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }
  IntegratorOptions::Method method() const { return method_; }
  const std::vector<double>& step_times() const { return ts_; }

  std::vector<double> at(double t) const;
  void at(double t, std::span<double> out) const;
  /// Max-norm of the state over step end points.
  double max_norm() const { return max_norm_; }

 private:
  friend Solution integrate(const OdeRhs&, double, std::vector<double>, double,
                            const IntegratorOptions&);
  int dim_ = 0;
  double t0_ = 0.0, t_end_ = 0.0;
  Status status_ = Status::Completed;
  long accepted_ = 0, rejected_ = 0;
  IntegratorOptions::Method method_ = IntegratorOptions::Method::Dopri5;
  double max_norm_ = 0.0;
  std::vector<double> ts_;     // step start times, then the final time
  std::vector<double> hs_;     // step sizes
  std::vector<double> coef_;   // 5 * dim per step
};

/// Deterministic integration of x' = rhs(t, x) on [t0, t1].
Solution integrate(const OdeRhs& rhs, double t0, std::vector<double> x0, double t1,
                   const IntegratorOptions& opts = {});

/// n + 1 equally spaced points on [a, b].
std::vector<double> linspace(double a, double b, int n);

// ---------------------------------------------------------------------------
// Cascade  w' = Q(w), x' = f(x) + theta(w) g(x)

/// The system with parameters bound to their values; every parameter must
/// have a value.
class CompiledSystem {
 public:
  CompiledSystem() = default;
  explicit CompiledSystem(const AffineSystem& sys);
  int n() const { return n_; }
  void drift(std::span<const double> x, double u, std::span<double> dx) const;
  double output(std::span<const double> x) const { return h_(x); }

 private:
  int n_ = 0;
  std::vector<CompiledExpr> f_, g_;
  CompiledExpr h_;
};

class CompiledExo {
 public:
  CompiledExo() = default;
  explicit CompiledExo(const Exosystem& exo);
  int m() const { return m_; }
  void field(std::span<const double> w, std::span<double> dw) const;
  double output(std::span<const double> w) const;

 private:
  int m_ = 0;
  bool linear_ = true;
  std::vector<double> q_, theta_;  // row-major m x m, m
  std::vector<CompiledExpr> qs_;
  CompiledExpr theta_s_;
};

class Cascade {
 public:
  Cascade(const AffineSystem& sys, const Exosystem& exo);
  int n() const { return sys_.n(); }
  int m() const { return exo_.m(); }
  /// State layout: (w, x).
  void rhs(std::span<const double> s, std::span<double> ds) const;
  OdeRhs ode() const;
  const CompiledSystem& system() const { return sys_; }
  const CompiledExo& exo() const { return exo_; }

 private:
  CompiledSystem sys_;
  CompiledExo exo_;
};

struct Trace {
  std::vector<double> t;
  std::vector<std::vector<double>> x, w;
  std::vector<double> u, y;
  std::string method;
  long accepted = 0, rejected = 0;
  bool bound_exceeded = false;

  void write_csv(const std::string& path) const;
  std::string csv() const;
};

Trace simulate(const Cascade& c, const std::vector<double>& x0, const std::vector<double>& w0,
               double horizon, int samples = 1000, const IntegratorOptions& opts = {});

// ---------------------------------------------------------------------------
// Adaptation

struct Trial {
  std::vector<double> x0;
  std::vector<double> w0;
};

struct TrialResult {
  Trial trial;
  bool pass = false;
  bool bounded = true;
  double max_y_final = 0.0;   // max |y| over the final 20% window
  double max_norm = 0.0;      // observed max-norm of x
  double horizon_used = 0.0;
  int extensions = 0;
  std::string reason;
};

struct AdaptationOptions {
  double horizon = 50.0;
  double tol_y = 1e-6;
  double bound = 1e6;
  int max_extensions = 3;
  int window_samples = 400;
  IntegratorOptions integrator{};
};

struct AdaptationReport {
  std::vector<TrialResult> trials;
  bool pass = false;
  double max_y_final = 0.0;
  double max_norm = 0.0;
  Grade grade = Grade::Failed;  // Sampled on pass
};

TrialResult run_adaptation_trial(const Cascade& c, const Trial& trial,
                                 const AdaptationOptions& opts);
/// Trials run concurrently (OpenMP, capped by IMK_THREADS); results are in
/// input order and identical to check_adaptation_serial.
AdaptationReport check_adaptation(const Cascade& c, const std::vector<Trial>& trials,
                                  const AdaptationOptions& opts = {});
AdaptationReport check_adaptation_serial(const Cascade& c, const std::vector<Trial>& trials,
                                         const AdaptationOptions& opts = {});

/// Every pair (x0, w0) of the two sets, x0 varying fastest.
std::vector<Trial> trial_product(const std::vector<std::vector<double>>& x0s,
                                 const std::vector<std::vector<double>>& w0s);

// ---------------------------------------------------------------------------
// Omega-limit sampling, output zeroing and reproduction checks

struct OmegaPoint {
  std::vector<double> w;
  std::vector<double> x;
  int visits = 0;
  double time = 0.0;  // latest visit
};

struct OmegaOptions {
  double horizon = 50.0;
  double transient_fraction = 0.5;
  double radius_scale = 1e-4;  // radius = scale * (1 + |x|)
  int samples = 2000;
  IntegratorOptions integrator{};
};

struct OmegaSample {
  std::vector<OmegaPoint> clusters;    // late-time cluster representatives
  std::vector<OmegaPoint> recurrent;   // points where w returns near w0
  double transient_fraction = 0.5;
  double radius_scale = 1e-4;
  std::string diagnostic;

  bool empty() const { return clusters.empty() && recurrent.empty(); }
  /// Recurrent candidates first, then clusters.
  std::vector<OmegaPoint> candidates() const;
};

OmegaSample omega_limit_sample(const Cascade& c, const std::vector<double>& x0,
                               const std::vector<double>& w0, const OmegaOptions& opts = {});

struct PointCheck {
  OmegaPoint point;
  double h_value = 0.0;
  double max_h_forward = 0.0;
  bool pass = false;
};

struct ZeroingVerdict {
  bool pass = false;
  Grade grade = Grade::Failed;  // Sampled on pass
  std::vector<PointCheck> points;
  std::string detail;
};

ZeroingVerdict verify_output_zeroing(const Cascade& c, const std::vector<OmegaPoint>& points,
                                     double tol, double horizon,
                                     const IntegratorOptions& opts = {});

struct ReproductionVerdict {
  bool pass = false;
  Grade grade = Grade::Failed;
  double max_deviation = 0.0;
  double worst_time = 0.0;
  std::string detail;
};

/// Integrates w' = Q(w) together with z2' = f2(z2) (variables z2 written as
/// x1..xk) and compares phi(z2(t)) with u(t) = theta(w(t)).
ReproductionVerdict verify_im_reproduction(const VectorField& f2, const Expr& phi,
                                           const ParamValues& params, const Exosystem& exo,
                                           const std::vector<double>& w0,
                                           const std::vector<double>& z2_0, double horizon,
                                           double tol, int samples = 2000,
                                           const IntegratorOptions& opts = {});

// ---------------------------------------------------------------------------
// Parallel helpers

/// Thread cap from IMK_THREADS (unset or invalid: OpenMP default).
int configured_threads();
/// Runs body(0..n-1); exceptions are rethrown after the loop (first index
/// wins).
void parallel_for(int n, const std::function<void(int)>& body, int threads = 0);
void serial_for(int n, const std::function<void(int)>& body);

}  // namespace imk
