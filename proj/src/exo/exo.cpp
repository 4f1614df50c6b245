#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "imk/error.hpp"
#include "imk/exo.hpp"
#include "imk/sim.hpp"

namespace imk {

Exosystem Exosystem::linear(RatMatrix Q, RatVector theta, std::string label) {
  const std::size_t m = Q.size();
  if (m == 0) throw InvalidInput("exosystem needs dimension >= 1");
  for (const auto& row : Q)
    if (row.size() != m) throw InvalidInput("exosystem Q must be square");
  if (theta.size() != m) throw InvalidInput("exosystem theta must have " + std::to_string(m) +
                                            " entries");
  Exosystem e;
  e.kind = Kind::Linear;
  e.m = static_cast<int>(m);
  e.Q = std::move(Q);
  e.theta = std::move(theta);
  e.label = std::move(label);
  return e;
}

Exosystem Exosystem::symbolic(VectorField Q, Expr theta, ParamValues params, std::string label) {
  const int m = Q.dim();
  if (m == 0) throw InvalidInput("exosystem needs dimension >= 1");
  for (const auto& c : Q.components)
    if (c.max_variable() > m) throw InvalidInput("exosystem field references w beyond w" +
                                                 std::to_string(m));
  if (theta.max_variable() > m) throw InvalidInput("exosystem output references w beyond w" +
                                                   std::to_string(m));
  Exosystem e;
  e.kind = Kind::Symbolic;
  e.m = m;
  e.field_s = std::move(Q);
  e.theta_s = std::move(theta);
  e.params = std::move(params);
  e.label = std::move(label);
  return e;
}

Poly Exosystem::characteristic() const {
  if (!is_linear()) throw InvalidInput("characteristic polynomial needs a linear exosystem");
  return characteristic_polynomial(Q);
}

Eigen::MatrixXd Exosystem::Q_double() const { return to_eigen(Q); }
Eigen::RowVectorXd Exosystem::theta_double() const { return to_eigen_row(theta); }

Exosystem from_ode_coeffs(const std::vector<Rational>& b) {
  const int l = static_cast<int>(b.size());
  if (l < 1) throw InvalidInput("ode_coeffs needs at least one coefficient");
  RatMatrix q(l, RatVector(l));
  for (int i = 0; i + 1 < l; ++i) q[i][i + 1] = 1;
  for (int j = 0; j < l; ++j) q[l - 1][j] = -b[l - 1 - j];
  RatVector theta(l);
  theta[0] = 1;
  return Exosystem::linear(std::move(q), std::move(theta), "ode_coeffs");
}

Exosystem constant_exosystem() {
  Exosystem e = from_ode_coeffs({Rational(0)});
  e.label = "constant";
  return e;
}

Exosystem harmonic_exosystem(const Rational& omega) {
  if (omega <= 0) throw InvalidInput("harmonic exosystem needs omega > 0");
  Exosystem e = from_ode_coeffs({Rational(0), omega * omega});
  e.label = "harmonic";
  return e;
}

namespace {

std::vector<Complex> eigenvalues(const Eigen::MatrixXd& q) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(q, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigenvalue iteration did not converge");
  std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + q.rows());
  std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return ev;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

ModesVerdict check_no_stable_modes(const Exosystem& exo, double eps) {
  if (!exo.is_linear()) throw InvalidInput("no-stable-modes check needs a linear exosystem");
  ModesVerdict v;
  v.eigenvalues = eigenvalues(exo.Q_double());
  v.ok = std::all_of(v.eigenvalues.begin(), v.eigenvalues.end(),
                     [&](Complex l) { return l.real() >= -eps; });
  return v;
}

Grade PoissonVerdict::grade() const {
  switch (status) {
    case Status::Proven: return Grade::Proven;
    case Status::Sampled: return Grade::Sampled;
    case Status::Unknown: return Grade::Unknown;
    case Status::ProvenNot: return Grade::Failed;
  }
  return Grade::Unknown;
}

std::string_view to_string(PoissonVerdict::Status s) {
  switch (s) {
    case PoissonVerdict::Status::Proven: return "Proven";
    case PoissonVerdict::Status::ProvenNot: return "ProvenNot";
    case PoissonVerdict::Status::Sampled: return "Sampled";
    case PoissonVerdict::Status::Unknown: return "Unknown";
  }
  return "Unknown";
}

PoissonVerdict check_poisson_stable(const Exosystem& exo, double horizon, double delta,
                                    std::uint64_t seed, double eps) {
  PoissonVerdict v;
  if (exo.is_linear()) {
    const Eigen::MatrixXd q = exo.Q_double();
    v.eigenvalues = eigenvalues(q);
    for (Complex l : v.eigenvalues)
      if (std::abs(l.real()) > eps) {
        v.status = PoissonVerdict::Status::ProvenNot;
        v.detail = "eigenvalue with nonzero real part " + std::to_string(l.real());
        return v;
      }
    const int m = exo.m;
    const double qnorm = Eigen::JacobiSVD<Eigen::MatrixXd>(q).singularValues()(0);
    const double thresh = 1e-8 * qnorm;
    // Cluster numerically repeated eigenvalues, then compare geometric and
    // algebraic multiplicity.
    std::vector<bool> used(v.eigenvalues.size(), false);
    for (std::size_t i = 0; i < v.eigenvalues.size(); ++i) {
      if (used[i]) continue;
      Complex sum = 0;
      int mult = 0;
      for (std::size_t j = i; j < v.eigenvalues.size(); ++j)
        if (!used[j] &&
            std::abs(v.eigenvalues[j] - v.eigenvalues[i]) <= 1e-5 * std::max(1.0, std::abs(v.eigenvalues[i]))) {
          used[j] = true;
          sum += v.eigenvalues[j];
          ++mult;
        }
      const Complex lambda(0.0, (sum / static_cast<double>(mult)).imag());
      Eigen::MatrixXcd shifted = q.cast<Complex>();
      shifted.diagonal().array() -= lambda;
      const auto sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(shifted).singularValues();
      int rank = 0;
      for (int k = 0; k < sv.size(); ++k)
        if (sv(k) > thresh) ++rank;
      if (m - rank < mult) {
        v.status = PoissonVerdict::Status::ProvenNot;
        v.detail = "defective imaginary eigenvalue " + std::to_string(lambda.imag()) +
                   "i (multiplicity " + std::to_string(mult) + ", eigenspace dimension " +
                   std::to_string(m - rank) + ")";
        return v;
      }
    }
    v.status = PoissonVerdict::Status::Proven;
    v.detail = "purely imaginary semisimple spectrum";
    return v;
  }

  // Symbolic: sampled recurrence.
  CompiledExo ce(exo);
  OdeRhs rhs = [&ce](double, std::span<const double> w, std::span<double> dw) { ce.field(w, dw); };
  std::mt19937_64 rng(seed);
  const int trials = 4;
  bool all_return = true;
  for (int k = 0; k < trials; ++k) {
    std::vector<double> w0(exo.m);
    for (double& x : w0) x = -1.0 + 2.0 * unit(rng);
    double best = std::numeric_limits<double>::infinity();
    try {
      Solution sol = integrate(rhs, 0.0, w0, horizon);
      for (double t : linspace(horizon / 2, horizon, 4000)) {
        std::vector<double> w = sol.at(t);
        double d = 0.0;
        for (int i = 0; i < exo.m; ++i) d = std::max(d, std::abs(w[i] - w0[i]));
        best = std::min(best, d);
      }
    } catch (const NumericalFailure& e) {
      v.status = PoissonVerdict::Status::Unknown;
      v.detail = std::string("integration failed: ") + e.what();
      return v;
    } catch (const DomainError& e) {
      v.status = PoissonVerdict::Status::Unknown;
      v.detail = std::string("integration failed: ") + e.what();
      return v;
    }
    v.return_distances.push_back(best);
    if (!(best < delta)) all_return = false;
  }
  v.status = all_return ? PoissonVerdict::Status::Sampled : PoissonVerdict::Status::Unknown;
  v.detail = all_return ? "every sampled trajectory returned within delta"
                        : "some sampled trajectory did not return within delta";
  return v;
}

InputSignal generate_input(const Exosystem& exo, const std::vector<double>& w0, double horizon,
                           double step) {
  if (static_cast<int>(w0.size()) != exo.m)
    throw InvalidInput("w0 must have " + std::to_string(exo.m) + " entries");
  if (!(horizon > 0) || !(step > 0)) throw InvalidInput("horizon and step must be positive");
  const int n = std::max(1, static_cast<int>(std::llround(horizon / step)));
  InputSignal s;
  s.t = linspace(0.0, horizon, n);
  if (exo.is_linear()) {
    const Eigen::MatrixXd q = exo.Q_double();
    const Eigen::RowVectorXd th = exo.theta_double();
    const Eigen::VectorXd w0v = Eigen::Map<const Eigen::VectorXd>(w0.data(), exo.m);
    for (double t : s.t) {
      Eigen::MatrixXd e = (q * t).exp();
      Eigen::VectorXd w = e * w0v;
      s.w.emplace_back(w.data(), w.data() + exo.m);
      s.u.push_back(th * w);
    }
    return s;
  }
  CompiledExo ce(exo);
  OdeRhs rhs = [&ce](double, std::span<const double> w, std::span<double> dw) { ce.field(w, dw); };
  Solution sol = integrate(rhs, 0.0, w0, horizon);
  for (double t : s.t) {
    s.w.push_back(sol.at(t));
    s.u.push_back(ce.output(s.w.back()));
  }
  return s;
}

}  // namespace imk
