#include <cstdio>
#include <fstream>

#include "imk/exo.hpp"
#include "imk/sim.hpp"

namespace imk {

CompiledSystem::CompiledSystem(const AffineSystem& sys) : n_(sys.n) {
  const ParamValues p = sys.numeric_params();
  for (int i = 0; i < n_; ++i) {
    f_.emplace_back(sys.f[i], p);
    g_.emplace_back(sys.g[i], p);
  }
  h_ = CompiledExpr(sys.h, p);
}

void CompiledSystem::drift(std::span<const double> x, double u, std::span<double> dx) const {
  for (int i = 0; i < n_; ++i) dx[i] = f_[i](x) + u * g_[i](x);
}

CompiledExo::CompiledExo(const Exosystem& exo) : m_(exo.m), linear_(exo.is_linear()) {
  if (linear_) {
    q_.resize(m_ * m_);
    theta_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      theta_[i] = exo.theta[i].get_d();
      for (int j = 0; j < m_; ++j) q_[i * m_ + j] = exo.Q[i][j].get_d();
    }
  } else {
    for (const auto& c : exo.field_s.components) qs_.emplace_back(c, exo.params);
    theta_s_ = CompiledExpr(exo.theta_s, exo.params);
  }
}

void CompiledExo::field(std::span<const double> w, std::span<double> dw) const {
  if (linear_) {
    for (int i = 0; i < m_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < m_; ++j) acc += q_[i * m_ + j] * w[j];
      dw[i] = acc;
    }
  } else {
    for (int i = 0; i < m_; ++i) dw[i] = qs_[i](w);
  }
}

double CompiledExo::output(std::span<const double> w) const {
  if (!linear_) return theta_s_(w);
  double acc = 0.0;
  for (int i = 0; i < m_; ++i) acc += theta_[i] * w[i];
  return acc;
}

Cascade::Cascade(const AffineSystem& sys, const Exosystem& exo) : sys_(sys), exo_(exo) {}

void Cascade::rhs(std::span<const double> s, std::span<double> ds) const {
  const int m = exo_.m();
  auto w = s.first(m);
  exo_.field(w, ds.first(m));
  sys_.drift(s.subspan(m), exo_.output(w), ds.subspan(m));
}

OdeRhs Cascade::ode() const {
  return [this](double, std::span<const double> s, std::span<double> ds) { rhs(s, ds); };
}

Trace simulate(const Cascade& c, const std::vector<double>& x0, const std::vector<double>& w0,
               double horizon, int samples, const IntegratorOptions& opts) {
  if (static_cast<int>(x0.size()) != c.n()) throw InvalidInput("x0 has the wrong dimension");
  if (static_cast<int>(w0.size()) != c.m()) throw InvalidInput("w0 has the wrong dimension");
  std::vector<double> s0 = w0;
  s0.insert(s0.end(), x0.begin(), x0.end());
  Solution sol = integrate(c.ode(), 0.0, s0, horizon, opts);
  Trace tr;
  tr.method = opts.method == IntegratorOptions::Method::Dopri5 ? "dopri5" : "rk4";
  tr.accepted = sol.accepted();
  tr.rejected = sol.rejected();
  tr.bound_exceeded = sol.status() == Solution::Status::BoundExceeded;
  const double t_end = sol.t_end();
  std::vector<double> s(c.m() + c.n());
  for (double t : linspace(0.0, horizon, samples)) {
    if (t > t_end) break;
    sol.at(t, s);
    std::vector<double> w(s.begin(), s.begin() + c.m()), x(s.begin() + c.m(), s.end());
    tr.t.push_back(t);
    tr.u.push_back(c.exo().output(w));
    tr.y.push_back(c.system().output(x));
    tr.w.push_back(std::move(w));
    tr.x.push_back(std::move(x));
  }
  return tr;
}

std::string Trace::csv() const {
  std::string out = "t";
  const std::size_t n = x.empty() ? 0 : x[0].size();
  const std::size_t m = w.empty() ? 0 : w[0].size();
  for (std::size_t i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (std::size_t i = 1; i <= m; ++i) out += ",w" + std::to_string(i);
  out += ",u,y\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  };
  for (std::size_t k = 0; k < t.size(); ++k) {
    put(t[k]);
    for (double v : x[k]) out += ',', put(v);
    for (double v : w[k]) out += ',', put(v);
    out += ',';
    put(u[k]);
    out += ',';
    put(y[k]);
    out += '\n';
  }
  return out;
}

void Trace::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write trace file " + path);
  f << csv();
}

}  // namespace imk
