#include <algorithm>
#include <cmath>
#include <cstdio>

#include "imk/exo.hpp"
#include "imk/sim.hpp"

namespace imk {

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double inf_dist(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

constexpr std::size_t kMaxClusters = 256;

// Greedy clustering, latest samples first so representatives are the most
// converged visits.
std::vector<OmegaPoint> cluster(const std::vector<OmegaPoint>& pts, double scale) {
  std::vector<OmegaPoint> reps;
  std::vector<std::vector<double>> keys;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    std::vector<double> key = it->w;
    key.insert(key.end(), it->x.begin(), it->x.end());
    bool joined = false;
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const double radius = scale * (1.0 + inf_norm(reps[k].x));
      if (inf_dist(key, keys[k]) <= radius) {
        ++reps[k].visits;
        joined = true;
        break;
      }
    }
    if (!joined && reps.size() < kMaxClusters) {
      OmegaPoint p = *it;
      p.visits = 1;
      reps.push_back(std::move(p));
      keys.push_back(std::move(key));
    }
  }
  std::vector<OmegaPoint> out;
  for (auto& r : reps)
    if (r.visits >= 3) out.push_back(std::move(r));
  return out;
}

OmegaPoint point_at(const Solution& sol, int m, double t) {
  std::vector<double> s = sol.at(t);
  OmegaPoint p;
  p.w.assign(s.begin(), s.begin() + m);
  p.x.assign(s.begin() + m, s.end());
  p.time = t;
  return p;
}

}  // namespace

std::vector<OmegaPoint> OmegaSample::candidates() const {
  std::vector<OmegaPoint> out = recurrent;
  out.insert(out.end(), clusters.begin(), clusters.end());
  return out;
}

OmegaSample omega_limit_sample(const Cascade& c, const std::vector<double>& x0,
                               const std::vector<double>& w0, const OmegaOptions& opts) {
  if (static_cast<int>(x0.size()) != c.n() || static_cast<int>(w0.size()) != c.m())
    throw InvalidInput("initial state has the wrong dimension");
  if (!(opts.transient_fraction >= 0.0 && opts.transient_fraction < 1.0))
    throw InvalidInput("transient fraction must lie in [0, 1)");
  OmegaSample out;
  out.transient_fraction = opts.transient_fraction;
  out.radius_scale = opts.radius_scale;

  std::vector<double> s0 = w0;
  s0.insert(s0.end(), x0.begin(), x0.end());
  const Solution sol = integrate(c.ode(), 0.0, s0, opts.horizon, opts.integrator);
  if (sol.status() == Solution::Status::BoundExceeded) {
    out.diagnostic = "trajectory left the state bound";
    return out;
  }
  const double t_start = opts.transient_fraction * opts.horizon;
  const std::vector<double> grid = linspace(t_start, opts.horizon, opts.samples);

  std::vector<OmegaPoint> late;
  late.reserve(grid.size());
  for (double t : grid) late.push_back(point_at(sol, c.m(), t));
  out.clusters = cluster(late, opts.radius_scale);

  // Times where w comes back near w0, refined on the dense output.
  const double w_radius = opts.radius_scale * (1.0 + inf_norm(w0));
  auto dist = [&](double t) {
    std::vector<double> s = sol.at(t);
    return inf_dist(std::span<const double>(s).first(c.m()), w0);
  };
  std::vector<double> d(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) d[k] = inf_dist(late[k].w, w0);
  std::vector<OmegaPoint> returns;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (d[k] <= w_radius) {
      returns.push_back(late[k]);
      continue;
    }
    if (k == 0 || k + 1 == grid.size() || !(d[k] <= d[k - 1] && d[k] < d[k + 1])) continue;
    // Golden-section search on [t_{k-1}, t_{k+1}].
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = grid[k - 1], b = grid[k + 1];
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = dist(x1), f2 = dist(x2);
    for (int it = 0; it < 80 && b - a > 1e-13 * std::max(1.0, b); ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = dist(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = dist(x2);
      }
    }
    const double tb = f1 < f2 ? x1 : x2;
    if (std::min(f1, f2) <= w_radius) returns.push_back(point_at(sol, c.m(), tb));
  }
  out.recurrent = cluster(returns, opts.radius_scale);
  if (out.empty()) out.diagnostic = "no recurrence found: no late state was revisited 3 times";
  return out;
}

ZeroingVerdict verify_output_zeroing(const Cascade& c, const std::vector<OmegaPoint>& points,
                                     double tol, double horizon, const IntegratorOptions& opts) {
  ZeroingVerdict v;
  if (points.empty()) {
    v.detail = "no candidate points";
    return v;
  }
  v.pass = true;
  for (const auto& p : points) {
    PointCheck pc;
    pc.point = p;
    pc.h_value = c.system().output(p.x);
    std::vector<double> s0 = p.w;
    s0.insert(s0.end(), p.x.begin(), p.x.end());
    try {
      const Solution sol = integrate(c.ode(), 0.0, s0, horizon, opts);
      std::vector<double> s(sol.dim());
      for (double t : linspace(0.0, sol.t_end(), 1000)) {
        sol.at(t, s);
        pc.max_h_forward = std::max(
            pc.max_h_forward, std::abs(c.system().output(std::span<const double>(s).subspan(c.m()))));
      }
      if (sol.status() == Solution::Status::BoundExceeded)
        pc.max_h_forward = std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      pc.max_h_forward = std::numeric_limits<double>::infinity();
    }
    pc.pass = std::abs(pc.h_value) < tol && pc.max_h_forward < 10.0 * tol;
    v.pass = v.pass && pc.pass;
    v.points.push_back(std::move(pc));
  }
  v.grade = v.pass ? Grade::Sampled : Grade::Failed;
  char buf[160];
  double worst = 0.0, worst_fwd = 0.0;
  for (const auto& p : v.points) {
    worst = std::max(worst, std::abs(p.h_value));
    worst_fwd = std::max(worst_fwd, p.max_h_forward);
  }
  std::snprintf(buf, sizeof buf, "max |h| at candidates %.3g, max |h| along re-integration %.3g",
                worst, worst_fwd);
  v.detail = buf;
  return v;
}

ReproductionVerdict verify_im_reproduction(const VectorField& f2, const Expr& phi,
                                           const ParamValues& params, const Exosystem& exo,
                                           const std::vector<double>& w0,
                                           const std::vector<double>& z2_0, double horizon,
                                           double tol, int samples,
                                           const IntegratorOptions& opts) {
  const int k = f2.dim();
  const int m = exo.m;
  if (static_cast<int>(z2_0.size()) != k) throw InvalidInput("z2_0 has the wrong dimension");
  if (static_cast<int>(w0.size()) != m) throw InvalidInput("w0 has the wrong dimension");
  CompiledExo ce(exo);
  std::vector<CompiledExpr> fz;
  for (const auto& e : f2.components) fz.emplace_back(e, params);
  CompiledExpr cphi(phi, params);

  OdeRhs rhs = [&](double, std::span<const double> s, std::span<double> ds) {
    ce.field(s.first(m), ds.first(m));
    auto z = s.subspan(m);
    for (int i = 0; i < k; ++i) ds[m + i] = fz[i](z);
  };
  std::vector<double> s0 = w0;
  s0.insert(s0.end(), z2_0.begin(), z2_0.end());
  ReproductionVerdict v;
  try {
    const Solution sol = integrate(rhs, 0.0, s0, horizon, opts);
    std::vector<double> s(m + k);
    for (double t : linspace(0.0, horizon, samples)) {
      sol.at(t, s);
      const double dev = std::abs(cphi(std::span<const double>(s).subspan(m)) -
                                  ce.output(std::span<const double>(s).first(m)));
      if (dev > v.max_deviation) {
        v.max_deviation = dev;
        v.worst_time = t;
      }
    }
  } catch (const Error& e) {
    v.pass = false;
    v.grade = Grade::Failed;
    v.detail = std::string("integration failed: ") + e.what();
    return v;
  }
  v.pass = v.max_deviation < tol;
  v.grade = v.pass ? Grade::Sampled : Grade::Failed;
  char buf[128];
  std::snprintf(buf, sizeof buf, "max |phi(z2(t)) - u(t)| = %.3g at t = %.6g", v.max_deviation,
                v.worst_time);
  v.detail = buf;
  return v;
}

}  // namespace imk
