#include <algorithm>
#include <cmath>
#include <cstdio>

#include "imk/sim.hpp"

namespace imk {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double max_abs_y(const Solution& sol, const Cascade& c, double a, double b, int samples) {
  std::vector<double> s(sol.dim());
  double m = 0.0;
  for (double t : linspace(a, b, samples)) {
    sol.at(t, s);
    m = std::max(m, std::abs(c.system().output(std::span<const double>(s).subspan(c.m()))));
  }
  return m;
}

double max_norm_x(const Solution& sol, const Cascade& c, double t_end, int samples) {
  std::vector<double> s(sol.dim());
  double m = 0.0;
  for (double t : linspace(0.0, t_end, samples)) {
    sol.at(t, s);
    for (int i = 0; i < c.n(); ++i) m = std::max(m, std::abs(s[c.m() + i]));
  }
  return m;
}

}  // namespace

TrialResult run_adaptation_trial(const Cascade& c, const Trial& trial,
                                 const AdaptationOptions& opts) {
  TrialResult r;
  r.trial = trial;
  if (static_cast<int>(trial.x0.size()) != c.n() || static_cast<int>(trial.w0.size()) != c.m()) {
    r.reason = "initial state has the wrong dimension";
    return r;
  }
  std::vector<double> s0 = trial.w0;
  s0.insert(s0.end(), trial.x0.begin(), trial.x0.end());
  IntegratorOptions io = opts.integrator;
  io.bound = opts.bound;

  double horizon = opts.horizon;
  for (;;) {
    r.horizon_used = horizon;
    Solution sol;
    try {
      sol = integrate(c.ode(), 0.0, s0, horizon, io);
    } catch (const Error& e) {
      r.pass = false;
      r.bounded = false;
      r.reason = std::string("integration failed: ") + e.what();
      return r;
    }
    r.max_norm = max_norm_x(sol, c, sol.t_end(), 8 * opts.window_samples);
    if (sol.status() == Solution::Status::BoundExceeded || r.max_norm > opts.bound) {
      r.pass = false;
      r.bounded = false;
      r.reason = "state norm exceeded the bound " + fmt(opts.bound) + " near t = " +
                 fmt(sol.t_end());
      return r;
    }
    r.max_y_final = max_abs_y(sol, c, 0.8 * horizon, horizon, opts.window_samples);
    if (r.max_y_final < opts.tol_y) {
      r.pass = true;
      r.reason = "max |y| on the final 20% window is " + fmt(r.max_y_final);
      return r;
    }
    const double prev = max_abs_y(sol, c, 0.6 * horizon, 0.8 * horizon, opts.window_samples);
    if (r.extensions < opts.max_extensions && prev > 2.0 * r.max_y_final) {
      ++r.extensions;
      horizon *= 2.0;
      continue;
    }
    r.pass = false;
    r.reason = "max |y| on the final 20% window is " + fmt(r.max_y_final) + " >= tol " +
               fmt(opts.tol_y);
    return r;
  }
}

namespace {

AdaptationReport summarize(std::vector<TrialResult> results) {
  AdaptationReport rep;
  rep.trials = std::move(results);
  rep.pass = !rep.trials.empty();
  for (const auto& t : rep.trials) {
    rep.pass = rep.pass && t.pass;
    rep.max_y_final = std::max(rep.max_y_final, t.max_y_final);
    rep.max_norm = std::max(rep.max_norm, t.max_norm);
  }
  rep.grade = rep.pass ? Grade::Sampled : Grade::Failed;
  return rep;
}

}  // namespace

AdaptationReport check_adaptation(const Cascade& c, const std::vector<Trial>& trials,
                                  const AdaptationOptions& opts) {
  if (trials.empty()) throw InvalidInput("adaptation check needs at least one trial");
  std::vector<TrialResult> results(trials.size());
  parallel_for(static_cast<int>(trials.size()),
               [&](int i) { results[i] = run_adaptation_trial(c, trials[i], opts); });
  return summarize(std::move(results));
}

AdaptationReport check_adaptation_serial(const Cascade& c, const std::vector<Trial>& trials,
                                         const AdaptationOptions& opts) {
  if (trials.empty()) throw InvalidInput("adaptation check needs at least one trial");
  std::vector<TrialResult> results(trials.size());
  serial_for(static_cast<int>(trials.size()),
             [&](int i) { results[i] = run_adaptation_trial(c, trials[i], opts); });
  return summarize(std::move(results));
}

std::vector<Trial> trial_product(const std::vector<std::vector<double>>& x0s,
                                 const std::vector<std::vector<double>>& w0s) {
  std::vector<Trial> out;
  for (const auto& w : w0s)
    for (const auto& x : x0s) out.push_back({x, w});
  return out;
}

}  // namespace imk
