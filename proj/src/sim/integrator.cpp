#include <algorithm>
#include <cmath>

#include "imk/sim.hpp"

namespace imk {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output (Hairer & Wanner, contd5).
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = (i == n) ? b : a + (b - a) * i / n;
  return out;
}

void Solution::at(double t, std::span<double> out) const {
  const int n = dim_;
  std::size_t k;
  if (t <= ts_.front())
    k = 0;
  else if (t >= ts_[hs_.size()])
    k = hs_.size() - 1;
  else
    k = std::upper_bound(ts_.begin(), ts_.begin() + hs_.size(), t) - ts_.begin() - 1;
  const double th = (t - ts_[k]) / hs_[k];
  const double th1 = 1.0 - th;
  const double* r = coef_.data() + 5 * n * k;
  for (int i = 0; i < n; ++i)
    out[i] = r[i] + th * (r[n + i] + th1 * (r[2 * n + i] + th * (r[3 * n + i] + th1 * r[4 * n + i])));
}

std::vector<double> Solution::at(double t) const {
  std::vector<double> out(dim_);
  at(t, out);
  return out;
}

Solution integrate(const OdeRhs& rhs, double t0, std::vector<double> x0, double t1,
                   const IntegratorOptions& opts) {
  if (!(t1 > t0)) throw InvalidInput("integration horizon must be positive");
  const int n = static_cast<int>(x0.size());
  Solution sol;
  sol.dim_ = n;
  sol.t0_ = t0;
  sol.method_ = opts.method;
  sol.ts_.push_back(t0);
  sol.max_norm_ = max_abs(x0);

  std::vector<double> y = std::move(x0), y1(n), tmp(n), err(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  double t = t0;
  rhs(t, y, k1);
  if (!all_finite(k1) || !all_finite(y)) throw DivergenceError("non-finite initial state", t, y);

  auto store = [&](double h, std::span<const double> ya, std::span<const double> yb,
                   std::span<const double> fa, std::span<const double> fb,
                   const double* dense5) {
    const std::size_t base = sol.coef_.size();
    sol.coef_.resize(base + 5 * n);
    double* r = sol.coef_.data() + base;
    for (int i = 0; i < n; ++i) {
      const double ydiff = yb[i] - ya[i];
      const double bspl = h * fa[i] - ydiff;
      r[i] = ya[i];
      r[n + i] = ydiff;
      r[2 * n + i] = bspl;
      r[3 * n + i] = ydiff - h * fb[i] - bspl;
      r[4 * n + i] = dense5 ? dense5[i] : 0.0;
    }
    sol.hs_.push_back(h);
  };

  auto finish_step = [&](double h) -> bool {
    sol.ts_.push_back(t);
    sol.max_norm_ = std::max(sol.max_norm_, max_abs(y));
    if (max_abs(y) > opts.bound) {
      sol.status_ = Solution::Status::BoundExceeded;
      return true;
    }
    (void)h;
    return false;
  };

  if (opts.method == IntegratorOptions::Method::Rk4) {
    const long steps = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / opts.fixed_step - 1e-9)));
    const double h = (t1 - t0) / steps;
    for (long s = 0; s < steps; ++s) {
      for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      rhs(t + 0.5 * h, tmp, k2);
      for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      rhs(t + 0.5 * h, tmp, k3);
      for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
      rhs(t + h, tmp, k4);
      for (int i = 0; i < n; ++i) y1[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      if (!all_finite(y1)) throw DivergenceError("non-finite state", t, y);
      const double tn = (s + 1 == steps) ? t1 : t0 + (s + 1) * h;
      rhs(tn, y1, k7);
      store(h, y, y1, k1, k7, nullptr);
      y.swap(y1);
      k1.swap(k7);
      t = tn;
      ++sol.accepted_;
      if (finish_step(h)) break;
    }
    sol.t_end_ = t;
    return sol;
  }

  auto scale = [&](double a, double b) {
    return opts.atol + opts.rtol * std::max(std::abs(a), std::abs(b));
  };

  double h = opts.initial_step;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic.
    double d0 = 0.0, d1n = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sk = scale(y[i], y[i]);
      d0 += (y[i] / sk) * (y[i] / sk);
      d1n += (k1[i] / sk) * (k1[i] / sk);
    }
    d0 = std::sqrt(d0 / std::max(n, 1));
    d1n = std::sqrt(d1n / std::max(n, 1));
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h0 = std::min(h0, t1 - t0);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h0 * k1[i];
    rhs(t + h0, tmp, k2);
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sk = scale(y[i], y[i]);
      d2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    d2 = std::sqrt(d2 / std::max(n, 1)) / h0;
    const double dm = std::max(d1n, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100 * h0, h1);
  }
  h = std::min(h, t1 - t0);

  std::vector<double> dense(n);
  long steps = 0;
  while (t < t1) {
    if (++steps > opts.max_steps) throw DivergenceError("step budget exhausted", t, y);
    bool last = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    const double hmin = 1e-14 * std::max(1.0, std::abs(t));
    if (h < hmin) throw DivergenceError("step size underflow", t, y);

    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, tmp, k2);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, tmp, k3);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, tmp, k4);
    for (int i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, tmp, k5);
    for (int i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, tmp, k6);
    for (int i = 0; i < n; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    rhs(t + h, y1, k7);

    double en = 0.0;
    bool finite = all_finite(y1) && all_finite(k7);
    if (finite) {
      for (int i = 0; i < n; ++i) {
        err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double r = err[i] / scale(y[i], y1[i]);
        en += r * r;
      }
      en = std::sqrt(en / std::max(n, 1));
    }
    if (!finite || !std::isfinite(en)) {
      ++sol.rejected_;
      h *= 0.2;
      continue;
    }
    if (en <= 1.0) {
      for (int i = 0; i < n; ++i)
        dense[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      store(h, y, y1, k1, k7, dense.data());
      t = last ? t1 : t + h;
      y.swap(y1);
      k1.swap(k7);
      ++sol.accepted_;
      if (finish_step(h)) break;
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++sol.rejected_;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
    }
  }
  sol.t_end_ = t;
  return sol;
}

}  // namespace imk
