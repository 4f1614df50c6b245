#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "imk/error.hpp"
#include "imk/linpoly.hpp"

namespace imk {

Poly::Poly(std::vector<Rational> ascending) : c_(std::move(ascending)) { trim(); }

Poly::Poly(std::initializer_list<long> ascending) {
  for (long v : ascending) c_.emplace_back(v);
  trim();
}

Poly Poly::from_doubles(const std::vector<double>& ascending) {
  std::vector<Rational> c;
  for (double v : ascending) {
    if (!std::isfinite(v)) throw InvalidInput("polynomial coefficient is not finite");
    c.emplace_back(v);
  }
  return Poly(std::move(c));
}

Poly Poly::constant(const Rational& c) { return Poly(std::vector<Rational>{c}); }

Poly Poly::monomial(int degree, const Rational& c) {
  std::vector<Rational> v(degree + 1);
  v[degree] = c;
  return Poly(std::move(v));
}

Poly Poly::from_roots(const std::vector<Rational>& roots) {
  Poly p{1};
  for (const auto& r : roots) p = p * Poly(std::vector<Rational>{-r, 1});
  return p;
}

void Poly::trim() {
  for (auto& v : c_) v.canonicalize();
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Rational Poly::coeff(int i) const {
  return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : Rational(0);
}

Rational Poly::lead() const { return c_.empty() ? Rational(0) : c_.back(); }

bool Poly::is_monic() const { return !c_.empty() && c_.back() == 1; }

Poly Poly::monic() const {
  if (c_.empty()) return *this;
  Rational l = c_.back();
  Poly out = *this;
  for (auto& v : out.c_) v /= l;
  return out;
}

Poly Poly::derivative() const {
  std::vector<Rational> d;
  for (std::size_t i = 1; i < c_.size(); ++i) d.push_back(c_[i] * static_cast<long>(i));
  return Poly(std::move(d));
}

Rational Poly::eval(const Rational& s) const {
  Rational acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Complex Poly::eval(Complex s) const {
  Complex acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + it->get_d();
  return acc;
}

std::vector<double> Poly::to_doubles() const {
  std::vector<double> out;
  for (const auto& v : c_) out.push_back(v.get_d());
  return out;
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.coeff(i) + b.coeff(i);
  return Poly(std::move(c));
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator-(const Poly& a) { return Rational(-1) * a; }

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  std::vector<Rational> c(a.c_.size() + b.c_.size() - 1);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return Poly(std::move(c));
}

Poly operator*(const Rational& k, const Poly& a) {
  std::vector<Rational> c = a.c_;
  for (auto& v : c) v *= k;
  return Poly(std::move(c));
}

std::string to_string(const Poly& p, char var) {
  if (p.is_zero()) return "0";
  std::string out;
  for (int i = p.degree(); i >= 0; --i) {
    Rational c = p.coeff(i);
    if (c == 0) continue;
    bool neg = c < 0;
    Rational m = neg ? Rational(-c) : c;
    if (out.empty())
      out += neg ? "-" : "";
    else
      out += neg ? " - " : " + ";
    std::string mono;
    if (i >= 1) mono = std::string(1, var) + (i > 1 ? "^" + std::to_string(i) : "");
    if (mono.empty())
      out += to_string(m);
    else if (m == 1)
      out += mono;
    else
      out += to_string(m) + "*" + mono;
  }
  return out;
}

std::pair<Poly, Poly> poly_divmod(const Poly& q, const Poly& p) {
  if (p.is_zero()) throw InvalidInput("polynomial division by the zero polynomial");
  std::vector<Rational> rem = q.coeffs();
  int dp = p.degree();
  int dq = q.degree();
  if (dq < dp) return {Poly(), q};
  std::vector<Rational> quot(dq - dp + 1);
  const Rational lp = p.lead();
  for (int k = dq - dp; k >= 0; --k) {
    Rational t = rem[k + dp] / lp;
    quot[k] = t;
    if (t == 0) continue;
    for (int j = 0; j <= dp; ++j) rem[k + j] -= t * p.coeff(j);
  }
  rem.resize(dp);
  return {Poly(std::move(quot)), Poly(std::move(rem))};
}

Poly poly_gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = poly_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

namespace {

// Parlett-Reinsch balancing with radix 2; similarity, so eigenvalues are kept.
void balance(Eigen::MatrixXd& a) {
  const double radix = 2.0, sqrdx = radix * radix;
  const int n = static_cast<int>(a.rows());
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0, s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        a.row(i) *= g;
        a.col(i) *= f;
      }
    }
  }
}

}  // namespace

std::vector<Complex> poly_roots(const Poly& p) {
  if (p.is_zero()) throw InvalidInput("roots of the zero polynomial are undefined");
  std::vector<Complex> roots;
  int shift = 0;
  while (p.coeff(shift) == 0) ++shift;
  roots.assign(shift, Complex(0.0, 0.0));
  const int n = p.degree() - shift;
  if (n >= 1) {
    const Rational lead = p.lead();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) c(0, j) = Rational(-p.coeff(shift + n - 1 - j) / lead).get_d();
    for (int i = 1; i < n; ++i) c(i, i - 1) = 1.0;
    balance(c);
    Eigen::EigenSolver<Eigen::MatrixXd> es(c, false);
    if (es.info() != Eigen::Success)
      throw NumericalFailure("companion eigenvalue iteration did not converge");
    for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()[i]);
  }
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

bool is_hurwitz(const Poly& p) {
  if (p.is_zero()) return false;
  const int n = p.degree();
  std::vector<Rational> d;
  for (int i = n; i >= 0; --i) d.push_back(p.coeff(i));
  if (d[0] < 0)
    for (auto& v : d) v = -v;
  std::vector<Rational> r0, r1;
  for (int i = 0; i <= n; i += 2) r0.push_back(d[i]);
  for (int i = 1; i <= n; i += 2) r1.push_back(d[i]);
  if (r0[0] <= 0) return false;
  for (int row = 1; row <= n; ++row) {
    if (r1.empty() || r1[0] <= 0) return false;
    std::vector<Rational> next;
    for (std::size_t i = 0; i + 1 < std::max(r0.size(), r1.size() + 1); ++i) {
      Rational a = i + 1 < r0.size() ? r0[i + 1] : Rational(0);
      Rational b = i + 1 < r1.size() ? r1[i + 1] : Rational(0);
      next.push_back((r1[0] * a - r0[0] * b) / r1[0]);
    }
    while (!next.empty() && next.back() == 0 && next.size() > 1) next.pop_back();
    r0 = std::move(r1);
    r1 = std::move(next);
    if (row == n) break;
  }
  return true;
}

RationalFn RationalFn::make(Poly num, Poly den) {
  if (den.is_zero()) throw InvalidInput("rational function with zero denominator");
  RationalFn r;
  if (num.is_zero()) {
    r.num = Poly();
    r.den = Poly{1};
    r.reduced = true;
    return r;
  }
  Poly g = poly_gcd(num, den);
  if (g.degree() > 0) {
    num = poly_divmod(num, g).first;
    den = poly_divmod(den, g).first;
  }
  Rational l = den.lead();
  r.num = Rational(1 / l) * num;
  r.den = den.monic();
  r.reduced = true;
  return r;
}

Complex RationalFn::eval(Complex s) const { return num.eval(s) / den.eval(s); }

RationalFn operator*(const RationalFn& a, const RationalFn& b) {
  return RationalFn::make(a.num * b.num, a.den * b.den);
}

std::string to_string(const RationalFn& r) {
  return "(" + to_string(r.num) + ")/(" + to_string(r.den) + ")";
}

}  // namespace imk
