#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "expr/rep.hpp"
#include "imk/error.hpp"

namespace imk {

using detail::Atom;
using detail::Monomial;
using detail::MPoly;

// ---------------------------------------------------------------------------
// Rationals

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw InvalidInput("empty number");
  if (s.find('/') != std::string::npos) {
    Rational q;
    if (q.set_str(s, 10) != 0) throw InvalidInput("bad rational literal '" + s + "'");
    if (q.get_den() == 0) throw InvalidInput("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
  }
  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') neg = (s[i++] == '-');
  std::string digits;
  long exp10 = 0;
  bool seen_dot = false;
  bool any = false;
  for (; i < s.size(); ++i) {
    char ch = s[i];
    if (ch >= '0' && ch <= '9') {
      digits.push_back(ch);
      any = true;
      if (seen_dot) --exp10;
    } else if (ch == '.' && !seen_dot) {
      seen_dot = true;
    } else if (ch == 'e' || ch == 'E') {
      try {
        std::size_t used = 0;
        long e = std::stol(s.substr(i + 1), &used);
        if (used != s.size() - i - 1) throw InvalidInput("bad exponent in '" + s + "'");
        exp10 += e;
      } catch (const std::logic_error&) {
        throw InvalidInput("bad exponent in '" + s + "'");
      }
      i = s.size();
      break;
    } else {
      throw InvalidInput("bad number '" + s + "'");
    }
  }
  if (!any) throw InvalidInput("bad number '" + s + "'");
  mpz_class mant(digits, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
  Rational q = exp10 >= 0 ? Rational(mant * scale) : Rational(mant, scale);
  q.canonicalize();
  return neg ? Rational(-q) : q;
}

std::string to_string(const Rational& q) { return q.get_str(10); }

Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw InvalidInput("non-finite number");
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return parse_rational(buf);
}

// ---------------------------------------------------------------------------
// Construction and arithmetic

namespace {

const Expr& zero_expr() {
  static const Expr z = detail::make_poly_expr(MPoly{});
  return z;
}

Expr from_atom(Atom a) { return detail::make_poly_expr(detail::poly_atom(a)); }

bool den_is_one(const Expr& e) { return detail::poly_is_one(e.rep().den); }

}  // namespace

Expr::Expr() : rep_(zero_expr().rep_) {}

Expr::Expr(long value) : Expr(Rational(value)) {}

Expr::Expr(const Rational& value)
    : rep_(std::make_shared<const detail::ExprRep>(
          detail::ExprRep{detail::poly_const(value), detail::poly_one()})) {}

Expr Expr::variable(int index) {
  if (index < 1) throw InvalidInput("variable index must be >= 1");
  Atom a;
  a.kind = Atom::Kind::Var;
  a.var = index;
  return from_atom(std::move(a));
}

Expr Expr::parameter(std::string name) {
  Atom a;
  a.kind = Atom::Kind::Param;
  a.name = std::move(name);
  return from_atom(std::move(a));
}

Expr Expr::call(Func fn, const Expr& arg) {
  if (auto c = arg.as_rational()) {
    switch (fn) {
      case Func::Exp: if (*c == 0) return Expr(1); break;
      case Func::Ln: if (*c == 1) return Expr(0); break;
      case Func::Sin: if (*c == 0) return Expr(0); break;
      case Func::Cos: if (*c == 0) return Expr(1); break;
    }
  }
  // ln(exp(u)) = u for real u.
  if (fn == Func::Ln && den_is_one(arg) && arg.rep().num.size() == 1) {
    const auto& [m, c] = *arg.rep().num.begin();
    if (c == 1 && m.size() == 1 && m[0].second == 1 && m[0].first.kind == Atom::Kind::Call &&
        m[0].first.fn == Func::Exp)
      return m[0].first.arg;
  }
  Atom a;
  a.kind = Atom::Kind::Call;
  a.fn = fn;
  a.arg = arg;
  return from_atom(std::move(a));
}

Expr exp(const Expr& e) { return Expr::call(Func::Exp, e); }
Expr ln(const Expr& e) { return Expr::call(Func::Ln, e); }
Expr sin(const Expr& e) { return Expr::call(Func::Sin, e); }
Expr cos(const Expr& e) { return Expr::call(Func::Cos, e); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (den_is_one(a) && den_is_one(b))
    return detail::make_poly_expr(detail::poly_add(a.rep().num, b.rep().num));
  if (detail::compare(a.rep().den, b.rep().den) == 0)
    return detail::make_expr(detail::poly_add(a.rep().num, b.rep().num), a.rep().den);
  MPoly num = detail::poly_add(detail::poly_mul(a.rep().num, b.rep().den),
                               detail::poly_mul(b.rep().num, a.rep().den));
  return detail::make_expr(std::move(num), detail::poly_mul(a.rep().den, b.rep().den));
}

Expr operator-(const Expr& a) {
  if (a.is_zero()) return a;
  return Expr(std::make_shared<const detail::ExprRep>(
      detail::ExprRep{detail::poly_scale(a.rep().num, Rational(-1)), a.rep().den}));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (den_is_one(a) && den_is_one(b))
    return detail::make_poly_expr(detail::poly_mul(a.rep().num, b.rep().num));
  return detail::make_expr(detail::poly_mul(a.rep().num, b.rep().num),
                           detail::poly_mul(a.rep().den, b.rep().den));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw DomainError("division by zero", to_string(a) + " / 0");
  if (a.is_zero()) return Expr();
  return detail::make_expr(detail::poly_mul(a.rep().num, b.rep().den),
                           detail::poly_mul(a.rep().den, b.rep().num));
}

Expr pow(const Expr& base, int exponent) {
  if (exponent < 0) return Expr(1) / pow(base, -exponent);
  Expr result(1);
  Expr sq = base;
  for (int k = exponent; k > 0; k >>= 1) {
    if (k & 1) result = result * sq;
    if (k > 1) sq = sq * sq;
  }
  return result;
}

bool operator==(const Expr& a, const Expr& b) { return detail::compare(a, b) == 0; }

std::strong_ordering operator<=>(const Expr& a, const Expr& b) {
  int c = detail::compare(a, b);
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

// ---------------------------------------------------------------------------
// Queries

namespace {

template <typename Pred>
bool any_atom(const Expr& e, Pred&& pred) {
  for (const MPoly* p : {&e.rep().num, &e.rep().den})
    for (const auto& [m, c] : *p)
      for (const auto& [atom, k] : m)
        if (pred(atom)) return true;
  return false;
}

template <typename Fn>
void for_each_atom(const Expr& e, Fn&& fn) {
  for (const MPoly* p : {&e.rep().num, &e.rep().den})
    for (const auto& [m, c] : *p)
      for (const auto& [atom, k] : m) fn(atom);
}

}  // namespace

bool Expr::is_zero() const { return rep_->num.empty(); }

std::optional<Rational> Expr::as_rational() const {
  if (rep_->num.empty()) return Rational(0);
  if (!detail::poly_is_one(rep_->den)) return std::nullopt;
  if (rep_->num.size() != 1 || !rep_->num.begin()->first.empty()) return std::nullopt;
  return rep_->num.begin()->second;
}

bool Expr::is_polynomial() const { return detail::poly_is_one(rep_->den); }

bool Expr::depends_on_state() const {
  return any_atom(*this, [](const Atom& a) {
    return a.kind == Atom::Kind::Var || (a.kind == Atom::Kind::Call && a.arg.depends_on_state());
  });
}

bool Expr::depends_on_variable(int index) const {
  return any_atom(*this, [index](const Atom& a) {
    return (a.kind == Atom::Kind::Var && a.var == index) ||
           (a.kind == Atom::Kind::Call && a.arg.depends_on_variable(index));
  });
}

int Expr::max_variable() const {
  int m = 0;
  for_each_atom(*this, [&m](const Atom& a) {
    if (a.kind == Atom::Kind::Var) m = std::max(m, a.var);
    if (a.kind == Atom::Kind::Call) m = std::max(m, a.arg.max_variable());
  });
  return m;
}

std::set<std::string> Expr::parameters() const {
  std::set<std::string> out;
  for_each_atom(*this, [&out](const Atom& a) {
    if (a.kind == Atom::Kind::Param) out.insert(a.name);
    if (a.kind == Atom::Kind::Call) out.merge(a.arg.parameters());
  });
  return out;
}

bool Expr::has_calls() const {
  return any_atom(*this, [](const Atom& a) { return a.kind == Atom::Kind::Call; });
}

// ---------------------------------------------------------------------------
// Atom-wise rewriting

namespace {

Expr monomial_expr(const Monomial& m) {
  MPoly p;
  p.emplace(m, Rational(1));
  return detail::make_poly_expr(std::move(p));
}

using AtomMap = std::function<Expr(const Atom&)>;

Expr map_poly(const MPoly& p, const AtomMap& f) {
  Expr acc;
  for (const auto& [m, c] : p) {
    Expr term(c);
    for (const auto& [atom, k] : m) term = term * pow(f(atom), k);
    acc = acc + term;
  }
  return acc;
}

Expr map_atoms(const Expr& e, const AtomMap& f) {
  Expr num = map_poly(e.rep().num, f);
  if (detail::poly_is_one(e.rep().den)) return num;
  return num / map_poly(e.rep().den, f);
}

Expr atom_expr(const Atom& a) { return from_atom(a); }

}  // namespace

Expr substitute(const Expr& e, const std::vector<Expr>& replacements) {
  AtomMap f = [&](const Atom& a) -> Expr {
    switch (a.kind) {
      case Atom::Kind::Var:
        if (a.var <= static_cast<int>(replacements.size())) return replacements[a.var - 1];
        return atom_expr(a);
      case Atom::Kind::Param: return atom_expr(a);
      case Atom::Kind::Call: return Expr::call(a.fn, substitute(a.arg, replacements));
    }
    return atom_expr(a);
  };
  return map_atoms(e, f);
}

Expr substitute_params(const Expr& e, const std::map<std::string, Rational>& values) {
  AtomMap f = [&](const Atom& a) -> Expr {
    switch (a.kind) {
      case Atom::Kind::Var: return atom_expr(a);
      case Atom::Kind::Param: {
        auto it = values.find(a.name);
        return it == values.end() ? atom_expr(a) : Expr(it->second);
      }
      case Atom::Kind::Call: return Expr::call(a.fn, substitute_params(a.arg, values));
    }
    return atom_expr(a);
  };
  return map_atoms(e, f);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr atom_derivative(const Atom& a, int index) {
  switch (a.kind) {
    case Atom::Kind::Var: return Expr(a.var == index ? 1 : 0);
    case Atom::Kind::Param: return Expr();
    case Atom::Kind::Call: {
      Expr du = differentiate(a.arg, index);
      if (du.is_zero()) return du;
      switch (a.fn) {
        case Func::Exp: return atom_expr(a) * du;
        case Func::Ln: return du / a.arg;
        case Func::Sin: return cos(a.arg) * du;
        case Func::Cos: return -(sin(a.arg) * du);
      }
    }
  }
  return Expr();
}

Expr differentiate_poly(const MPoly& p, int index) {
  Expr acc;
  for (const auto& [m, c] : p) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      const auto& [atom, k] = m[j];
      Expr da = atom_derivative(atom, index);
      if (da.is_zero()) continue;
      Monomial rest;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (i != j) rest.push_back(m[i]);
        else if (k > 1) rest.emplace_back(atom, k - 1);
      }
      acc = acc + Expr(c * k) * monomial_expr(rest) * da;
    }
  }
  return acc;
}

}  // namespace

Expr differentiate(const Expr& e, int index) {
  if (index < 1) throw InvalidInput("variable index must be >= 1");
  Expr dn = differentiate_poly(e.rep().num, index);
  if (detail::poly_is_one(e.rep().den)) return dn;
  Expr num = detail::make_poly_expr(e.rep().num);
  Expr den = detail::make_poly_expr(e.rep().den);
  Expr dd = differentiate_poly(e.rep().den, index);
  return (dn * den - num * dd) / (den * den);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string_view func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
  }
  return "?";
}

std::string atom_string(const Atom& a, const std::vector<std::string>& names) {
  switch (a.kind) {
    case Atom::Kind::Var:
      if (a.var <= static_cast<int>(names.size())) return names[a.var - 1];
      return "x" + std::to_string(a.var);
    case Atom::Kind::Param: return a.name;
    case Atom::Kind::Call:
      return std::string(func_name(a.fn)) + "(" + to_string(a.arg, names) + ")";
  }
  return "?";
}

std::string poly_string(const MPoly& p, const std::vector<std::string>& names) {
  if (p.empty()) return "0";
  std::vector<std::pair<const Monomial*, const Rational*>> terms;
  for (const auto& [m, c] : p) terms.emplace_back(&m, &c);
  // Highest total degree first; constant last.
  std::stable_sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) {
    return detail::total_degree(*x.first) > detail::total_degree(*y.first);
  });
  std::string out;
  bool first = true;
  for (const auto& [m, c] : terms) {
    std::string mono;
    for (const auto& [atom, k] : *m) {
      if (!mono.empty()) mono += "*";
      mono += atom_string(atom, names);
      if (k != 1) mono += "^" + std::to_string(k);
    }
    const bool neg = sgn(*c) < 0;
    const Rational mag = abs(*c);
    std::string term;
    if (mono.empty()) term = to_string(mag);
    else if (mag == 1) term = mono;
    else term = to_string(mag) + "*" + mono;
    if (first) out = neg ? "-" + term : term;
    else out += (neg ? " - " : " + ") + term;
    first = false;
  }
  return out;
}

bool single_atom_power(const MPoly& p) {
  return p.size() == 1 && p.begin()->first.size() == 1 && p.begin()->second == 1;
}

}  // namespace

std::string to_string(const Expr& e, const std::vector<std::string>& var_names) {
  const auto& r = e.rep();
  if (detail::poly_is_one(r.den)) return poly_string(r.num, var_names);
  std::string num = poly_string(r.num, var_names);
  std::string den = poly_string(r.den, var_names);
  if (r.num.size() > 1) num = "(" + num + ")";
  if (!single_atom_power(r.den)) den = "(" + den + ")";
  return num + "/" + den;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double eval_atom(const Atom& a, std::span<const double> x, const ParamValues& params,
                 const std::vector<std::string>& names) {
  switch (a.kind) {
    case Atom::Kind::Var:
      if (a.var > static_cast<int>(x.size()))
        throw InvalidInput("evaluation point lacks variable x" + std::to_string(a.var));
      return x[a.var - 1];
    case Atom::Kind::Param: {
      auto it = params.find(a.name);
      if (it == params.end()) throw InvalidInput("unbound parameter '" + a.name + "'");
      return it->second;
    }
    case Atom::Kind::Call: {
      const double u = eval(a.arg, x, params);
      switch (a.fn) {
        case Func::Exp: return std::exp(u);
        case Func::Ln:
          if (!(u > 0.0)) throw DomainError("ln of nonpositive value", atom_string(a, names));
          return std::log(u);
        case Func::Sin: return std::sin(u);
        case Func::Cos: return std::cos(u);
      }
    }
  }
  return 0.0;
}

double eval_poly(const MPoly& p, std::span<const double> x, const ParamValues& params) {
  double acc = 0.0;
  for (const auto& [m, c] : p) {
    double t = c.get_d();
    for (const auto& [atom, k] : m) t *= std::pow(eval_atom(atom, x, params, {}), k);
    acc += t;
  }
  return acc;
}

}  // namespace

double eval(const Expr& e, std::span<const double> x, const ParamValues& params) {
  const double num = eval_poly(e.rep().num, x, params);
  if (detail::poly_is_one(e.rep().den)) return num;
  const double den = eval_poly(e.rep().den, x, params);
  if (den == 0.0 || !std::isfinite(den))
    throw DomainError("division by zero", poly_string(e.rep().den, {}));
  return num / den;
}

// ---------------------------------------------------------------------------

std::optional<AffineForm> as_affine(const Expr& e, int n) {
  if (!detail::poly_is_one(e.rep().den)) {
    Expr den = detail::make_poly_expr(e.rep().den);
    if (den.depends_on_state()) return std::nullopt;
  }
  Expr inv_den = detail::poly_is_one(e.rep().den)
                     ? Expr(1)
                     : Expr(1) / detail::make_poly_expr(e.rep().den);
  AffineForm out;
  out.coeffs.assign(n, Expr());
  for (const auto& [m, c] : e.rep().num) {
    int var = 0;
    Monomial rest;
    for (const auto& [atom, k] : m) {
      if (atom.kind == Atom::Kind::Var) {
        if (k != 1 || var != 0 || atom.var > n) return std::nullopt;
        var = atom.var;
      } else {
        if (atom.kind == Atom::Kind::Call && atom.arg.depends_on_state()) return std::nullopt;
        rest.emplace_back(atom, k);
      }
    }
    Expr term = Expr(c) * monomial_expr(rest);
    if (var == 0) out.constant = out.constant + term;
    else out.coeffs[var - 1] = out.coeffs[var - 1] + term;
  }
  out.constant = out.constant * inv_den;
  for (auto& cf : out.coeffs) cf = cf * inv_den;
  return out;
}

}  // namespace imk
