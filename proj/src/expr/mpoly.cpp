#include <algorithm>
#include <cassert>
#include <optional>

#include "expr/rep.hpp"

namespace imk::detail {

namespace {

int sign_of(int v) { return (v > 0) - (v < 0); }

int compare_rational(const Rational& a, const Rational& b) { return sign_of(cmp(a, b)); }

}  // namespace

int compare(const Atom& a, const Atom& b) {
  if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind) ? -1 : 1;
  switch (a.kind) {
    case Atom::Kind::Var: return sign_of(a.var - b.var);
    case Atom::Kind::Param: return sign_of(a.name.compare(b.name));
    case Atom::Kind::Call:
      if (a.fn != b.fn) return static_cast<int>(a.fn) < static_cast<int>(b.fn) ? -1 : 1;
      return compare(a.arg, b.arg);
  }
  return 0;
}

int compare(const Monomial& a, const Monomial& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i].first, b[i].first); c != 0) return c;
    if (a[i].second != b[i].second) return a[i].second < b[i].second ? -1 : 1;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

bool MonoLess::operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }

int compare(const MPoly& a, const MPoly& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (int c = compare(ia->first, ib->first); c != 0) return c;
    if (int c = compare_rational(ia->second, ib->second); c != 0) return c;
  }
  if (ia == a.end() && ib == b.end()) return 0;
  return ia == a.end() ? -1 : 1;
}

int compare(const Expr& a, const Expr& b) {
  if (&a.rep() == &b.rep()) return 0;
  if (int c = compare(a.rep().num, b.rep().num); c != 0) return c;
  return compare(a.rep().den, b.rep().den);
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    int c = compare(a[i].first, b[j].first);
    if (c < 0) {
      out.push_back(a[i++]);
    } else if (c > 0) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j) out.push_back(b[j]);
  return out;
}

int total_degree(const Monomial& m) {
  int d = 0;
  for (const auto& [atom, k] : m) d += k;
  return d;
}

MPoly poly_one() { return poly_const(Rational(1)); }

MPoly poly_const(const Rational& c) {
  MPoly p;
  if (c != 0) p.emplace(Monomial{}, c);
  return p;
}

MPoly poly_atom(const Atom& a) {
  MPoly p;
  p.emplace(Monomial{{a, 1}}, Rational(1));
  return p;
}

bool poly_is_one(const MPoly& p) {
  return p.size() == 1 && p.begin()->first.empty() && p.begin()->second == 1;
}

namespace {

void accumulate(MPoly& acc, const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = acc.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) acc.erase(it);
  }
}

}  // namespace

MPoly poly_add(const MPoly& a, const MPoly& b) {
  MPoly out = a;
  for (const auto& [m, c] : b) accumulate(out, m, c);
  return out;
}

MPoly poly_sub(const MPoly& a, const MPoly& b) {
  MPoly out = a;
  for (const auto& [m, c] : b) accumulate(out, m, -c);
  return out;
}

MPoly poly_mul(const MPoly& a, const MPoly& b) {
  MPoly out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) accumulate(out, mono_mul(ma, mb), ca * cb);
  return out;
}

MPoly poly_scale(const MPoly& a, const Rational& c) {
  if (c == 0) return {};
  MPoly out;
  for (const auto& [m, v] : a) out.emplace_hint(out.end(), m, v * c);
  return out;
}

// ---------------------------------------------------------------------------
// Dense exponent-vector polynomials for gcd computation. Variables are the
// sorted union of atoms of the operands; lexicographic order on exponent
// vectors is a monomial order, so the leading term is the last map entry.

namespace {

using Exps = std::vector<int>;
using DPoly = std::map<Exps, Rational>;

void dacc(DPoly& p, const Exps& e, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = p.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

DPoly dconst(int nvars, const Rational& c) {
  DPoly p;
  if (c != 0) p.emplace(Exps(nvars, 0), c);
  return p;
}

bool dis_const(const DPoly& p) {
  if (p.empty()) return true;
  if (p.size() != 1) return false;
  const auto& e = p.begin()->first;
  return std::all_of(e.begin(), e.end(), [](int k) { return k == 0; });
}

DPoly dsub(const DPoly& a, const DPoly& b) {
  DPoly out = a;
  for (const auto& [e, c] : b) dacc(out, e, -c);
  return out;
}

DPoly dmul(const DPoly& a, const DPoly& b) {
  DPoly out;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      Exps e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      dacc(out, e, ca * cb);
    }
  }
  return out;
}

DPoly dscale(const DPoly& a, const Rational& c) {
  DPoly out;
  if (c == 0) return out;
  for (const auto& [e, v] : a) out.emplace_hint(out.end(), e, v * c);
  return out;
}

DPoly dmonic(const DPoly& a) {
  if (a.empty()) return a;
  Rational lc = a.rbegin()->second;
  if (lc == 1) return a;
  return dscale(a, Rational(1) / lc);
}

std::optional<DPoly> dexact_div(const DPoly& a, const DPoly& b) {
  assert(!b.empty());
  DPoly q;
  DPoly r = a;
  const auto& [lb_e, lb_c] = *b.rbegin();
  while (!r.empty()) {
    const auto [lr_e, lr_c] = *r.rbegin();
    Exps e(lr_e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      e[i] = lr_e[i] - lb_e[i];
      if (e[i] < 0) return std::nullopt;
    }
    Rational c = lr_c / lb_c;
    dacc(q, e, c);
    DPoly t;
    t.emplace(e, c);
    r = dsub(r, dmul(t, b));
  }
  return q;
}

int ddeg(const DPoly& a, int v) {
  int d = 0;
  for (const auto& [e, c] : a) d = std::max(d, e[v]);
  return d;
}

// Coefficient of x_v^k, as a polynomial with x_v removed (exponent 0).
DPoly dcoeff(const DPoly& a, int v, int k) {
  DPoly out;
  for (const auto& [e, c] : a) {
    if (e[v] != k) continue;
    Exps f = e;
    f[v] = 0;
    out.emplace(std::move(f), c);
  }
  return out;
}

DPoly dshift(const DPoly& a, int v, int k) {
  DPoly out;
  for (const auto& [e, c] : a) {
    Exps f = e;
    f[v] += k;
    out.emplace(std::move(f), c);
  }
  return out;
}

DPoly dgcd(const DPoly& a, const DPoly& b, int nv);

// gcd of the coefficients of a viewed as a polynomial in x_v.
DPoly dcontent(const DPoly& a, int v, int nv) {
  const int d = ddeg(a, v);
  DPoly g;
  for (int k = d; k >= 0; --k) {
    DPoly c = dcoeff(a, v, k);
    if (c.empty()) continue;
    g = g.empty() ? dmonic(c) : dgcd(g, c, nv - 1);
    if (dis_const(g)) break;
  }
  return g;
}

DPoly dprem(const DPoly& a, const DPoly& b, int v) {
  const int db = ddeg(b, v);
  const DPoly lcb = dcoeff(b, v, db);
  DPoly r = a;
  while (!r.empty() && ddeg(r, v) >= db) {
    const int dr = ddeg(r, v);
    const DPoly lcr = dcoeff(r, v, dr);
    r = dsub(dmul(lcb, r), dmul(lcr, dshift(b, v, dr - db)));
  }
  return r;
}

DPoly dprimitive(const DPoly& a, int v, int nv) {
  if (a.empty()) return a;
  DPoly c = dcontent(a, v, nv);
  auto q = dexact_div(a, c);
  assert(q);
  return dmonic(*q);
}

// gcd over Q[x_0..x_{nv-1}], monic under lex order. Variables >= nv are
// assumed absent.
DPoly dgcd(const DPoly& a, const DPoly& b, int nv) {
  if (a.empty()) return dmonic(b);
  if (b.empty()) return dmonic(a);
  const int nvars = static_cast<int>(a.begin()->first.size());
  if (nv == 0 || dis_const(a) || dis_const(b)) return dconst(nvars, Rational(1));
  const int v = nv - 1;
  if (ddeg(a, v) == 0 && ddeg(b, v) == 0) return dgcd(a, b, nv - 1);

  DPoly ca = dcontent(a, v, nv);
  DPoly cb = dcontent(b, v, nv);
  DPoly c = dgcd(ca, cb, nv - 1);

  DPoly p = dmonic(*dexact_div(a, ca));
  DPoly q = dmonic(*dexact_div(b, cb));
  if (ddeg(p, v) < ddeg(q, v)) std::swap(p, q);
  while (!q.empty() && ddeg(q, v) > 0) {
    DPoly r = dprem(p, q, v);
    p = std::move(q);
    q = dprimitive(r, v, nv);
  }
  // q nonzero of degree 0 in v means the primitive parts are coprime.
  DPoly g = q.empty() ? dprimitive(p, v, nv) : dconst(nvars, Rational(1));
  return dmonic(dmul(c, g));
}

std::vector<Atom> collect_atoms(const MPoly& a, const MPoly& b) {
  std::vector<Atom> atoms;
  auto add = [&](const MPoly& p) {
    for (const auto& [m, c] : p)
      for (const auto& [atom, k] : m) atoms.push_back(atom);
  };
  add(a);
  add(b);
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& x, const Atom& y) { return compare(x, y) < 0; });
  atoms.erase(std::unique(atoms.begin(), atoms.end(),
                          [](const Atom& x, const Atom& y) { return compare(x, y) == 0; }),
              atoms.end());
  return atoms;
}

DPoly to_dense(const MPoly& p, const std::vector<Atom>& atoms) {
  DPoly out;
  const int n = static_cast<int>(atoms.size());
  for (const auto& [m, c] : p) {
    Exps e(n, 0);
    std::size_t j = 0;
    for (const auto& [atom, k] : m) {
      while (compare(atoms[j], atom) != 0) ++j;
      e[j] = k;
    }
    out.emplace(std::move(e), c);
  }
  return out;
}

MPoly from_dense(const DPoly& p, const std::vector<Atom>& atoms) {
  MPoly out;
  for (const auto& [e, c] : p) {
    Monomial m;
    for (std::size_t j = 0; j < e.size(); ++j)
      if (e[j] > 0) m.emplace_back(atoms[j], e[j]);
    out.emplace(std::move(m), c);
  }
  return out;
}

}  // namespace

ExprRep reduce(MPoly num, MPoly den) {
  assert(!den.empty());
  if (num.empty()) return {MPoly{}, poly_one()};
  if (den.size() == 1 && den.begin()->first.empty()) {
    const Rational c = den.begin()->second;
    if (c != 1) num = poly_scale(num, Rational(1) / c);
    return {std::move(num), poly_one()};
  }
  const std::vector<Atom> atoms = collect_atoms(num, den);
  const int nv = static_cast<int>(atoms.size());
  DPoly dn = to_dense(num, atoms);
  DPoly dd = to_dense(den, atoms);
  DPoly g = dgcd(dn, dd, nv);
  if (!dis_const(g)) {
    dn = *dexact_div(dn, g);
    dd = *dexact_div(dd, g);
  }
  const Rational lc = dd.rbegin()->second;
  if (lc != 1) {
    const Rational inv = Rational(1) / lc;
    dn = dscale(dn, inv);
    dd = dscale(dd, inv);
  }
  return {from_dense(dn, atoms), from_dense(dd, atoms)};
}

Expr make_expr(MPoly num, MPoly den) {
  return Expr(std::make_shared<const ExprRep>(reduce(std::move(num), std::move(den))));
}

Expr make_poly_expr(MPoly num) {
  return Expr(std::make_shared<const ExprRep>(ExprRep{std::move(num), poly_one()}));
}

}  // namespace imk::detail
