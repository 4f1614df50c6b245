#pragma once

// Internal canonical representation of Expr.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "imk/expr.hpp"

namespace imk::detail {

struct Atom {
  enum class Kind : int { Param = 0, Var = 1, Call = 2 };
  Kind kind = Kind::Var;
  int var = 0;
  std::string name;
  Func fn = Func::Exp;
  Expr arg;
};

int compare(const Atom& a, const Atom& b);
int compare(const Expr& a, const Expr& b);

// Sorted by atom, all exponents positive.
using Monomial = std::vector<std::pair<Atom, int>>;

struct MonoLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

using MPoly = std::map<Monomial, Rational, MonoLess>;

struct ExprRep {
  MPoly num;
  MPoly den;  // never empty; {} -> 1 for polynomials
};

int compare(const Monomial& a, const Monomial& b);
int compare(const MPoly& a, const MPoly& b);

Monomial mono_mul(const Monomial& a, const Monomial& b);
int total_degree(const Monomial& m);

MPoly poly_one();
MPoly poly_const(const Rational& c);
MPoly poly_atom(const Atom& a);
bool poly_is_one(const MPoly& p);
MPoly poly_add(const MPoly& a, const MPoly& b);
MPoly poly_sub(const MPoly& a, const MPoly& b);
MPoly poly_mul(const MPoly& a, const MPoly& b);
MPoly poly_scale(const MPoly& a, const Rational& c);

/// Cancels the multivariate gcd and makes the denominator monic (leading
/// coefficient 1 under the dense lexicographic order of its atoms).
ExprRep reduce(MPoly num, MPoly den);

Expr make_expr(MPoly num, MPoly den);  // reduces
Expr make_poly_expr(MPoly num);         // den = 1, no reduction needed

}  // namespace imk::detail
