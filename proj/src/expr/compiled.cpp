#include <cmath>

#include "expr/rep.hpp"
#include "imk/error.hpp"

namespace imk {

using detail::Atom;
using detail::MPoly;

struct CompiledExpr::Node {
  struct Term {
    double coef;
    std::vector<std::pair<int, int>> factors;  // atom slot, exponent
  };
  struct Slot {
    Atom::Kind kind;
    int var = 0;
    double value = 0.0;
    Func fn = Func::Exp;
    std::shared_ptr<const Node> arg;
    std::string text;
  };
  std::vector<Slot> slots;
  std::vector<Term> num, den;
  bool has_den = false;
  std::string den_text;

  double eval(std::span<const double> x) const {
    constexpr std::size_t kInline = 32;
    double inline_vals[kInline];
    std::vector<double> heap;
    double* vals = inline_vals;
    if (slots.size() > kInline) {
      heap.resize(slots.size());
      vals = heap.data();
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const Slot& s = slots[i];
      switch (s.kind) {
        case Atom::Kind::Var: vals[i] = x[s.var - 1]; break;
        case Atom::Kind::Param: vals[i] = s.value; break;
        case Atom::Kind::Call: {
          const double u = s.arg->eval(x);
          switch (s.fn) {
            case Func::Exp: vals[i] = std::exp(u); break;
            case Func::Ln:
              if (!(u > 0.0)) throw DomainError("ln of nonpositive value", s.text);
              vals[i] = std::log(u);
              break;
            case Func::Sin: vals[i] = std::sin(u); break;
            case Func::Cos: vals[i] = std::cos(u); break;
          }
        }
      }
    }
    auto poly = [&](const std::vector<Term>& terms) {
      double acc = 0.0;
      for (const Term& t : terms) {
        double v = t.coef;
        for (const auto& [slot, k] : t.factors) {
          double b = vals[slot];
          for (int j = 0; j < k; ++j) v *= b;
        }
        acc += v;
      }
      return acc;
    };
    const double n = poly(num);
    if (!has_den) return n;
    const double d = poly(den);
    if (d == 0.0 || !std::isfinite(d)) throw DomainError("division by zero", den_text);
    return n / d;
  }
};

namespace {

std::shared_ptr<const CompiledExpr::Node> compile(const Expr& e, const ParamValues& params);

}  // namespace

// Built in a free function so the Node type stays private to this file.
namespace {

int slot_for(CompiledExpr::Node& node, const Atom& a, const ParamValues& params,
             std::vector<const Atom*>& seen) {
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (detail::compare(*seen[i], a) == 0) return static_cast<int>(i);
  CompiledExpr::Node::Slot s;
  s.kind = a.kind;
  switch (a.kind) {
    case Atom::Kind::Var: s.var = a.var; break;
    case Atom::Kind::Param: {
      auto it = params.find(a.name);
      if (it == params.end()) throw InvalidInput("unbound parameter '" + a.name + "'");
      s.value = it->second;
      break;
    }
    case Atom::Kind::Call:
      s.fn = a.fn;
      s.arg = compile(a.arg, params);
      s.text = to_string(detail::make_poly_expr(detail::poly_atom(a)));
      break;
  }
  node.slots.push_back(std::move(s));
  seen.push_back(&a);
  return static_cast<int>(seen.size() - 1);
}

std::vector<CompiledExpr::Node::Term> compile_poly(CompiledExpr::Node& node, const MPoly& p,
                                                   const ParamValues& params,
                                                   std::vector<const Atom*>& seen) {
  std::vector<CompiledExpr::Node::Term> out;
  for (const auto& [m, c] : p) {
    CompiledExpr::Node::Term t{c.get_d(), {}};
    for (const auto& [atom, k] : m) t.factors.emplace_back(slot_for(node, atom, params, seen), k);
    out.push_back(std::move(t));
  }
  return out;
}

std::shared_ptr<const CompiledExpr::Node> compile(const Expr& e, const ParamValues& params) {
  auto node = std::make_shared<CompiledExpr::Node>();
  std::vector<const Atom*> seen;
  node->num = compile_poly(*node, e.rep().num, params, seen);
  if (!detail::poly_is_one(e.rep().den)) {
    node->has_den = true;
    node->den = compile_poly(*node, e.rep().den, params, seen);
    node->den_text = to_string(detail::make_poly_expr(e.rep().den));
  }
  return node;
}

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e, const ParamValues& params) : root_(compile(e, params)) {}

double CompiledExpr::operator()(std::span<const double> x) const {
  if (!root_) return 0.0;
  return root_->eval(x);
}

}  // namespace imk
