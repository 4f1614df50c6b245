#include <algorithm>

#include "imk/error.hpp"
#include "imk/vfield.hpp"

namespace imk {

bool VectorField::depends_on_state() const {
  return std::any_of(components.begin(), components.end(),
                     [](const Expr& e) { return e.depends_on_state(); });
}

namespace {

void require_same_dim(const VectorField& a, const VectorField& b) {
  if (a.dim() != b.dim())
    throw InvalidInput("vector field dimensions differ: " + std::to_string(a.dim()) + " vs " +
                       std::to_string(b.dim()));
}

}  // namespace

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_dim(a, b);
  VectorField out = a;
  for (int i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
  return out;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  require_same_dim(a, b);
  VectorField out = a;
  for (int i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
  return out;
}

VectorField operator*(const Expr& s, const VectorField& v) {
  VectorField out = v;
  for (auto& c : out.components) c = s * c;
  return out;
}

std::vector<std::vector<Expr>> jacobian(const VectorField& v, int n) {
  std::vector<std::vector<Expr>> j(v.dim(), std::vector<Expr>(n));
  for (int r = 0; r < v.dim(); ++r)
    for (int c = 0; c < n; ++c) j[r][c] = differentiate(v[r], c + 1);
  return j;
}

Expr lie_derivative(const Expr& h, const VectorField& x) {
  Expr acc;
  for (int i = 0; i < x.dim(); ++i) {
    if (x[i].is_zero()) continue;
    Expr d = differentiate(h, i + 1);
    if (!d.is_zero()) acc = acc + d * x[i];
  }
  return acc;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  require_same_dim(x, y);
  VectorField out = VectorField::zero(x.dim());
  for (int i = 0; i < x.dim(); ++i) out[i] = lie_derivative(y[i], x) - lie_derivative(x[i], y);
  return out;
}

// ---------------------------------------------------------------------------

SampleDomain AffineSystem::sample_domain() const {
  SampleDomain d;
  d.box = domain;
  d.dim = n;
  d.params = numeric_params();
  return d;
}

ParamValues AffineSystem::numeric_params() const {
  ParamValues p;
  for (const auto& [k, v] : param_values) p[k] = v.get_d();
  return p;
}

AffineSystem AffineSystem::bind_params() const {
  AffineSystem out = *this;
  if (param_values.empty()) return out;
  for (auto& c : out.f.components) c = substitute_params(c, param_values);
  for (auto& c : out.g.components) c = substitute_params(c, param_values);
  out.h = substitute_params(h, param_values);
  std::vector<std::string> remaining;
  for (const auto& p : params)
    if (!param_values.count(p)) remaining.push_back(p);
  out.params = std::move(remaining);
  out.param_values.clear();
  return out;
}

namespace {

OriginCondition evaluate_origin(const AffineSystem& s) {
  std::vector<Expr> zeros(s.n, Expr());
  std::vector<std::string> bad;
  bool symbolic = false;
  auto probe = [&](const Expr& e, const std::string& label) {
    Expr at0 = substitute(e, zeros);
    if (at0.is_zero()) return;
    if (at0.as_rational()) {
      bad.push_back(label + "(0) = " + to_string(at0));
      return;
    }
    Expr bound = substitute_params(at0, s.param_values);
    if (bound.is_zero()) {
      symbolic = true;
      return;
    }
    if (bound.as_rational() || !bound.parameters().empty() || bound.has_calls())
      bad.push_back(label + "(0) = " + to_string(at0));
  };
  for (int i = 0; i < s.n; ++i) probe(s.f[i], "f" + std::to_string(i + 1));
  probe(s.h, "h");
  OriginCondition oc;
  if (!bad.empty()) {
    oc.status = OriginCondition::Status::Violated;
    for (const auto& b : bad) oc.detail += (oc.detail.empty() ? "" : "; ") + b;
  } else if (symbolic) {
    oc.status = OriginCondition::Status::UserAsserted;
    oc.detail = "holds only for the bound parameter values";
  }
  return oc;
}

}  // namespace

AffineSystem make_affine_system(int n, std::vector<std::string> params,
                                std::map<std::string, Rational> values, VectorField f,
                                VectorField g, Expr h, std::vector<Interval> domain) {
  if (n < 1) throw InvalidInput("state dimension must be >= 1");
  if (f.dim() != n || g.dim() != n)
    throw InvalidInput("f and g must have " + std::to_string(n) + " components");
  if (!domain.empty() && static_cast<int>(domain.size()) != n)
    throw InvalidInput("domain box must have one interval per state coordinate");
  for (const auto& iv : domain)
    if (!(iv.lo < iv.hi)) throw InvalidInput("domain interval must satisfy lo < hi");
  std::set<std::string> declared(params.begin(), params.end());
  auto check = [&](const Expr& e, const std::string& label) {
    if (e.max_variable() > n) throw InvalidInput(label + " references a variable beyond x" +
                                                 std::to_string(n));
    for (const auto& p : e.parameters())
      if (!declared.count(p)) throw InvalidInput(label + " uses undeclared parameter " + p);
  };
  for (int i = 0; i < n; ++i) {
    check(f[i], "f" + std::to_string(i + 1));
    check(g[i], "g" + std::to_string(i + 1));
  }
  check(h, "h");
  for (const auto& [k, v] : values)
    if (!declared.count(k)) throw InvalidInput("value given for undeclared parameter " + k);

  AffineSystem s;
  s.n = n;
  s.params = std::move(params);
  s.param_values = std::move(values);
  s.f = std::move(f);
  s.g = std::move(g);
  s.h = std::move(h);
  s.domain = std::move(domain);
  s.origin = evaluate_origin(s);
  if (s.origin.status == OriginCondition::Status::Violated)
    s.warnings.push_back("f(0) = h(0) = 0 does not hold (" + s.origin.detail +
                         "); an equilibrium shift is assumed");
  return s;
}

AffineSystem parse_affine_system(int n, std::vector<std::string> params,
                                 std::map<std::string, Rational> values,
                                 const std::vector<std::string>& f,
                                 const std::vector<std::string>& g, const std::string& h,
                                 std::vector<Interval> domain) {
  if (static_cast<int>(f.size()) != n || static_cast<int>(g.size()) != n)
    throw InvalidInput("f and g must have " + std::to_string(n) + " components");
  VectorField fv, gv;
  for (const auto& s : f) fv.components.push_back(parse(s, n, params));
  for (const auto& s : g) gv.components.push_back(parse(s, n, params));
  Expr hv = parse(h, n, params);
  return make_affine_system(n, std::move(params), std::move(values), std::move(fv),
                            std::move(gv), std::move(hv), std::move(domain));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace imk
