#include "imk/error.hpp"
#include "imk/nform.hpp"

namespace imk {

namespace {

NamedCheck zero_check(std::string name, const std::vector<Expr>& exprs,
                      const std::vector<std::string>& labels, std::uint64_t seed,
                      const SampleDomain& dom) {
  NamedCheck c{std::move(name), Grade::Proven, ""};
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    try {
      ZeroStatus zs = is_zero(exprs[i], derive_seed(seed, i), dom);
      if (!zs.zero()) {
        c.grade = Grade::Failed;
        c.detail = labels[i] + " = " + to_string(exprs[i]) + " is not zero";
        return c;
      }
      c.grade = weakest(c.grade, zs.grade());
    } catch (const ZeroTestUnknown& e) {
      c.grade = weakest(c.grade, Grade::Unknown);
      c.detail = labels[i] + ": " + e.what();
    }
  }
  return c;
}

std::vector<Expr> z_variables(int n) {
  std::vector<Expr> v;
  for (int i = 1; i <= n; ++i) v.push_back(Expr::variable(i));
  return v;
}

// zeta = 0, z2 renumbered to variables 1..n-r.
std::vector<Expr> at_zero_zeta(int r, int n) {
  std::vector<Expr> v(r, Expr(0));
  for (int j = 1; j <= n - r; ++j) v.push_back(Expr::variable(j));
  return v;
}

}  // namespace

std::vector<std::string> NormalForm::z_names() const {
  std::vector<std::string> names;
  for (int k = 1; k <= r; ++k) names.push_back("zeta" + std::to_string(k));
  for (int j = 1; j <= n - r; ++j) names.push_back("z2_" + std::to_string(j));
  return names;
}

std::vector<std::string> NormalForm::z2_names() const {
  std::vector<std::string> names;
  for (int j = 1; j <= n - r; ++j) names.push_back("z2_" + std::to_string(j));
  return names;
}

std::vector<Expr> zeta_coordinates(const AffineSystem& sys, int r) {
  if (r < 1 || r > sys.n) throw InvalidInput("relative degree must lie in 1..n");
  std::vector<Expr> z{sys.h};
  for (int k = 1; k < r; ++k) z.push_back(lie_derivative(z.back(), sys.f));
  return z;
}

NormalForm build_normal_form(const AffineSystem& sys, const AssumptionReport& rep,
                             std::uint64_t seed) {
  const RelDegree& rd = rep.relative_degree;
  if (rd.status != RelDegree::Status::Uniform || !rep.tau)
    throw InvalidInput("normal form needs a uniform relative degree (" + rd.detail + ")");
  const int r = rd.r;
  const int n = sys.n;
  const auto& tau = rep.tau->tau;
  for (int i = 0; i < r; ++i)
    if (tau[i].depends_on_state())
      throw NonConstantTau("tau_" + std::to_string(i + 1) +
                           " depends on the state; only constant tau fields are constructed, "
                           "supply coordinates for verification instead");

  NormalForm nf;
  nf.r = r;
  nf.n = n;
  nf.zeta.assign(rd.lf_chain.begin(), rd.lf_chain.begin() + r);

  ExprMatrix m(n, std::vector<Expr>(r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < n; ++j) m[j][i] = tau[i][j];
  nf.W = left_nullspace(m);
  if (static_cast<int>(nf.W.size()) != n - r)
    throw PropertyFailure("tau fields are linearly dependent");
  for (const auto& row : nf.W) {
    Expr z;
    for (int k = 0; k < n; ++k)
      if (!row[k].is_zero()) z += row[k] * Expr::variable(k + 1);
    nf.z2.push_back(z);
  }

  // Affine coordinate map z = M x + v.
  ExprMatrix mz(n, std::vector<Expr>(n));
  std::vector<Expr> v(n);
  for (int k = 0; k < r; ++k) {
    auto af = as_affine(nf.zeta[k], n);
    if (!af)
      throw InvalidInput("zeta_" + std::to_string(k + 1) + " = " + to_string(nf.zeta[k]) +
                         " is not affine in x; only affine zeta coordinates are constructed");
    mz[k] = af->coeffs;
    v[k] = af->constant;
  }
  for (int j = 0; j < n - r; ++j) mz[r + j] = nf.W[j];
  auto inv = inverse(mz);
  if (!inv) throw PropertyFailure("coordinate map (zeta, W x) is singular");
  const std::vector<Expr> zv = z_variables(n);
  for (int i = 0; i < n; ++i) {
    Expr xi;
    for (int j = 0; j < n; ++j)
      if (!(*inv)[i][j].is_zero()) xi += (*inv)[i][j] * (zv[j] - v[j]);
    nf.inverse_map.push_back(xi);
  }
  auto pull = [&](const Expr& e) { return substitute(e, nf.inverse_map); };

  nf.a = pull(rd.lg_lf);
  nf.b = pull(rd.lf_chain[r]);
  nf.f2 = VectorField::zero(n - r);
  std::vector<Expr> g_parts;
  for (int j = 0; j < n - r; ++j) {
    Expr fx, gx;
    for (int k = 0; k < n; ++k) {
      if (nf.W[j][k].is_zero()) continue;
      fx += nf.W[j][k] * sys.f[k];
      gx += nf.W[j][k] * sys.g[k];
    }
    nf.f2[j] = pull(fx);
    g_parts.push_back(gx);
  }
  nf.f2_zero = VectorField::zero(n - r);
  const std::vector<Expr> zero_zeta = at_zero_zeta(r, n);
  for (int j = 0; j < n - r; ++j) nf.f2_zero[j] = substitute(nf.f2[j], zero_zeta);

  const SampleDomain xdom = sys.sample_domain();
  SampleDomain zdom;
  zdom.dim = n;
  zdom.params = sys.numeric_params();

  std::vector<Expr> chain;
  std::vector<std::string> chain_labels;
  for (int k = 0; k + 1 < r; ++k) {
    chain.push_back(lie_derivative(nf.zeta[k], sys.f) - nf.zeta[k + 1]);
    chain_labels.push_back("L_f zeta" + std::to_string(k + 1) + " - zeta" + std::to_string(k + 2));
    chain.push_back(lie_derivative(nf.zeta[k], sys.g));
    chain_labels.push_back("L_g zeta" + std::to_string(k + 1));
  }
  nf.checks.push_back(zero_check("integrator chain", chain, chain_labels, derive_seed(seed, 1), xdom));

  std::vector<std::string> g_labels;
  for (int j = 1; j <= n - r; ++j) g_labels.push_back("L_g z2_" + std::to_string(j));
  nf.checks.push_back(zero_check("z2 not driven by u", g_parts, g_labels, derive_seed(seed, 2), xdom));

  NamedCheck a_check{"a nonzero", rd.quality, rd.nonvanishing ? std::string(to_string(rd.nonvanishing->kind)) : ""};
  nf.checks.push_back(a_check);

  std::vector<Expr> partials;
  std::vector<std::string> p_labels;
  for (int j = 0; j < n - r; ++j)
    for (int k = 2; k <= r; ++k) {
      partials.push_back(differentiate(nf.f2[j], k));
      p_labels.push_back("d z2_" + std::to_string(j + 1) + "'/d zeta" + std::to_string(k));
    }
  NamedCheck od = zero_check("output driven", partials, p_labels, derive_seed(seed, 3), zdom);
  nf.output_driven = od.grade != Grade::Failed;
  nf.checks.push_back(od);

  nf.grade = Grade::Proven;
  for (const auto& c : nf.checks) {
    if (&c == &nf.checks.back() && !nf.output_driven) continue;
    nf.grade = weakest(nf.grade, c.grade);
  }
  if (!nf.output_driven) {
    nf.grade = weakest(nf.grade, Grade::Unknown);
    nf.detail = "downgraded: z2 dynamics depend on derivatives of y (" + od.detail + ")";
  }
  nf.construction = NormalForm::Construction::Constructed;
  return nf;
}

CoordinateCheck verify_coordinate_change(const AffineSystem& sys, const std::vector<Expr>& zeta,
                                         const std::vector<Expr>& z2, std::uint64_t seed) {
  const int n = sys.n;
  const int r = static_cast<int>(zeta.size());
  if (r < 1 || r + static_cast<int>(z2.size()) != n)
    throw InvalidInput("coordinates must consist of r >= 1 zeta entries and n - r z2 entries");
  for (const auto& e : zeta)
    if (e.max_variable() > n) throw InvalidInput("coordinate references a variable beyond n");
  for (const auto& e : z2)
    if (e.max_variable() > n) throw InvalidInput("coordinate references a variable beyond n");

  CoordinateCheck out;
  const SampleDomain dom = sys.sample_domain();

  out.checks.push_back(zero_check("zeta1 = h", {zeta[0] - sys.h}, {"zeta1 - h"}, derive_seed(seed, 0), dom));

  std::vector<Expr> lg;
  std::vector<std::string> lg_labels;
  for (std::size_t j = 0; j < z2.size(); ++j) {
    lg.push_back(lie_derivative(z2[j], sys.g));
    lg_labels.push_back("L_g z2_" + std::to_string(j + 1));
  }
  out.checks.push_back(zero_check("z2 not driven by u", lg, lg_labels, derive_seed(seed, 1), dom));

  std::vector<Expr> chain;
  std::vector<std::string> chain_labels;
  for (int k = 0; k + 1 < r; ++k) {
    chain.push_back(lie_derivative(zeta[k], sys.f) - zeta[k + 1]);
    chain_labels.push_back("L_f zeta" + std::to_string(k + 1) + " - zeta" + std::to_string(k + 2));
    chain.push_back(lie_derivative(zeta[k], sys.g));
    chain_labels.push_back("L_g zeta" + std::to_string(k + 1));
  }
  out.checks.push_back(zero_check("integrator chain", chain, chain_labels, derive_seed(seed, 2), dom));

  ExprMatrix jac;
  for (const auto& e : zeta) jac.push_back(jacobian(VectorField({e}), n)[0]);
  for (const auto& e : z2) jac.push_back(jacobian(VectorField({e}), n)[0]);
  const Expr det = determinant(jac);
  NamedCheck inv{"local invertibility", Grade::Failed, "det = " + to_string(det)};
  if (auto q = det.as_rational()) {
    inv.grade = *q != 0 ? Grade::Proven : Grade::Failed;
  } else if (!det.is_zero()) {
    NonvanishingStatus nv = check_nonvanishing(det, derive_seed(seed, 3), dom);
    inv.grade = nv.grade();
    if (!nv.detail.empty()) inv.detail += " (" + nv.detail + ")";
  }
  out.checks.push_back(inv);

  NamedCheck od{"output driven", Grade::Proven, ""};
  if (r >= 2) {
    auto jinv = inverse(jac);
    if (!jinv) {
      od.grade = Grade::Failed;
      od.detail = "Jacobian is singular";
    } else {
      std::vector<Expr> partials;
      std::vector<std::string> labels;
      for (std::size_t j = 0; j < z2.size(); ++j) {
        const Expr zdot = lie_derivative(z2[j], sys.f);
        for (int k = 1; k < r; ++k) {
          Expr d;
          for (int i = 0; i < n; ++i) d += differentiate(zdot, i + 1) * (*jinv)[i][k];
          partials.push_back(d);
          labels.push_back("d z2_" + std::to_string(j + 1) + "'/d zeta" + std::to_string(k + 1));
        }
      }
      od = zero_check("output driven", partials, labels, derive_seed(seed, 4), dom);
    }
  }
  out.checks.push_back(od);

  out.grade = Grade::Proven;
  for (const auto& c : out.checks) out.grade = weakest(out.grade, c.grade);
  return out;
}

IMOutput internal_model_output(const NormalForm& nf, const ParamValues& params,
                               std::uint64_t seed) {
  if (nf.construction == NormalForm::Construction::Failed)
    throw InvalidInput("internal model output needs a constructed normal form");
  const std::vector<Expr> zz = at_zero_zeta(nf.r, nf.n);
  IMOutput out;
  out.a0 = substitute(nf.a, zz);
  out.b0 = substitute(nf.b, zz);
  if (out.a0.is_zero())
    throw PropertyFailure("a(0, z2) is identically zero; the normal form needs a(z) != 0 for all z");
  out.phi = -out.b0 / out.a0;
  SampleDomain dom;
  dom.dim = nf.n - nf.r;
  dom.params = params;
  out.a0_check = check_nonvanishing(out.a0, seed, dom);
  if (out.a0_check.kind == NonvanishingStatus::Kind::Vanishes)
    throw PropertyFailure("a(0, z2) = " + to_string(out.a0, nf.z2_names()) +
                          " vanishes on the sampled domain; the normal form needs a(z) != 0");
  out.grade = out.a0_check.grade();
  return out;
}

}  // namespace imk
