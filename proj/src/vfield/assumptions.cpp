#include "imk/error.hpp"
#include "imk/vfield.hpp"

namespace imk {

std::string_view to_string(RelDegree::Status s) {
  switch (s) {
    case RelDegree::Status::Uniform: return "uniform";
    case RelDegree::Status::NoUniform: return "no-uniform";
    case RelDegree::Status::Unknown: return "unknown";
  }
  return "unknown";
}

RelDegree relative_degree(const AffineSystem& sys, std::uint64_t seed) {
  RelDegree rd;
  const SampleDomain dom = sys.sample_domain();
  Grade zero_grade = Grade::Proven;
  Expr phi = sys.h;
  rd.lf_chain.push_back(phi);
  for (int k = 0; k < sys.n; ++k) {
    Expr c = lie_derivative(phi, sys.g);
    ZeroStatus zs;
    try {
      zs = is_zero(c, derive_seed(seed, 2 * k), dom);
    } catch (const ZeroTestUnknown& e) {
      rd.status = RelDegree::Status::Unknown;
      rd.quality = Grade::Unknown;
      rd.detail = "L_g L_f^" + std::to_string(k) + " h: " + e.what();
      return rd;
    }
    if (zs.zero()) {
      zero_grade = weakest(zero_grade, zs.grade());
      rd.vanishing.push_back(zs);
      phi = lie_derivative(phi, sys.f);
      rd.lf_chain.push_back(phi);
      continue;
    }
    rd.lg_lf = c;
    NonvanishingStatus nv = check_nonvanishing(c, derive_seed(seed, 2 * k + 1), dom);
    rd.nonvanishing = nv;
    switch (nv.kind) {
      case NonvanishingStatus::Kind::ProvenNonzero:
      case NonvanishingStatus::Kind::SampledNonzero:
        rd.status = RelDegree::Status::Uniform;
        rd.r = k + 1;
        rd.lf_chain.push_back(lie_derivative(phi, sys.f));
        rd.quality = weakest(zero_grade, nv.grade());
        rd.detail = "L_g L_f^" + std::to_string(k) + " h = " + to_string(c);
        return rd;
      case NonvanishingStatus::Kind::Vanishes:
        rd.status = RelDegree::Status::NoUniform;
        rd.quality = Grade::Failed;
        rd.witness = nv.root;
        rd.detail = "L_g L_f^" + std::to_string(k) + " h = " + to_string(c) +
                    " vanishes inside the domain";
        return rd;
      case NonvanishingStatus::Kind::Inconclusive:
        rd.status = RelDegree::Status::Unknown;
        rd.quality = Grade::Unknown;
        rd.detail = "L_g L_f^" + std::to_string(k) + " h = " + to_string(c) + ": " + nv.detail;
        return rd;
    }
  }
  rd.status = RelDegree::Status::NoUniform;
  rd.quality = Grade::Failed;
  rd.detail = "L_g L_f^k h vanishes for every k < n";
  return rd;
}

TauFields tau_fields(const AffineSystem& sys, const RelDegree& rd) {
  if (rd.status != RelDegree::Status::Uniform)
    throw InvalidInput("tau fields need a uniform relative degree (" + rd.detail + ")");
  if (rd.lg_lf.is_zero())
    throw InvalidInput("L_g L_f^{r-1} h is identically zero: relative degree hypothesis violated");
  TauFields t;
  t.g_tilde = VectorField::zero(sys.n);
  for (int i = 0; i < sys.n; ++i) t.g_tilde[i] = sys.g[i] / rd.lg_lf;
  t.f_tilde = sys.f - rd.lf_chain.back() * t.g_tilde;
  t.tau.push_back(t.g_tilde);
  for (int i = 1; i < rd.r; ++i) t.tau.push_back(lie_bracket(t.f_tilde, t.tau.back()));
  return t;
}

CompletenessStatus check_completeness(const VectorField& v, int n) {
  if (!v.depends_on_state()) return {Grade::Proven, "constant"};
  for (const auto& c : v.components) {
    auto af = as_affine(c, n);
    if (!af) return {Grade::Unknown, "not certified"};
  }
  return {Grade::Proven, "linear-affine"};
}

CommutativityStatus check_commutativity(const std::vector<VectorField>& fields,
                                        std::uint64_t seed, const SampleDomain& domain) {
  CommutativityStatus out;
  std::uint64_t k = 0;
  for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
    for (int j = i + 1; j < static_cast<int>(fields.size()); ++j) {
      BracketCheck bc;
      bc.i = i + 1;
      bc.j = j + 1;
      bc.bracket = lie_bracket(fields[i], fields[j]);
      for (int c = 0; c < bc.bracket.dim(); ++c) {
        ZeroStatus zs;
        try {
          zs = is_zero(bc.bracket[c], derive_seed(seed, k++), domain);
        } catch (const ZeroTestUnknown&) {
          bc.grade = weakest(bc.grade, Grade::Unknown);
          continue;
        }
        if (!zs.zero()) {
          bc.grade = Grade::Failed;
          bc.nonzero_component = c + 1;
          bc.witness = zs.witness;
          break;
        }
        bc.grade = weakest(bc.grade, zs.grade());
      }
      out.grade = weakest(out.grade, bc.grade);
      if (bc.grade == Grade::Failed && !out.failure) out.failure = bc;
      out.pairs.push_back(std::move(bc));
    }
  }
  return out;
}

AssumptionReport check_assumptions(const AffineSystem& sys, std::uint64_t seed) {
  AssumptionReport rep;
  rep.relative_degree = relative_degree(sys, derive_seed(seed, 0));
  if (rep.relative_degree.status != RelDegree::Status::Uniform) {
    rep.completeness_grade = Grade::Unknown;
    rep.commutativity.grade = Grade::Unknown;
    rep.detail = "relative degree: " + rep.relative_degree.detail;
    return rep;
  }
  rep.tau = tau_fields(sys, rep.relative_degree);
  rep.completeness_grade = Grade::Proven;
  for (const auto& t : rep.tau->tau) {
    rep.completeness.push_back(check_completeness(t, sys.n));
    rep.completeness_grade = weakest(rep.completeness_grade, rep.completeness.back().grade);
  }
  rep.commutativity = check_commutativity(rep.tau->tau, derive_seed(seed, 1), sys.sample_domain());
  if (rep.commutativity.failure) {
    const auto& f = *rep.commutativity.failure;
    rep.detail = "[tau_" + std::to_string(f.i) + ", tau_" + std::to_string(f.j) +
                 "] has nonzero component " + std::to_string(*f.nonzero_component) + ": " +
                 to_string(f.bracket[*f.nonzero_component - 1]);
  }
  return rep;
}

}  // namespace imk
