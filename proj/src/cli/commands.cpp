#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "imk/cli.hpp"
#include "imk/error.hpp"
#include "imk/nform.hpp"
#include "imk/sim.hpp"

namespace imk::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kBound = 1e6;
constexpr double kPoissonDelta = 1e-2;
constexpr double kZeroingHorizon = 20.0;
constexpr double kEmbeddingTol = 1e-8;

// ---------------------------------------------------------------------------
// Serialization of library results

json exprs(const std::vector<Expr>& v, const std::vector<std::string>& names = {}) {
  json out = json::array();
  for (const auto& e : v) out.push_back(to_string(e, names));
  return out;
}

json field(const VectorField& v, const std::vector<std::string>& names = {}) {
  return exprs(v.components, names);
}

json rational(const Rational& q) { return to_string(q); }

json rat_vector_json(const RatVector& v) {
  json out = json::array();
  for (const auto& q : v) out.push_back(rational(q));
  return out;
}

json rat_matrix_json(const RatMatrix& m) {
  json out = json::array();
  for (const auto& row : m) out.push_back(rat_vector_json(row));
  return out;
}

json poly_json(const Poly& p) {
  return {{"text", to_string(p)}, {"coeffs", rat_vector_json(p.coeffs())}};
}

json rfn_json(const RationalFn& r) {
  return {{"text", to_string(r)}, {"num", poly_json(r.num)}, {"den", poly_json(r.den)}};
}

json vec_json(const std::vector<double>& v) { return json(v); }

std::string origin_name(OriginCondition::Status s) {
  switch (s) {
    case OriginCondition::Status::Holds: return "holds";
    case OriginCondition::Status::Violated: return "violated";
    case OriginCondition::Status::UserAsserted: return "user-asserted";
  }
  return "unknown";
}

json system_json(const SystemSpec& spec) {
  const AffineSystem& s = spec.sys;
  json params = json::object();
  for (const auto& p : s.params) {
    auto it = s.param_values.find(p);
    params[p] = it == s.param_values.end() ? json(nullptr) : rational(it->second);
  }
  json out = {{"kind", spec.kind}, {"state_dim", s.n}, {"params", params},
              {"f", field(s.f)},   {"g", field(s.g)},   {"h", to_string(s.h)}};
  if (!s.domain.empty()) {
    json d = json::array();
    for (const auto& iv : s.domain) d.push_back({iv.lo, iv.hi});
    out["domain"] = d;
  }
  out["origin"] = {{"status", origin_name(s.origin.status)}, {"detail", s.origin.detail}};
  return out;
}

json exo_json(const Exosystem& exo) {
  json out = {{"label", exo.label}, {"dim", exo.m}};
  if (exo.is_linear()) {
    out["Q"] = rat_matrix_json(exo.Q);
    out["theta"] = rat_vector_json(exo.theta);
    out["characteristic"] = poly_json(exo.characteristic());
    const ModesVerdict mv = check_no_stable_modes(exo);
    out["no_stable_modes"] = mv.ok;
  } else {
    std::vector<std::string> names;
    for (int i = 1; i <= exo.m; ++i) names.push_back("w" + std::to_string(i));
    out["Q"] = field(exo.field_s, names);
    out["theta"] = to_string(exo.theta_s, names);
  }
  return out;
}

json relative_degree_json(const RelDegree& rd) {
  json out = {{"status", std::string(to_string(rd.status))}};
  if (rd.status == RelDegree::Status::Uniform) {
    out["r"] = rd.r;
    out["lf_chain"] = exprs(rd.lf_chain);
    out["lg_lf"] = to_string(rd.lg_lf);
  }
  json van = json::array();
  for (std::size_t k = 0; k < rd.vanishing.size(); ++k)
    van.push_back({{"k", k}, {"status", std::string(to_string(rd.vanishing[k].kind))},
                   {"grade", grade_json(rd.vanishing[k].grade())}});
  out["vanishing"] = van;
  if (rd.nonvanishing)
    out["nonvanishing"] = {{"status", std::string(to_string(rd.nonvanishing->kind))},
                           {"samples", rd.nonvanishing->samples},
                           {"min_abs", rd.nonvanishing->min_abs},
                           {"grade", grade_json(rd.nonvanishing->grade())}};
  if (rd.witness) out["witness"] = vec_json(rd.witness->x);
  out["detail"] = rd.detail;
  out["grade"] = grade_json(rd.quality);
  return out;
}

json assumptions_json(const AssumptionReport& rep) {
  json out = json::object();
  if (!rep.tau) {
    out["skipped"] = "no uniform relative degree";
    out["detail"] = rep.detail;
    out["grade"] = grade_json(Grade::Unknown);
    return out;
  }
  out["g_tilde"] = field(rep.tau->g_tilde);
  out["f_tilde"] = field(rep.tau->f_tilde);
  json tau = json::array();
  bool constant = true;
  for (const auto& t : rep.tau->tau) {
    tau.push_back(field(t));
    constant = constant && !t.depends_on_state();
  }
  out["tau"] = tau;
  out["tau_constant"] = constant;
  json comp = json::array();
  for (std::size_t i = 0; i < rep.completeness.size(); ++i)
    comp.push_back({{"tau", i + 1},
                    {"reason", rep.completeness[i].reason},
                    {"grade", grade_json(rep.completeness[i].grade)}});
  out["completeness"] = {{"fields", comp}, {"grade", grade_json(rep.completeness_grade)}};
  json pairs = json::array();
  for (const auto& b : rep.commutativity.pairs) {
    json p = {{"i", b.i}, {"j", b.j}, {"bracket", field(b.bracket)}, {"grade", grade_json(b.grade)}};
    if (b.nonzero_component) p["nonzero_component"] = *b.nonzero_component;
    if (b.witness) p["witness"] = vec_json(b.witness->x);
    pairs.push_back(p);
  }
  out["commutativity"] = {{"pairs", pairs}, {"grade", grade_json(rep.commutativity.grade)}};
  out["detail"] = rep.detail;
  out["grade"] = grade_json(weakest(rep.completeness_grade, rep.commutativity.grade));
  return out;
}

json poisson_json(const PoissonVerdict& pv) {
  return {{"status", std::string(to_string(pv.status))},
          {"eigenvalues", complex_list(pv.eigenvalues)},
          {"return_distances", pv.return_distances},
          {"detail", pv.detail},
          {"grade", grade_json(pv.grade())}};
}

json point_json(const OmegaPoint& p) {
  return {{"w", p.w}, {"x", p.x}, {"visits", p.visits}, {"time", p.time}};
}

json named_checks(const std::vector<NamedCheck>& cs) {
  json out = json::array();
  for (const auto& c : cs)
    out.push_back({{"name", c.name}, {"detail", c.detail}, {"grade", grade_json(c.grade)}});
  return out;
}

std::string construction_name(NormalForm::Construction c) {
  switch (c) {
    case NormalForm::Construction::Constructed: return "constructed";
    case NormalForm::Construction::VerifiedUserSupplied: return "verified-user-supplied";
    case NormalForm::Construction::Failed: return "failed";
  }
  return "failed";
}

json normal_form_json(const NormalForm& nf) {
  const auto zn = nf.z_names();
  json W = json::array();
  for (const auto& row : nf.W) W.push_back(exprs(row));
  return {{"construction", construction_name(nf.construction)},
          {"r", nf.r},
          {"zeta", exprs(nf.zeta)},
          {"W", W},
          {"z2", exprs(nf.z2)},
          {"inverse_map", exprs(nf.inverse_map, zn)},
          {"a", to_string(nf.a, zn)},
          {"b", to_string(nf.b, zn)},
          {"f2", field(nf.f2, zn)},
          {"f2_zero", field(nf.f2_zero, nf.z2_names())},
          {"output_driven", nf.output_driven},
          {"checks", named_checks(nf.checks)},
          {"detail", nf.detail},
          {"grade", grade_json(nf.grade)}};
}

// ---------------------------------------------------------------------------
// Report plumbing

json header(const std::string& command) {
  return {{"tool", "imk"},
          {"version", kVersion},
          {"schema_version", kSchemaVersion},
          {"command", command},
          {"timestamp", utc_timestamp()}};
}

json input_entry(const std::string& path, const std::string& raw) {
  return {{"file", fs::path(path).filename().string()}, {"fnv1a64", fnv1a64_hex(raw)}};
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const InvalidInput*>(&e)) return "invalid_input";
  if (dynamic_cast<const PropertyFailure*>(&e)) return "property_failed";
  return "numerical_failure";
}

void record_error(json& report, const std::string& stage, const std::exception& e) {
  report["error"] = {{"stage", stage}, {"kind", error_kind(e)}, {"message", e.what()}};
}

json finish(json report) {
  report["overall_grade"] = grade_json(overall_grade(report));
  return report;
}

struct Inputs {
  SystemSpec sys;
  ExoSpec exo;
};

SystemSpec load_system(const std::string& path, json& report) {
  std::string raw;
  const json j = read_json_file(path, &raw);
  report["inputs"]["system"] = input_entry(path, raw);
  return parse_system_spec(j);
}

ExoSpec load_exo(const std::string& path, json& report) {
  std::string raw;
  const json j = read_json_file(path, &raw);
  report["inputs"]["exosystem"] = input_entry(path, raw);
  return parse_exo_spec(j);
}

// Trials: the product of the spec lists when both are given, otherwise
// `count` pairs with missing entries drawn from the seeded generator.
std::vector<Trial> make_trials(const SystemSpec& s, const ExoSpec& e, int count,
                               std::uint64_t seed) {
  if (!s.x0s.empty() && !e.w0s.empty()) return trial_product(s.x0s, e.w0s);
  std::mt19937_64 rng(derive_seed(seed, 100));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](int dim, const std::vector<Interval>& box) {
    std::vector<double> v(dim);
    for (int i = 0; i < dim; ++i) {
      const double lo = box.empty() ? -1.0 : box[i].lo;
      const double hi = box.empty() ? 1.0 : box[i].hi;
      v[i] = lo + (hi - lo) * unit(rng);
    }
    return v;
  };
  std::vector<Trial> out;
  for (int k = 0; k < std::max(count, 1); ++k) {
    Trial t;
    t.x0 = s.x0s.empty() ? draw(s.sys.n, s.sys.domain) : s.x0s[k % s.x0s.size()];
    t.w0 = e.w0s.empty() ? draw(e.exo.m, {}) : e.w0s[k % e.w0s.size()];
    out.push_back(std::move(t));
  }
  return out;
}

json adaptation_json(const AdaptationReport& ar) {
  json trials = json::array();
  for (const auto& t : ar.trials)
    trials.push_back({{"x0", t.trial.x0},
                      {"w0", t.trial.w0},
                      {"pass", t.pass},
                      {"bounded", t.bounded},
                      {"max_y_final", t.max_y_final},
                      {"max_norm", t.max_norm},
                      {"horizon_used", t.horizon_used},
                      {"extensions", t.extensions},
                      {"reason", t.reason}});
  return {{"trials", trials},
          {"pass", ar.pass},
          {"max_y_final", ar.max_y_final},
          {"max_norm", ar.max_norm},
          {"grade", grade_json(ar.grade)}};
}

// Linear pipeline: transfer function, G S stability, feedback decomposition
// and the controller-form internal model.
json linear_pipeline(const LinSys& lin, const Exosystem& exo, double eps) {
  json out = json::object();
  const RationalFn S = transfer_function(lin);
  out["transfer_function"] = rfn_json(S);
  out["markov_relative_degree"] = markov_relative_degree(lin);
  if (!exo.is_linear()) {
    out["skipped"] = "exosystem is not linear";
    return out;
  }
  const Poly pi = exo.characteristic();
  out["pi"] = poly_json(pi);
  const RationalFn G = RationalFn::make(Poly{1}, pi);
  const LinearAdaptation la = check_linear_adaptation(S, G, eps);
  out["adaptation"] = {{"stable", la.stable},
                       {"product", rfn_json(la.product)},
                       {"poles", complex_list(la.poles)},
                       {"paired", complex_list(la.paired)},
                       {"pairing_tolerance", la.pairing_tolerance},
                       {"eps_stab", la.eps_stab},
                       {"detail", la.detail},
                       {"grade", grade_json(la.grade)}};
  try {
    const FeedbackDecomposition fd = feedback_decomposition(S);
    const bool round_trip = reassemble(fd) == S;
    const auto [quot, rem] = poly_divmod(S.den, S.num);
    const bool exact = quot == fd.a && rem == fd.b && quot * S.num + rem == S.den;
    out["feedback"] = {{"a", poly_json(fd.a)},
                       {"b", poly_json(fd.b)},
                       {"p", poly_json(fd.p)},
                       {"feedback", rfn_json(fd.fb)},
                       {"zero_feedback", fd.zero_feedback},
                       {"division_exact", exact},
                       {"round_trip", round_trip},
                       {"grade", grade_json(round_trip && exact ? Grade::Proven : Grade::Failed)}};
  } catch (const InvalidInput& e) {
    out["feedback"] = {{"detail", e.what()}, {"grade", grade_json(Grade::Unknown)}};
  }
  try {
    const LinearIMResult im = extract_internal_model_linear(S, pi, eps);
    const Poly cp = characteristic_polynomial(im.companion);
    out["internal_model"] = {{"p0", poly_json(im.p0)},
                             {"a", poly_json(im.a)},
                             {"b", poly_json(im.b)},
                             {"b1", poly_json(im.b1)},
                             {"b2", poly_json(im.b2)},
                             {"companion", rat_matrix_json(im.companion)},
                             {"input", rat_vector_json(im.input)},
                             {"output", rat_vector_json(im.output)},
                             {"companion_characteristic", poly_json(cp)},
                             {"grade", grade_json(cp == pi ? Grade::Proven : Grade::Failed)}};
  } catch (const NoInternalModel& e) {
    out["internal_model"] = {{"detail", e.what()}, {"grade", grade_json(Grade::Failed)}};
  } catch (const InvalidInput& e) {
    out["internal_model"] = {{"detail", e.what()}, {"grade", grade_json(Grade::Unknown)}};
  }
  return out;
}

// Linear coefficient row of e in variables 1..k, or nothing when e has a
// constant term or non-rational coefficients.
std::optional<std::vector<double>> linear_row(const Expr& e, int k) {
  const auto af = as_affine(e, k);
  if (!af || !af->constant.is_zero()) return std::nullopt;
  std::vector<double> row;
  for (const auto& c : af->coeffs) {
    const auto q = c.as_rational();
    if (!q) return std::nullopt;
    row.push_back(q->get_d());
  }
  return row;
}

json embedding_json(const NormalForm& nf, const IMOutput& im, const Exosystem& exo) {
  const int k = nf.n - nf.r;
  if (!exo.is_linear()) return {{"skipped", "exosystem is not linear"}};
  if (k == 0) return {{"skipped", "no z2 coordinates"}};
  Eigen::MatrixXd F(k, k);
  for (int i = 0; i < k; ++i) {
    const auto row = linear_row(nf.f2_zero[i], k);
    if (!row) return {{"skipped", "z2 dynamics at zeta = 0 are not linear"}};
    for (int j = 0; j < k; ++j) F(i, j) = (*row)[j];
  }
  const auto prow = linear_row(im.phi, k);
  if (!prow) return {{"skipped", "phi is not linear in z2"}};
  Eigen::RowVectorXd phi(k);
  for (int j = 0; j < k; ++j) phi(j) = (*prow)[j];
  try {
    const EmbeddingResult e = solve_embedding(exo.Q_double(), exo.theta_double(), F, phi,
                                              kEmbeddingTol);
    return {{"F", matrix_json(F)},
            {"phi", matrix_json(phi)},
            {"T", matrix_json(e.T)},
            {"P", matrix_json(e.P)},
            {"block_form", matrix_json(e.block_form)},
            {"orientation", e.orientation},
            {"reduced_F", e.reduced_F},
            {"reduced_Q", e.reduced_Q},
            {"matching_residual", e.matching_residual},
            {"residual_FT", e.residual_FT},
            {"residual_phi", e.residual_phi},
            {"min_singular_value", e.min_singular_value},
            {"tolerance", kEmbeddingTol},
            {"grade", grade_json(Grade::Sampled)}};
  } catch (const NoEmbedding& e) {
    return {{"F", matrix_json(F)},
            {"phi", matrix_json(phi)},
            {"detail", e.what()},
            {"grade", grade_json(Grade::Failed)}};
  }
}

struct NormalFormStage {
  std::optional<NormalForm> bound;
  std::optional<IMOutput> im;
};

// Symbolic normal form for the report, bound normal form for the numbers.
NormalFormStage normal_form_stage(const AffineSystem& sys, const AssumptionReport& rep,
                                  std::uint64_t seed, json& section) {
  NormalFormStage out;
  try {
    const NormalForm nf = build_normal_form(sys, rep, seed);
    section["normal_form"] = normal_form_json(nf);
    if (sys.params.empty()) {
      out.bound = nf;
    } else {
      const AffineSystem sb = sys.bind_params();
      const AssumptionReport rb = check_assumptions(sb, seed);
      out.bound = build_normal_form(sb, rb, seed);
      section["normal_form_bound"] = normal_form_json(*out.bound);
    }
  } catch (const NonConstantTau& e) {
    section["normal_form"] = {{"construction", "refused"},
                              {"detail", e.what()},
                              {"grade", grade_json(Grade::Unknown)}};
    return out;
  } catch (const PropertyFailure& e) {
    section["normal_form"] = {{"construction", "failed"},
                              {"detail", e.what()},
                              {"grade", grade_json(Grade::Failed)}};
    return out;
  }
  try {
    const IMOutput im = internal_model_output(*out.bound, sys.numeric_params(), seed);
    const auto names = out.bound->z2_names();
    section["output"] = {{"phi", to_string(im.phi, names)},
                         {"a0", to_string(im.a0, names)},
                         {"b0", to_string(im.b0, names)},
                         {"a0_check", std::string(to_string(im.a0_check.kind))},
                         {"grade", grade_json(im.grade)}};
    out.im = im;
  } catch (const PropertyFailure& e) {
    section["output"] = {{"detail", e.what()}, {"grade", grade_json(Grade::Failed)}};
  }
  return out;
}

double eval_at(const Expr& e, const std::vector<double>& x, const ParamValues& p) {
  return eval(e, x, p);
}

json settings_json(const AnalyzeSettings& s, const AdaptationOptions& ao, const OmegaOptions& oo) {
  return {{"horizon", s.horizon},
          {"tol", s.tol},
          {"trials", s.trials},
          {"seed", s.seed},
          {"eps_stab", s.eps_stab},
          {"pairing_tolerance", kPairingTolerance},
          {"bound", ao.bound},
          {"max_extensions", ao.max_extensions},
          {"poisson_delta", kPoissonDelta},
          {"omega_transient_fraction", oo.transient_fraction},
          {"omega_radius_scale", oo.radius_scale},
          {"zeroing_horizon", kZeroingHorizon},
          {"embedding_tolerance", kEmbeddingTol},
          {"integrator", {{"method", "dopri5"}, {"rtol", ao.integrator.rtol},
                          {"atol", ao.integrator.atol}}}};
}

}  // namespace

// ---------------------------------------------------------------------------

json cmd_check(const std::string& sys_path, std::uint64_t seed) {
  json report = header("check");
  report["inputs"] = json::object();
  report["settings"] = {{"seed", seed}};
  report["sections"] = json::object();
  std::string stage = "input";
  try {
    const SystemSpec spec = load_system(sys_path, report);
    report["warnings"] = spec.sys.warnings;
    report["sections"]["system"] = system_json(spec);
    stage = "relative_degree";
    const AssumptionReport rep = check_assumptions(spec.sys, seed);
    report["sections"]["relative_degree"] = relative_degree_json(rep.relative_degree);
    stage = "assumptions";
    report["sections"]["assumptions"] = assumptions_json(rep);
  } catch (const std::exception& e) {
    record_error(report, stage, e);
  }
  return finish(std::move(report));
}

json cmd_analyze(const std::string& sys_path, const std::string& exo_path,
                 const AnalyzeSettings& s) {
  json report = header("analyze");
  report["inputs"] = json::object();
  AdaptationOptions ao;
  ao.horizon = s.horizon;
  ao.tol_y = s.tol;
  ao.bound = kBound;
  OmegaOptions oo;
  report["settings"] = settings_json(s, ao, oo);
  json sec = json::object();
  std::string stage = "input";
  try {
    const SystemSpec spec = load_system(sys_path, report);
    const ExoSpec exo = load_exo(exo_path, report);
    report["warnings"] = spec.sys.warnings;
    sec["system"] = system_json(spec);
    sec["exosystem"] = exo_json(exo.exo);

    stage = "relative_degree";
    const AssumptionReport rep = check_assumptions(spec.sys, s.seed);
    sec["relative_degree"] = relative_degree_json(rep.relative_degree);
    stage = "assumptions";
    sec["assumptions"] = assumptions_json(rep);

    stage = "poisson";
    sec["poisson"] = poisson_json(
        check_poisson_stable(exo.exo, s.horizon, kPoissonDelta, derive_seed(s.seed, 1), s.eps_stab));

    stage = "adaptation";
    const Cascade cascade(spec.sys, exo.exo);
    const std::vector<Trial> trials = make_trials(spec, exo, s.trials, s.seed);
    const AdaptationReport ar = check_adaptation(cascade, trials, ao);
    sec["adaptation"] = adaptation_json(ar);

    if (!s.trace_dir.empty()) {
      stage = "traces";
      fs::create_directories(s.trace_dir);
      json files = json::array();
      for (std::size_t k = 0; k < ar.trials.size(); ++k) {
        const auto& t = ar.trials[k];
        const Trace tr = simulate(cascade, t.trial.x0, t.trial.w0, t.horizon_used, 1000,
                                  ao.integrator);
        const std::string name = "trial_" + std::to_string(k) + ".csv";
        write_atomic((fs::path(s.trace_dir) / name).string(), tr.csv());
        files.push_back(name);
      }
      sec["adaptation"]["traces"] = files;
    }

    if (!ar.pass) {
      sec["internal_model"] = {{"skipped", "adaptation failed"}};
      report["sections"] = std::move(sec);
      report["failed_stage"] = "adaptation";
      return finish(std::move(report));
    }

    stage = "omega_limit";
    std::vector<std::optional<OmegaPoint>> cand(ar.trials.size());
    json om = json::array();
    for (std::size_t k = 0; k < ar.trials.size(); ++k) {
      const auto& t = ar.trials[k];
      OmegaOptions o = oo;
      o.horizon = t.horizon_used;
      const OmegaSample sample = omega_limit_sample(cascade, t.trial.x0, t.trial.w0, o);
      const auto cs = sample.candidates();
      json pts = json::array();
      for (std::size_t i = 0; i < std::min<std::size_t>(cs.size(), 5); ++i)
        pts.push_back(point_json(cs[i]));
      if (!cs.empty()) cand[k] = cs.front();
      om.push_back({{"trial", k},
                    {"clusters", sample.clusters.size()},
                    {"recurrent", sample.recurrent.size()},
                    {"candidates", pts},
                    {"diagnostic", sample.diagnostic},
                    {"grade", grade_json(cs.empty() ? Grade::Unknown : Grade::Sampled)}});
    }
    sec["omega_limit"] = {{"trials", om}};

    stage = "output_zeroing";
    std::vector<OmegaPoint> points;
    for (const auto& c : cand)
      if (c) points.push_back(*c);
    if (points.empty()) {
      sec["output_zeroing"] = {{"detail", "no omega-limit candidates"},
                               {"grade", grade_json(Grade::Unknown)}};
    } else {
      const ZeroingVerdict zv = verify_output_zeroing(cascade, points, s.tol, kZeroingHorizon,
                                                      ao.integrator);
      json pc = json::array();
      for (const auto& p : zv.points)
        pc.push_back({{"x", p.point.x}, {"w", p.point.w}, {"h", p.h_value},
                      {"max_h_forward", p.max_h_forward}, {"pass", p.pass}});
      sec["output_zeroing"] = {{"points", pc}, {"pass", zv.pass}, {"detail", zv.detail},
                               {"grade", grade_json(zv.grade)}};
    }

    stage = "internal_model";
    sec["internal_model"] = json::object();
    json& ims = sec["internal_model"];
    if (spec.lin) ims["linear"] = linear_pipeline(*spec.lin, exo.exo, s.eps_stab);
    const NormalFormStage nfs = normal_form_stage(spec.sys, rep, s.seed, ims);
    if (nfs.bound && nfs.im) {
      ims["embedding"] = embedding_json(*nfs.bound, *nfs.im, exo.exo);
      stage = "reproduction";
      const ParamValues params = spec.sys.numeric_params();
      json rows = json::array();
      Grade g = Grade::Proven;
      bool pass = true;
      for (std::size_t k = 0; k < cand.size(); ++k) {
        if (!cand[k]) {
          rows.push_back({{"trial", k}, {"detail", "no omega-limit candidate"},
                          {"grade", grade_json(Grade::Unknown)}});
          g = weakest(g, Grade::Unknown);
          pass = false;
          continue;
        }
        std::vector<double> z2;
        for (const auto& e : nfs.bound->z2) z2.push_back(eval_at(e, cand[k]->x, params));
        const ReproductionVerdict rv =
            verify_im_reproduction(nfs.bound->f2_zero, nfs.im->phi, params, exo.exo, cand[k]->w,
                                   z2, s.horizon, s.tol, 2000, ao.integrator);
        rows.push_back({{"trial", k}, {"w0", cand[k]->w}, {"z2_0", z2}, {"pass", rv.pass},
                        {"max_deviation", rv.max_deviation}, {"worst_time", rv.worst_time},
                        {"detail", rv.detail}, {"grade", grade_json(rv.grade)}});
        g = weakest(g, rv.grade);
        pass = pass && rv.pass;
      }
      ims["reproduction"] = {{"trials", rows}, {"pass", pass}, {"grade", grade_json(g)}};
    } else {
      ims["reproduction"] = {{"skipped", "no internal-model output map"},
                             {"grade", grade_json(Grade::Unknown)}};
    }
    report["sections"] = std::move(sec);
  } catch (const std::exception& e) {
    report["sections"] = std::move(sec);
    record_error(report, stage, e);
    report["failed_stage"] = stage;
  }
  return finish(std::move(report));
}

json cmd_simulate(const std::string& sys_path, const std::string& exo_path,
                  const std::vector<double>& x0, const std::vector<double>& w0, double horizon,
                  int samples, const std::string& trace_path) {
  json report = header("simulate");
  report["inputs"] = json::object();
  report["settings"] = {{"horizon", horizon}, {"samples", samples}};
  report["sections"] = json::object();
  std::string stage = "input";
  try {
    const SystemSpec spec = load_system(sys_path, report);
    const ExoSpec exo = load_exo(exo_path, report);
    const std::vector<double> x = !x0.empty() ? x0 : (spec.x0s.empty() ? std::vector<double>(spec.sys.n, 0.0) : spec.x0s.front());
    const std::vector<double> w = !w0.empty() ? w0 : (exo.w0s.empty() ? std::vector<double>(exo.exo.m, 0.0) : exo.w0s.front());
    if (static_cast<int>(x.size()) != spec.sys.n) throw InvalidInput("x0 has the wrong dimension");
    if (static_cast<int>(w.size()) != exo.exo.m) throw InvalidInput("w0 has the wrong dimension");
    if (!(horizon > 0) || samples < 1) throw InvalidInput("horizon and samples must be positive");
    stage = "simulation";
    const Cascade cascade(spec.sys, exo.exo);
    IntegratorOptions io;
    io.bound = kBound;
    const Trace tr = simulate(cascade, x, w, horizon, samples, io);
    write_atomic(trace_path, tr.csv());
    double max_y = 0.0;
    for (double y : tr.y) max_y = std::max(max_y, std::abs(y));
    report["sections"]["simulation"] = {{"x0", x},
                                        {"w0", w},
                                        {"trace", fs::path(trace_path).filename().string()},
                                        {"points", tr.t.size()},
                                        {"method", tr.method},
                                        {"accepted", tr.accepted},
                                        {"rejected", tr.rejected},
                                        {"bound_exceeded", tr.bound_exceeded},
                                        {"final_x", tr.x.back()},
                                        {"final_y", tr.y.back()},
                                        {"max_abs_y", max_y}};
  } catch (const std::exception& e) {
    record_error(report, stage, e);
  }
  return finish(std::move(report));
}

json cmd_extract_im(const std::string& sys_path, const std::string& exo_path, double eps_stab) {
  json report = header("extract-im");
  report["inputs"] = json::object();
  report["settings"] = {{"eps_stab", eps_stab}, {"pairing_tolerance", kPairingTolerance}};
  json sec = json::object();
  std::string stage = "input";
  try {
    const SystemSpec spec = load_system(sys_path, report);
    const ExoSpec exo = load_exo(exo_path, report);
    report["warnings"] = spec.sys.warnings;
    stage = "relative_degree";
    const AssumptionReport rep = check_assumptions(spec.sys, 0);
    sec["relative_degree"] = relative_degree_json(rep.relative_degree);
    stage = "internal_model";
    sec["internal_model"] = json::object();
    json& ims = sec["internal_model"];
    if (spec.lin) ims["linear"] = linear_pipeline(*spec.lin, exo.exo, eps_stab);
    if (rep.relative_degree.status == RelDegree::Status::Uniform) {
      const NormalFormStage nfs = normal_form_stage(spec.sys, rep, 0, ims);
      if (nfs.bound && nfs.im) ims["embedding"] = embedding_json(*nfs.bound, *nfs.im, exo.exo);
    }
    report["sections"] = std::move(sec);
  } catch (const std::exception& e) {
    report["sections"] = std::move(sec);
    record_error(report, stage, e);
  }
  return finish(std::move(report));
}

json cmd_embed(const std::string& path, double tol) {
  json report = header("embed");
  report["inputs"] = json::object();
  report["settings"] = {{"tol", tol}};
  report["sections"] = json::object();
  std::string stage = "input";
  try {
    std::string raw;
    const json j = read_json_file(path, &raw);
    report["inputs"]["embedding"] = input_entry(path, raw);
    if (!j.is_object()) throw InvalidInput("embedding spec must be a JSON object");
    if (j.value("schema_version", 0) != kSchemaVersion)
      throw InvalidInput("embedding spec: unsupported schema_version");
    auto mat = [&](const char* key) {
      if (!j.contains(key)) throw InvalidInput(std::string("embedding spec: missing key '") + key + "'");
      const json& m = j.at(key);
      if (!m.is_array() || m.empty()) throw InvalidInput(std::string(key) + " must be a matrix");
      Eigen::MatrixXd out(m.size(), m[0].is_array() ? m[0].size() : 0);
      for (std::size_t r = 0; r < m.size(); ++r) {
        if (!m[r].is_array() || m[r].size() != static_cast<std::size_t>(out.cols()))
          throw InvalidInput(std::string(key) + " rows must have equal length");
        for (std::size_t c = 0; c < m[r].size(); ++c)
          out(r, c) = json_rational(m[r][c], key).get_d();
      }
      return out;
    };
    auto row = [&](const char* key) {
      if (!j.contains(key)) throw InvalidInput(std::string("embedding spec: missing key '") + key + "'");
      const json& v = j.at(key);
      if (!v.is_array()) throw InvalidInput(std::string(key) + " must be a vector");
      Eigen::RowVectorXd out(v.size());
      for (std::size_t c = 0; c < v.size(); ++c) out(c) = json_rational(v[c], key).get_d();
      return out;
    };
    const Eigen::MatrixXd Q = mat("Q"), F = mat("F");
    const Eigen::RowVectorXd theta = row("theta"), phi = row("phi");
    if (Q.rows() != Q.cols() || theta.size() != Q.rows())
      throw InvalidInput("Q must be square and match theta");
    if (F.rows() != F.cols() || phi.size() != F.rows())
      throw InvalidInput("F must be square and match phi");
    stage = "embedding";
    try {
      const EmbeddingResult e = solve_embedding(Q, theta, F, phi, tol);
      report["sections"]["embedding"] = {{"T", matrix_json(e.T)},
                                         {"P", matrix_json(e.P)},
                                         {"block_form", matrix_json(e.block_form)},
                                         {"orientation", e.orientation},
                                         {"reduced_F", e.reduced_F},
                                         {"reduced_Q", e.reduced_Q},
                                         {"matching_residual", e.matching_residual},
                                         {"residual_FT", e.residual_FT},
                                         {"residual_phi", e.residual_phi},
                                         {"min_singular_value", e.min_singular_value},
                                         {"grade", grade_json(Grade::Sampled)}};
    } catch (const NoEmbedding& e) {
      report["sections"]["embedding"] = {{"detail", e.what()}, {"grade", grade_json(Grade::Failed)}};
    }
  } catch (const std::exception& e) {
    record_error(report, stage, e);
  }
  return finish(std::move(report));
}

json cmd_example(const std::string& name, const std::string& dir) {
  json report = header("example");
  report["sections"] = json::object();
  try {
    const Preset p = preset(name);
    fs::create_directories(dir);
    const std::string sys_file = p.name + ".system.json";
    const std::string exo_file = p.name + ".exo.json";
    const std::string readme = p.name + ".README.md";
    write_atomic((fs::path(dir) / sys_file).string(), p.system.dump(2) + "\n");
    write_atomic((fs::path(dir) / exo_file).string(), p.exo.dump(2) + "\n");
    write_atomic((fs::path(dir) / readme).string(), p.readme);
    report["sections"]["example"] = {{"name", p.name},
                                     {"files", {sys_file, exo_file, readme}}};
  } catch (const std::exception& e) {
    record_error(report, "example", e);
  }
  return finish(std::move(report));
}

// ---------------------------------------------------------------------------

namespace {

int emit(const json& report, const std::string& report_path, std::ostream& out, std::ostream& err) {
  const std::string text = report.dump(2) + "\n";
  if (report_path.empty()) {
    out << text;
  } else {
    try {
      write_atomic(report_path, text);
    } catch (const Error& e) {
      err << "imk: " << e.what() << "\n";
      return kInvalidInput;
    }
  }
  if (report.contains("error"))
    err << "imk: " << report["error"].value("stage", "") << ": "
        << report["error"].value("message", "") << "\n";
  return exit_code_for(report);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Internal-model analysis for adapting control-affine systems", "imk"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "Print the version and exit");

  std::string report_path;
  std::uint64_t seed = 0;

  auto* check = app.add_subcommand("check", "Relative degree and structural assumptions");
  std::string sys_path;
  check->add_option("system", sys_path, "System spec (JSON)")->required();
  check->add_option("--seed", seed, "Seed for sampled checks");
  check->add_option("--report", report_path, "Write the report here instead of stdout");

  auto* analyze = app.add_subcommand("analyze", "Full internal-model pipeline");
  std::string exo_path;
  AnalyzeSettings as;
  analyze->add_option("system", sys_path, "System spec (JSON)")->required();
  analyze->add_option("exosystem", exo_path, "Exosystem spec (JSON)")->required();
  analyze->add_option("--horizon", as.horizon, "Simulation horizon")->check(CLI::PositiveNumber);
  analyze->add_option("--tol", as.tol, "Tolerance on |y| and on reproduction")->check(CLI::PositiveNumber);
  analyze->add_option("--trials", as.trials, "Random trials when the specs list no states")->check(CLI::PositiveNumber);
  analyze->add_option("--seed", as.seed, "Seed");
  analyze->add_option("--eps-stab", as.eps_stab, "Stability margin")->check(CLI::PositiveNumber);
  analyze->add_option("--trace-dir", as.trace_dir, "Write one CSV trace per trial here");
  analyze->add_option("--report", report_path, "Write the report here instead of stdout");

  auto* sim = app.add_subcommand("simulate", "Simulate the cascade and write a CSV trace");
  std::vector<double> x0, w0;
  double horizon = 50.0;
  int samples = 1000;
  std::string trace_path = "trace.csv";
  sim->add_option("system", sys_path, "System spec (JSON)")->required();
  sim->add_option("exosystem", exo_path, "Exosystem spec (JSON)")->required();
  sim->add_option("--x0", x0, "Initial state, comma separated")->delimiter(',');
  sim->add_option("--w0", w0, "Initial exosystem state, comma separated")->delimiter(',');
  sim->add_option("--horizon", horizon, "Horizon");
  sim->add_option("--samples", samples, "Number of output intervals");
  sim->add_option("--trace", trace_path, "CSV output path");
  sim->add_option("--report", report_path, "Write the report here instead of stdout");

  auto* extract = app.add_subcommand("extract-im", "Internal model without simulation");
  double eps = kEpsStab;
  extract->add_option("system", sys_path, "System spec (JSON)")->required();
  extract->add_option("exosystem", exo_path, "Exosystem spec (JSON)")->required();
  extract->add_option("--eps-stab", eps, "Stability margin");
  extract->add_option("--report", report_path, "Write the report here instead of stdout");

  auto* embed = app.add_subcommand("embed", "Embed (Q, theta) into (F, phi)");
  std::string embed_path;
  double tol = kEmbeddingTol;
  embed->add_option("spec", embed_path, "JSON with Q, theta, F, phi")->required();
  embed->add_option("--tol", tol, "Residual tolerance");
  embed->add_option("--report", report_path, "Write the report here instead of stdout");

  auto* example = app.add_subcommand("example", "Write a preset system and exosystem");
  std::string name, dir = ".";
  example->add_option("name", name, "ecoli, linear-integrator or linear-harmonic")->required();
  example->add_option("--dir", dir, "Output directory");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "imk: " << e.what() << "\n";
    return kInvalidInput;
  }
  if (version) {
    out << "imk " << kVersion << "\n";
    return kPass;
  }

  json report;
  if (*check) report = cmd_check(sys_path, seed);
  else if (*analyze) report = cmd_analyze(sys_path, exo_path, as);
  else if (*sim) report = cmd_simulate(sys_path, exo_path, x0, w0, horizon, samples, trace_path);
  else if (*extract) report = cmd_extract_im(sys_path, exo_path, eps);
  else if (*embed) report = cmd_embed(embed_path, tol);
  else if (*example) report = cmd_example(name, dir);
  else {
    err << app.help();
    return kInvalidInput;
  }
  return emit(report, report_path, out, err);
}

}  // namespace imk::cli
