#include "imk/cli.hpp"
#include "imk/error.hpp"

namespace imk::cli {

namespace {

Preset ecoli() {
  Preset p;
  p.name = "ecoli";
  p.system = {
      {"schema_version", kSchemaVersion},
      {"kind", "nonlinear"},
      {"state_dim", 2},
      {"params", {{"a1", 1.0}, {"a2", 1.0}, {"a3", 1.0}, {"a4", 1.0}, {"a5", 1.0}, {"a6", 1.0}}},
      {"f", {"a1 - a2*x1 + a3*x2", "a5 - a6*x2"}},
      {"g", {"-a4*x1", "a4*x1"}},
      {"h", "(a1 + a5) - (a2*x1 + (a6 - a3)*x2)"},
      // Concentrations: the positive orthant, truncated for sampling.
      {"domain", {{1e-6, 10.0}, {1e-6, 10.0}}},
      {"x0", {{1.0, 1.0}}},
  };
  p.exo = {
      {"schema_version", kSchemaVersion},
      {"kind", "constant"},
      {"w0", {{0.5}, {1.0}, {2.0}}},
  };
  p.readme = R"(# ecoli

Receptor model x1 = R, x2 = RL with ligand u = L:

    x1' = a1 - a2*x1 + a3*x2 - a4*x1*u
    x2' = a5 - a6*x2 + a4*x1*u
    y   = (a1 + a5) - (a2*x1 + (a6 - a3)*x2)

Parameters a1..a6 default to 1. Exosystem: constants w' = 0, u = w, with
w0 in {0.5, 1, 2}; x0 = (1, 1).

Expected report values (`imk analyze ecoli.system.json ecoli.exo.json`):

- relative_degree: r = 1, L_g h = a2*a4*x1 + a3*a4*x1 - a4*a6*x1
- assumptions: tau_1 constant, completeness and commutativity Proven
- adaptation: every trial passes with max final |y| < 1e-6
- omega-limit candidates near (2, 1 + 2u), that is (2, 2), (2, 3), (2, 5)
- internal model: W = (1, 1), z2 = x1 + x2, z2' = zeta1 (= y),
  phi = 1/2*z2_1 - 3/2, reproduction passes for each u
- the origin warning is expected: f(0) != 0 and h(0) != 0 in these
  coordinates
)";
  return p;
}

Preset linear_integrator() {
  // s(s+3) / ((s+1)(s+2)(s+4)) in controller form.
  Preset p;
  p.name = "linear-integrator";
  p.system = {
      {"schema_version", kSchemaVersion},
      {"kind", "linear"},
      {"state_dim", 3},
      {"A", {{0, 1, 0}, {0, 0, 1}, {-8, -14, -7}}},
      {"b", {0, 0, 1}},
      {"c", {0, 3, 1}},
      {"x0", {{0.0, 0.0, 0.0}, {1.0, -1.0, 0.5}}},
  };
  p.exo = {
      {"schema_version", kSchemaVersion},
      {"kind", "constant"},
      {"w0", {{1.0}, {-0.5}}},
  };
  p.readme = R"(# linear-integrator

Transfer function S = s(s+3) / ((s+1)(s+2)(s+4)) realized in controller
form; exosystem of constants (pi = s).

Expected report values:

- relative_degree: r = 1
- linear pipeline: q = a p + b with a = s + 4, b = 2*s + 8; p0 = s + 3;
  G S stable (Proven); internal model companion has characteristic
  polynomial s
- embedding residuals below 1e-8
- reproduction passes on every trial
)";
  return p;
}

Preset linear_harmonic() {
  // (s^2 + 4) / ((s+1)(s+2)(s+3)) in controller form.
  Preset p;
  p.name = "linear-harmonic";
  p.system = {
      {"schema_version", kSchemaVersion},
      {"kind", "linear"},
      {"state_dim", 3},
      {"A", {{0, 1, 0}, {0, 0, 1}, {-6, -11, -6}}},
      {"b", {0, 0, 1}},
      {"c", {4, 0, 1}},
      {"x0", {{0.0, 0.0, 0.0}, {0.5, -0.5, 1.0}}},
  };
  p.exo = {
      {"schema_version", kSchemaVersion},
      {"kind", "harmonic"},
      {"omega", 2},
      {"w0", {{1.0, 0.0}, {0.0, 1.0}}},
  };
  p.readme = R"(# linear-harmonic

Transfer function S = (s^2 + 4) / ((s+1)(s+2)(s+3)); exosystem
w1' = w2, w2' = -4 w1, u = w1 (pi = s^2 + 4).

Expected report values:

- relative_degree: r = 1
- linear pipeline: pi divides p, p0 = 1; G S stable (Proven);
  internal model companion has characteristic polynomial s^2 + 4
- normal form: z2' = (z2_2, -4*z2_1) at zeta = 0, phi = -18*z2_1 + 7*z2_2
- embedding residuals below 1e-8
- reproduction passes on every trial
)";
  return p;
}

}  // namespace

std::vector<std::string> preset_names() { return {"ecoli", "linear-integrator", "linear-harmonic"}; }

Preset preset(const std::string& name) {
  if (name == "ecoli") return ecoli();
  if (name == "linear-integrator") return linear_integrator();
  if (name == "linear-harmonic") return linear_harmonic();
  throw InvalidInput("unknown example '" + name + "' (expected ecoli, linear-integrator or linear-harmonic)");
}

}  // namespace imk::cli
