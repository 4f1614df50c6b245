#include <fstream>
#include <sstream>

#include "imk/cli.hpp"
#include "imk/error.hpp"

namespace imk::cli {

namespace {

const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw InvalidInput(where + ": missing key '" + key + "'");
  return j.at(key);
}

void check_schema_version(const json& j, const std::string& where) {
  const json& v = require(j, "schema_version", where);
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw InvalidInput(where + ": unsupported schema_version (expected " +
                       std::to_string(kSchemaVersion) + ")");
}

std::vector<std::string> string_list(const json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw InvalidInput(what + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

double json_double(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return json_rational(v, what).get_d();
  throw InvalidInput(what + " must be a number");
}

RatVector rat_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + " must be an array");
  RatVector out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(json_rational(j[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

RatMatrix rat_matrix(const json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidInput(what + " must be an array of rows");
  RatMatrix out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(rat_vector(j[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<double>> state_list(const json& j, int dim, const std::string& what) {
  std::vector<std::vector<double>> out;
  if (!j.is_array()) throw InvalidInput(what + " must be an array");
  // A single vector is accepted as a one-element list.
  const bool single = !j.empty() && !j[0].is_array();
  const json list = single ? json::array({j}) : j;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const json& v = list[k];
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
      throw InvalidInput(what + "[" + std::to_string(k) + "] must have " + std::to_string(dim) +
                         " entries");
    std::vector<double> x;
    for (const auto& e : v) x.push_back(json_double(e, what));
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

Rational json_rational(const json& v, const std::string& what) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_number()) return rational_from_double(v.get<double>());
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const Error&) {
      throw InvalidInput(what + ": '" + v.get<std::string>() + "' is not a rational literal");
    }
  }
  throw InvalidInput(what + " must be a number or a rational string");
}

json read_json_file(const std::string& path, std::string* raw) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  if (raw) *raw = text;
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": malformed JSON (" + e.what() + ")");
  }
}

SystemSpec parse_system_spec(const json& j) {
  const std::string where = "system spec";
  if (!j.is_object()) throw InvalidInput(where + " must be a JSON object");
  check_schema_version(j, where);
  SystemSpec spec;
  const json& kind = require(j, "kind", where);
  if (!kind.is_string()) throw InvalidInput(where + ": kind must be a string");
  spec.kind = kind.get<std::string>();
  const json& nd = require(j, "state_dim", where);
  if (!nd.is_number_integer() || nd.get<int>() < 1)
    throw InvalidInput(where + ": state_dim must be a positive integer");
  const int n = nd.get<int>();

  if (spec.kind == "nonlinear") {
    std::vector<std::string> names;
    std::map<std::string, Rational> values;
    if (j.contains("params")) {
      const json& p = j.at("params");
      if (!p.is_object()) throw InvalidInput(where + ": params must be an object");
      for (const auto& [name, v] : p.items()) {
        names.push_back(name);
        if (!v.is_null()) values[name] = json_rational(v, "params." + name);
      }
    }
    std::vector<Interval> domain;
    if (j.contains("domain")) {
      const json& d = j.at("domain");
      if (!d.is_array() || static_cast<int>(d.size()) != n)
        throw InvalidInput(where + ": domain must list one [lo, hi] per state");
      for (const auto& iv : d) {
        if (!iv.is_array() || iv.size() != 2) throw InvalidInput(where + ": domain entries are [lo, hi]");
        domain.push_back({json_double(iv[0], "domain"), json_double(iv[1], "domain")});
      }
    }
    const json& h = require(j, "h", where);
    if (!h.is_string()) throw InvalidInput(where + ": h must be a string");
    spec.sys = parse_affine_system(n, names, values, string_list(require(j, "f", where), "f"),
                                   string_list(require(j, "g", where), "g"), h.get<std::string>(),
                                   domain);
  } else if (spec.kind == "linear") {
    LinSys lin;
    lin.A = rat_matrix(require(j, "A", where), "A");
    lin.b = rat_vector(require(j, "b", where), "b");
    lin.c = rat_vector(require(j, "c", where), "c");
    lin.validate();
    if (lin.n() != n) throw InvalidInput(where + ": A does not match state_dim");
    spec.sys = to_affine_system(lin);
    spec.lin = std::move(lin);
  } else {
    throw InvalidInput(where + ": kind must be \"nonlinear\" or \"linear\"");
  }
  if (j.contains("x0")) spec.x0s = state_list(j.at("x0"), n, "x0");
  return spec;
}

ExoSpec parse_exo_spec(const json& j) {
  const std::string where = "exosystem spec";
  if (!j.is_object()) throw InvalidInput(where + " must be a JSON object");
  check_schema_version(j, where);
  const json& kind = require(j, "kind", where);
  if (!kind.is_string()) throw InvalidInput(where + ": kind must be a string");
  const std::string k = kind.get<std::string>();
  ExoSpec spec;
  if (k == "constant") {
    spec.exo = constant_exosystem();
  } else if (k == "harmonic") {
    spec.exo = harmonic_exosystem(json_rational(require(j, "omega", where), "omega"));
  } else if (k == "ode_coeffs") {
    spec.exo = from_ode_coeffs(rat_vector(require(j, "coeffs", where), "coeffs"));
  } else if (k == "linear") {
    spec.exo = Exosystem::linear(rat_matrix(require(j, "Q", where), "Q"),
                                 rat_vector(require(j, "theta", where), "theta"));
  } else if (k == "symbolic") {
    const json& d = require(j, "dim", where);
    if (!d.is_number_integer() || d.get<int>() < 1)
      throw InvalidInput(where + ": dim must be a positive integer");
    const int m = d.get<int>();
    std::vector<std::string> names;
    ParamValues values;
    if (j.contains("params")) {
      const json& p = j.at("params");
      if (!p.is_object()) throw InvalidInput(where + ": params must be an object");
      for (const auto& [name, v] : p.items()) {
        names.push_back(name);
        values[name] = json_double(v, "params." + name);
      }
    }
    VectorField q;
    for (const auto& s : string_list(require(j, "Q", where), "Q"))
      q.components.push_back(parse(s, m, names, 'w'));
    if (q.dim() != m) throw InvalidInput(where + ": Q must have dim entries");
    const json& th = require(j, "theta", where);
    if (!th.is_string()) throw InvalidInput(where + ": theta must be a string");
    spec.exo = Exosystem::symbolic(std::move(q), parse(th.get<std::string>(), m, names, 'w'),
                                   std::move(values));
  } else {
    throw InvalidInput(where + ": unknown kind '" + k + "'");
  }
  if (j.contains("w0")) spec.w0s = state_list(j.at("w0"), spec.exo.m, "w0");
  return spec;
}

}  // namespace imk::cli
