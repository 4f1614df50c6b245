#include <cmath>
#include <limits>

#include "imk/error.hpp"
#include "imk/linpoly.hpp"

namespace imk {

LinearAdaptation check_linear_adaptation(const RationalFn& s, const RationalFn& g,
                                         double eps_stab, double pairing_tol) {
  LinearAdaptation out;
  out.eps_stab = eps_stab;
  out.pairing_tolerance = pairing_tol;
  out.product = g * s;

  std::vector<Complex> zeros =
      out.product.num.is_zero() ? std::vector<Complex>{} : poly_roots(out.product.num);
  std::vector<Complex> poles = poly_roots(out.product.den);
  std::vector<bool> used(zeros.size(), false);
  for (const Complex& p : poles) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = zeros.size();
    for (std::size_t i = 0; i < zeros.size(); ++i) {
      if (used[i]) continue;
      double d = std::abs(zeros[i] - p);
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    if (arg < zeros.size() && best <= pairing_tol) {
      used[arg] = true;
      out.paired.push_back(p);
    } else {
      out.poles.push_back(p);
    }
  }

  out.stable = true;
  for (const Complex& p : out.poles)
    if (!(p.real() < -eps_stab)) {
      out.stable = false;
      out.detail = "pole " + std::to_string(p.real()) + (p.imag() >= 0 ? "+" : "") +
                   std::to_string(p.imag()) + "i has real part >= -eps";
      break;
    }
  // The exact Routh test certifies the verdict when no numeric pairing was
  // needed and both agree.
  const bool exact = out.paired.empty() && is_hurwitz(out.product.den) == out.stable;
  if (out.stable)
    out.grade = exact ? Grade::Proven : Grade::Sampled;
  else
    out.grade = Grade::Failed;
  if (out.stable && out.detail.empty()) out.detail = "all poles of GS have negative real part";
  return out;
}

LinearIMResult extract_internal_model_linear(const RationalFn& s, const Poly& pi,
                                             double eps_stab) {
  if (pi.degree() < 1) throw InvalidInput("pi must have degree >= 1");
  if (!pi.is_monic()) throw InvalidInput("pi must be monic");
  for (const Complex& r : poly_roots(pi))
    if (r.real() < -eps_stab)
      throw InvalidInput("pi has a stable mode; the exosystem must have no stable modes");
  if (s.num.is_zero()) throw InvalidInput("S has p identically zero; no internal model defined");

  auto [p0, rem] = poly_divmod(s.num, pi);
  if (!rem.is_zero())
    throw NoInternalModel("pi = " + to_string(pi) + " does not divide p = " + to_string(s.num) +
                          " (remainder " + to_string(rem) + ")");

  LinearIMResult out;
  out.pi = pi;
  out.p0 = std::move(p0);
  auto [a, b] = poly_divmod(s.den, s.num);
  out.a = std::move(a);
  out.b = std::move(b);
  out.b1 = out.b;
  out.b2 = Poly{1};

  const int l = pi.degree();
  out.companion.assign(l, RatVector(l));
  for (int i = 0; i + 1 < l; ++i) out.companion[i][i + 1] = 1;
  for (int j = 0; j < l; ++j) out.companion[l - 1][j] = -pi.coeff(j);
  out.input.assign(l, 0);
  out.input[l - 1] = 1;
  out.output.assign(l, 0);
  for (int j = 0; j <= out.b2.degree(); ++j) out.output[j] = out.b2.coeff(j);
  return out;
}

}  // namespace imk
