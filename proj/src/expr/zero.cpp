#include <algorithm>
#include <cmath>
#include <random>

#include "imk/error.hpp"
#include "imk/expr.hpp"

namespace imk {

std::string_view to_string(ZeroStatus::Kind k) {
  switch (k) {
    case ZeroStatus::Kind::ProvenZero: return "ProvenZero";
    case ZeroStatus::Kind::ProvenNonzeroConstant: return "ProvenNonzeroConstant";
    case ZeroStatus::Kind::SampledZero: return "SampledZero";
    case ZeroStatus::Kind::SampledNonzero: return "SampledNonzero";
  }
  return "?";
}

std::string_view to_string(NonvanishingStatus::Kind k) {
  switch (k) {
    case NonvanishingStatus::Kind::ProvenNonzero: return "ProvenNonzero";
    case NonvanishingStatus::Kind::SampledNonzero: return "SampledNonzero";
    case NonvanishingStatus::Kind::Vanishes: return "Vanishes";
    case NonvanishingStatus::Kind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

// Open unit interval (0, 1), portable across standard libraries.
double unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

struct Sampler {
  Sampler(const Expr& e, std::uint64_t seed, const SampleDomain& domain)
      : rng(seed), domain(domain) {
    dim = std::max({domain.dim, static_cast<int>(domain.box.size()), e.max_variable()});
    for (const auto& p : e.parameters())
      if (!domain.params.count(p)) unbound.push_back(p);
  }

  std::vector<double> draw_x() {
    std::vector<double> x(dim);
    for (int i = 0; i < dim; ++i) {
      Interval iv = i < static_cast<int>(domain.box.size()) ? domain.box[i] : Interval{};
      x[i] = iv.lo + unit(rng) * (iv.hi - iv.lo);
    }
    return x;
  }

  ParamValues draw_params() {
    ParamValues p = domain.params;
    for (const auto& name : unbound) p[name] = 3.0 * unit(rng);
    return p;
  }

  std::mt19937_64 rng;
  const SampleDomain& domain;
  int dim = 0;
  std::vector<std::string> unbound;
};

std::optional<double> try_eval(const Expr& e, const std::vector<double>& x, const ParamValues& p) {
  try {
    double v = eval(e, x, p);
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

constexpr int kAttemptFactor = 64;

}  // namespace

ZeroStatus is_zero(const Expr& e, std::uint64_t seed, const SampleDomain& domain) {
  ZeroStatus st;
  if (e.is_zero()) return st;
  if (e.as_rational()) {
    st.kind = ZeroStatus::Kind::ProvenNonzeroConstant;
    return st;
  }
  Sampler s(e, seed, domain);
  int attempts = 0;
  while (st.samples < kMinSamples && attempts < kAttemptFactor * kMinSamples) {
    ++attempts;
    std::vector<double> x = s.draw_x();
    ParamValues p = s.draw_params();
    auto v = try_eval(e, x, p);
    if (!v) continue;
    ++st.samples;
    st.max_abs = std::max(st.max_abs, std::abs(*v));
    if (std::abs(*v) > kWitnessThreshold && !st.witness)
      st.witness = SamplePoint{std::move(x), std::move(p), *v};
  }
  if (st.samples < kMinSamples)
    throw ZeroTestUnknown("zero test inconclusive: only " + std::to_string(st.samples) +
                          " evaluable sample points for " + to_string(e));
  st.kind = st.witness ? ZeroStatus::Kind::SampledNonzero : ZeroStatus::Kind::SampledZero;
  return st;
}

NonvanishingStatus check_nonvanishing(const Expr& e, std::uint64_t seed,
                                      const SampleDomain& domain) {
  NonvanishingStatus st;
  if (e.is_zero()) {
    st.kind = NonvanishingStatus::Kind::Vanishes;
    st.root = SamplePoint{std::vector<double>(std::max(domain.dim, 0), 0.0), domain.params, 0.0};
    st.detail = "identically zero";
    return st;
  }
  if (auto c = e.as_rational()) {
    st.kind = NonvanishingStatus::Kind::ProvenNonzero;
    st.min_abs = std::abs(c->get_d());
    st.detail = "nonzero rational constant";
    return st;
  }

  Sampler s(e, seed, domain);
  const int draws = s.unbound.empty() ? 1 : 8;
  const int per_draw = s.unbound.empty() ? 2 * kMinSamples : kMinSamples;
  st.min_abs = INFINITY;
  bool near_zero = false;

  for (int d = 0; d < draws; ++d) {
    const ParamValues p = s.draw_params();
    std::optional<std::vector<double>> pos, neg;
    int got = 0;
    for (int attempt = 0; got < per_draw && attempt < kAttemptFactor * per_draw; ++attempt) {
      std::vector<double> x = s.draw_x();
      auto v = try_eval(e, x, p);
      if (!v) continue;
      ++got;
      ++st.samples;
      st.min_abs = std::min(st.min_abs, std::abs(*v));
      if (std::abs(*v) <= kWitnessThreshold) near_zero = true;
      if (*v > 0 && !pos) pos = x;
      if (*v < 0 && !neg) neg = x;
    }
    if (got == 0) {
      st.kind = NonvanishingStatus::Kind::Inconclusive;
      st.detail = "no evaluable sample points";
      return st;
    }
    if (pos && neg) {
      // Bisect the segment between opposite-sign samples.
      std::vector<double> a = *pos, b = *neg, mid(a.size());
      double vm = 0.0;
      bool ok = true;
      for (int it = 0; it < 200; ++it) {
        for (std::size_t i = 0; i < a.size(); ++i) mid[i] = 0.5 * (a[i] + b[i]);
        auto v = try_eval(e, mid, p);
        if (!v) {
          ok = false;
          break;
        }
        vm = *v;
        if (std::abs(vm) < 1e-14) break;
        (vm > 0 ? a : b) = mid;
      }
      if (ok && std::abs(vm) <= kWitnessThreshold) {
        st.kind = NonvanishingStatus::Kind::Vanishes;
        st.root = SamplePoint{mid, p, vm};
        st.detail = "sign change with a root on the connecting segment";
        return st;
      }
      st.kind = NonvanishingStatus::Kind::Inconclusive;
      st.detail = "sign change across a singularity";
      return st;
    }
  }
  if (near_zero) {
    st.kind = NonvanishingStatus::Kind::Inconclusive;
    st.detail = "near-zero samples present";
    return st;
  }
  st.kind = NonvanishingStatus::Kind::SampledNonzero;
  st.detail = "constant sign at every sample";
  return st;
}

}  // namespace imk
