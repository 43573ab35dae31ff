#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "sepath/common.hpp"
#include "sepath/dataset.hpp"

namespace sepath {

// Declarative cause-specific hazard lambda(t; r, x, a).  The rate coefficient
// is scale * (base + x_load . x + a_load * a); the time profile is constant,
// linear in study time, or linear in sojourn time (2->3 only).
struct HazardSpec {
  enum class Form { constant, linear_in_t, linear_in_sojourn };
  Form form = Form::constant;
  double scale = 0.0;
  double base = 0.0;
  std::vector<double> x_load;
  double a_load = 1.0;

  double coefficient(const std::vector<double>& x, int a) const {
    double c = base + a_load * static_cast<double>(a);
    for (std::size_t j = 0; j < x_load.size() && j < x.size(); ++j)
      c += x_load[j] * x[j];
    c *= scale;
    if (c < 0.0) throw ConfigError("negative hazard coefficient");
    return c;
  }

  // Cumulative hazard on the spec's own clock.
  double cumulative(double t, double coef) const {
    switch (form) {
      case Form::constant: return coef * t;
      default: return 0.5 * coef * t * t;
    }
  }
  double rate(double t, double coef) const {
    switch (form) {
      case Form::constant: return coef;
      default: return coef * t;
    }
  }
  // Solves cumulative(t) = e for t; closed form for both supported profiles.
  double invert(double e, double coef) const {
    if (coef <= 0.0) return std::numeric_limits<double>::infinity();
    switch (form) {
      case Form::constant: return e / coef;
      default: return std::sqrt(2.0 * e / coef);
    }
  }
};

struct HazardTriple {
  HazardSpec h1, h2, h3;
};

// Paper settings: covariates (x1,x2) iid on {0.5,1}, propensity
// expit(0.4 x1 + 0.8 x2 - 0.6).
inline HazardTriple setting_hazards(int setting_id) {
  using F = HazardSpec::Form;
  switch (setting_id) {
    case 1:
      return {{F::constant, 0.15, 0.0, {1.0, 0.0}},
              {F::constant, 0.10, 0.0, {1.0, 0.0}},
              {F::constant, 0.20, 0.0, {0.0, 1.0}}};
    case 2:
      return {{F::linear_in_t, 0.04, 0.0, {1.0, 0.0}},
              {F::linear_in_t, 0.02, 0.0, {1.0, 0.0}},
              {F::linear_in_t, 0.05, 0.0, {0.0, 1.0}}};
    case 3:
      return {{F::linear_in_t, 0.04, 0.0, {1.0, 0.0}},
              {F::linear_in_t, 0.02, 0.0, {1.0, 0.0}},
              {F::linear_in_sojourn, 0.10, 0.0, {0.0, 1.0}}};
    default:
      throw ConfigError("unknown setting id: " + std::to_string(setting_id));
  }
}

inline const std::vector<double> kPropensityTruth = {-0.6, 0.4, 0.8};  // intercept, x1, x2

inline double true_propensity(const std::vector<double>& x) {
  double lin = kPropensityTruth[0];
  for (std::size_t j = 0; j + 1 < kPropensityTruth.size() && j < x.size(); ++j)
    lin += kPropensityTruth[j + 1] * x[j];
  return expit(lin);
}

struct CensoringConfig {
  double admin_tau = 10.0;
  double exp_rate = 0.02;  // independent exponential loss to follow-up
};

struct SimulationConfig {
  int setting_id = 1;           // 1..3, or 0 with custom hazards
  std::optional<HazardTriple> custom;
  std::size_t n = 500;
  std::uint64_t seed = 1;
  CensoringConfig censoring;
  bool no_censoring = false;
  std::optional<int> force_arm;          // bypass the assignment mechanism
  std::optional<std::vector<double>> force_x;
  // Treatment loading multiplier: 0 turns off all treatment effects (null).
  double treatment_loading = 1.0;

  HazardTriple hazards() const {
    HazardTriple h = custom ? *custom : setting_hazards(setting_id);
    h.h1.a_load *= treatment_loading;
    h.h2.a_load *= treatment_loading;
    h.h3.a_load *= treatment_loading;
    return h;
  }
};

inline std::vector<std::vector<double>> draw_covariates(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::vector<double>> x(n, std::vector<double>(2));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& row : x) {
    row[0] = u(rng) < 0.5 ? 0.5 : 1.0;
    row[1] = u(rng) < 0.5 ? 0.5 : 1.0;
  }
  return x;
}

inline int assign_treatment(const std::vector<double>& x, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < true_propensity(x) ? 1 : 0;
}

struct LatentPath {
  double t = 0.0;   // terminal time
  double r = 0.0;   // intermediate time; r > t means no intermediate event
  bool via_intermediate = false;
};

// First transition by inversion of the total hazard Lambda1 + Lambda2, cause
// chosen proportionally to the cause-specific rates at the transition time;
// then the 2->3 time on its own clock if the intermediate event came first.
inline LatentPath draw_event_times(const HazardTriple& spec, const std::vector<double>& x,
                                   const ComponentVector& a, std::mt19937_64& rng) {
  const double c1 = spec.h1.coefficient(x, a.a1);
  const double c2 = spec.h2.coefficient(x, a.a2);
  const double c3 = spec.h3.coefficient(x, a.a3);
  if (spec.h1.form != spec.h2.form)
    throw ConfigError("transitions 1 and 2 must share a hazard form");

  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  LatentPath path;
  const double e12 = exp1(rng);
  const double s = spec.h1.invert(e12, c1 + c2);  // shared profile, shared clock
  if (!std::isfinite(s)) {
    path.t = path.r = std::numeric_limits<double>::infinity();
    return path;
  }
  const double r1 = spec.h1.rate(s, c1);
  const double r2 = spec.h2.rate(s, c2);
  if (u(rng) < r1 / (r1 + r2)) {
    path.t = s;
    path.r = std::numeric_limits<double>::infinity();
    return path;
  }
  path.r = s;
  path.via_intermediate = true;
  const double e3 = exp1(rng);
  if (spec.h3.form == HazardSpec::Form::linear_in_sojourn) {
    path.t = s + spec.h3.invert(e3, c3);
  } else if (spec.h3.form == HazardSpec::Form::constant) {
    path.t = s + e3 / (c3 > 0.0 ? c3 : std::numeric_limits<double>::infinity());
  } else {
    // linear in study time: Lambda3(t) - Lambda3(s) = e3
    path.t = std::sqrt(s * s + 2.0 * e3 / c3);
  }
  return path;
}

// Factual-world generation: a scalar arm applied to all three components.
inline Dataset simulate_setting(const SimulationConfig& config) {
  if (config.n < 1) throw ConfigError("n must be >= 1");
  const HazardTriple spec = config.hazards();
  std::mt19937_64 rng(config.seed);
  std::exponential_distribution<double> exp_c(
      config.censoring.exp_rate > 0.0 ? config.censoring.exp_rate : 1.0);
  std::vector<std::vector<double>> xs = draw_covariates(config.n, rng);

  Dataset ds;
  ds.covariate_names = {"x1", "x2"};
  ds.tau = config.no_censoring ? 0.0 : config.censoring.admin_tau;
  for (std::size_t i = 0; i < config.n; ++i) {
    const std::vector<double>& x = config.force_x ? *config.force_x : xs[i];
    const int arm = config.force_arm ? *config.force_arm : assign_treatment(x, rng);
    const LatentPath path = draw_event_times(spec, x, all_components(arm), rng);

    double c = std::numeric_limits<double>::infinity();
    if (!config.no_censoring) {
      c = config.censoring.admin_tau;
      if (config.censoring.exp_rate > 0.0) c = std::min(c, exp_c(rng));
    }
    SubjectRecord s;
    s.id = std::to_string(i + 1);
    s.arm = arm;
    s.covariates = x;
    s.delta_t = path.t <= c ? 1 : 0;
    s.t_obs = std::min(path.t, c);
    if (path.via_intermediate && path.r <= c) {
      s.delta_r = 1;
      s.r_obs = path.r;
    } else {
      s.delta_r = 0;
      s.r_obs = s.t_obs;
    }
    ds.subjects.push_back(std::move(s));
  }
  finalize_dataset(ds, config.no_censoring ? -1.0 : config.censoring.admin_tau);
  return ds;
}

namespace detail {

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      double fa, double fm, double fb, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, eps / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, eps / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-10) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(m), f(b), eps, 40);
}

}  // namespace detail

// True counterfactual incidences F1, F2, F3, F for a hazard triple at fixed x.
struct OracleIncidence {
  double f1 = 0.0, f2 = 0.0, f3 = 0.0, f = 0.0;
};

inline OracleIncidence oracle_incidence_at(const HazardTriple& spec,
                                           const ComponentVector& a, double t,
                                           const std::vector<double>& x) {
  if (t < 0.0) throw ConfigError("t must be nonnegative");
  OracleIncidence out;
  if (t == 0.0) return out;
  const double c1 = spec.h1.coefficient(x, a.a1);
  const double c2 = spec.h2.coefficient(x, a.a2);
  const double c3 = spec.h3.coefficient(x, a.a3);

  auto s12 = [&](double s) {
    return std::exp(-spec.h1.cumulative(s, c1) - spec.h2.cumulative(s, c2));
  };
  auto lam3_between = [&](double s, double u) {  // Lambda3 from entry s to time u
    if (spec.h3.form == HazardSpec::Form::linear_in_sojourn)
      return spec.h3.cumulative(u - s, c3);
    return spec.h3.cumulative(u, c3) - spec.h3.cumulative(s, c3);
  };

  if (spec.h1.form == HazardSpec::Form::constant &&
      spec.h3.form == HazardSpec::Form::constant) {
    // Closed form for constant rates.
    const double c12 = c1 + c2;
    const double surv = std::exp(-c12 * t);
    out.f1 = c12 > 0.0 ? c1 / c12 * (1.0 - surv) : 0.0;
    out.f2 = c12 > 0.0 ? c2 / c12 * (1.0 - surv) : 0.0;
    double direct;  // int_0^t exp(-c12 s - c3 (t-s)) c2 ds
    if (std::abs(c12 - c3) < 1e-12) {
      direct = c2 * t * std::exp(-c3 * t);
    } else {
      direct = c2 * std::exp(-c3 * t) * (1.0 - std::exp(-(c12 - c3) * t)) / (c12 - c3);
    }
    out.f3 = out.f2 - direct;
  } else {
    out.f1 = detail::integrate([&](double s) { return s12(s) * spec.h1.rate(s, c1); }, 0.0, t);
    out.f2 = detail::integrate([&](double s) { return s12(s) * spec.h2.rate(s, c2); }, 0.0, t);
    const double direct = detail::integrate(
        [&](double s) {
          return s12(s) * std::exp(-lam3_between(s, t)) * spec.h2.rate(s, c2);
        },
        0.0, t);
    out.f3 = out.f2 - direct;
  }
  out.f = out.f1 + out.f3;
  return out;
}

// Marginal over the built-in covariate distribution (four equiprobable cells),
// or conditional when x is supplied.
inline OracleIncidence oracle_incidence(int setting_id, const ComponentVector& a, double t,
                                        const std::optional<std::vector<double>>& x = {}) {
  const HazardTriple spec = setting_hazards(setting_id);
  if (x) return oracle_incidence_at(spec, a, t, *x);
  OracleIncidence out;
  for (double x1 : {0.5, 1.0})
    for (double x2 : {0.5, 1.0}) {
      OracleIncidence cell = oracle_incidence_at(spec, a, t, {x1, x2});
      out.f1 += 0.25 * cell.f1;
      out.f2 += 0.25 * cell.f2;
      out.f3 += 0.25 * cell.f3;
      out.f += 0.25 * cell.f;
    }
  return out;
}

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Brute-force oracle: draws latent paths with component-specific hazards.
inline MonteCarloEstimate oracle_incidence_mc(int setting_id, const ComponentVector& a,
                                              double t,
                                              const std::optional<std::vector<double>>& x,
                                              std::size_t replicates = 1000000,
                                              std::uint64_t seed = 20240601) {
  const HazardTriple spec = setting_hazards(setting_id);
  std::mt19937_64 rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < replicates; ++i) {
    std::vector<double> xi;
    if (x) {
      xi = *x;
    } else {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      xi = {u(rng) < 0.5 ? 0.5 : 1.0, u(rng) < 0.5 ? 0.5 : 1.0};
    }
    const LatentPath p = draw_event_times(spec, xi, a, rng);
    if (p.t <= t) ++hits;
  }
  MonteCarloEstimate est;
  est.value = static_cast<double>(hits) / static_cast<double>(replicates);
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(replicates));
  return est;
}

}  // namespace sepath
