#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sepath/common.hpp"
#include "sepath/dataset.hpp"
#include "sepath/eif.hpp"
#include "sepath/incidence.hpp"

namespace sepath {

struct DegenerateTestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TestResult {
  std::string name;
  double statistic = 0.0;
  double variance = 0.0;
  double p_value = 1.0;
  std::string method;  // logrank-ipw | u-bootstrap | u-eif
  double kappa = 0.0;
  std::size_t bootstrap_count = 0;
  std::uint64_t seed = 0;
  std::size_t bootstrap_redraws = 0;
  bool unstable = false;  // > 10% of bootstrap resamples redrawn
};

// IPW-weighted two-sample logrank on one transition's counting/at-risk
// processes: O - E sum with variance from the weighted hypergeometric form
// using the squared-weight at-risk processes.
inline TestResult logrank_transition_test(const Dataset& ds, const std::vector<double>& w1,
                                          const std::vector<double>& w0, int transition,
                                          Clock clock = Clock::markov) {
  const TransitionProcesses p1 = build_processes(ds, w1, transition, clock);
  const TransitionProcesses p0 = build_processes(ds, w0, transition, clock);
  std::vector<double> pooled;
  std::merge(p1.times.begin(), p1.times.end(), p0.times.begin(), p0.times.end(),
             std::back_inserter(pooled));
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  double stat = 0.0, var = 0.0;
  for (double s : pooled) {
    const double y1 = p1.at_risk(s), y0 = p0.at_risk(s);
    const double yp = y1 + y0;
    if (yp <= 0.0 || y1 <= 0.0 || y0 <= 0.0) continue;
    const double d1 = p1.dN_at(s), d0 = p0.dN_at(s);
    const double dp = d1 + d0;
    stat += d1 - y1 * dp / yp;
    const double yw1 = p1.at_risk_w(s), yw0 = p0.at_risk_w(s);
    var += ((y0 / yp) * (y0 / yp) * yw1 + (y1 / yp) * (y1 / yp) * yw0) * dp / yp;
  }
  // Degenerate when no event time had both arms at risk: no information.
  if (var <= 0.0)
    throw DegenerateTestError("no transition-" + std::to_string(transition) +
                              " events with both arms at risk");
  TestResult r;
  r.name = "logrank-transition-" + std::to_string(transition);
  r.method = "logrank-ipw";
  r.statistic = stat;
  r.variance = var;
  const double z = var > 0.0 ? stat / std::sqrt(var) : 0.0;
  r.p_value = 2.0 * (1.0 - norm_cdf(std::abs(z)));
  return r;
}

namespace detail {

// tau for the U statistic: smallest over arms of the last observed event time.
inline double u_horizon(const Dataset& ds) {
  double last[2] = {0.0, 0.0};
  for (const auto& s : ds.subjects) {
    double e = 0.0;
    if (s.delta_t == 1) e = std::max(e, s.t_obs);
    if (s.delta_r == 1) e = std::max(e, s.r_obs);
    last[static_cast<std::size_t>(s.arm)] = std::max(last[static_cast<std::size_t>(s.arm)], e);
  }
  return std::min(last[0], last[1]);
}

// Evaluation grid for U: merged hazard jump times of both contrasts, thinned
// to at most max_points and capped at tau.
inline std::vector<double> u_grid(const GnaipwAnalysis& an, const ComponentVector& a,
                                  const ComponentVector& b, double tau,
                                  std::size_t max_points = 160) {
  std::vector<double> g = an.default_grid(a);
  std::vector<double> gb = an.default_grid(b);
  g.insert(g.end(), gb.begin(), gb.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  while (!g.empty() && g.back() > tau) g.pop_back();
  if (g.size() > max_points) {
    std::vector<double> thin;
    thin.reserve(max_points);
    for (std::size_t k = 0; k < max_points; ++k)
      thin.push_back(g[k * (g.size() - 1) / (max_points - 1)]);
    thin.erase(std::unique(thin.begin(), thin.end()), thin.end());
    g = thin;
  }
  return g;
}

// U = int {F^a - F^b} d{F^a + F^b} as a Stieltjes sum over the grid.
inline double u_statistic(const std::vector<double>& fa, const std::vector<double>& fb) {
  double u = 0.0, prev_sum = 0.0;
  for (std::size_t k = 0; k < fa.size(); ++k) {
    const double sum = fa[k] + fb[k];
    u += (fa[k] - fb[k]) * (sum - prev_sum);
    prev_sum = sum;
  }
  return u;
}

inline std::vector<double> eval_curve(const IncidenceCurves& c, const std::vector<double>& g) {
  std::vector<double> f;
  f.reserve(g.size());
  for (double t : g) f.push_back(c.F(t));
  return f;
}

}  // namespace detail

struct SpeTestOptions {
  GnaipwOptions gnaipw;
  std::size_t bootstrap = 500;
  std::uint64_t seed = 1;
};

// Separable-pathway-effect test via the U statistic, GNAIPW curves, variance
// by nonparametric bootstrap over subjects.
inline TestResult spe_test_u(const Dataset& ds, const ComponentVector& a,
                             const ComponentVector& b, const SpeTestOptions& opt = {}) {
  GnaipwAnalysis analysis(ds, opt.gnaipw);
  const double tau = detail::u_horizon(ds);
  const std::vector<double> grid = detail::u_grid(analysis, a, b, tau);

  TestResult r;
  r.name = "u-" + to_string(a) + "-vs-" + to_string(b);
  r.method = "u-bootstrap";
  r.kappa = opt.gnaipw.kappa;
  r.seed = opt.seed;
  r.statistic = detail::u_statistic(detail::eval_curve(analysis.curves(a), grid),
                                    detail::eval_curve(analysis.curves(b), grid));
  if (a == b) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, ds.size() - 1);
  std::vector<double> stats;
  stats.reserve(opt.bootstrap);
  std::size_t redraws = 0;
  for (std::size_t bidx = 0; bidx < opt.bootstrap; ++bidx) {
    for (int attempt = 0;; ++attempt) {
      Dataset res;
      res.covariate_names = ds.covariate_names;
      res.tau = ds.tau;
      res.tie_shift = ds.tie_shift;
      bool arm0 = false, arm1 = false;
      std::vector<double> res_ps;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::size_t j = pick(rng);
        res.subjects.push_back(ds.subjects[j]);
        if (opt.gnaipw.ps_mode == PsMode::supplied) res_ps.push_back(analysis.propensity()[j]);
        (res.subjects.back().arm == 1 ? arm1 : arm0) = true;
      }
      if (!(arm0 && arm1)) {
        ++redraws;
        if (attempt > 50) throw DegenerateTestError("bootstrap cannot produce both arms");
        continue;
      }
      try {
        GnaipwOptions bopt = opt.gnaipw;
        if (bopt.ps_mode == PsMode::supplied) bopt.supplied_ps = &res_ps;
        GnaipwAnalysis ban(res, bopt);
        stats.push_back(detail::u_statistic(detail::eval_curve(ban.curves(a), grid),
                                            detail::eval_curve(ban.curves(b), grid)));
      } catch (const PositivityError&) {
        ++redraws;
        if (attempt > 50) throw;
        continue;
      }
      break;
    }
  }
  r.bootstrap_count = opt.bootstrap;
  r.bootstrap_redraws = redraws;
  r.unstable = redraws * 10 > opt.bootstrap;
  double mean = 0.0;
  for (double s : stats) mean += s / static_cast<double>(stats.size());
  double ssq = 0.0;
  for (double s : stats) ssq += (s - mean) * (s - mean);
  r.variance = stats.size() > 1 ? ssq / static_cast<double>(stats.size() - 1) : 0.0;
  const double z = r.variance > 0.0 ? r.statistic / std::sqrt(r.variance) : 0.0;
  r.p_value = 2.0 * (1.0 - norm_cdf(std::abs(z)));
  return r;
}

// EIF variant: U from the one-step curves with a delta-method variance based
// on the stored influence values.
inline TestResult spe_test_u_eif(const Dataset& ds, const NuisanceSet& nuis,
                                 const ComponentVector& a, const ComponentVector& b,
                                 std::size_t grid_points = 80) {
  const double tau = detail::u_horizon(ds);
  std::vector<double> grid;
  for (std::size_t k = 1; k <= grid_points; ++k)
    grid.push_back(tau * static_cast<double>(k) / static_cast<double>(grid_points));
  const EifEstimate ea = eif_estimate(ds, nuis, a, grid);
  const EifEstimate eb = eif_estimate(ds, nuis, b, grid);

  TestResult r;
  r.name = "u-" + to_string(a) + "-vs-" + to_string(b);
  r.method = "u-eif";
  r.statistic = detail::u_statistic(ea.F_raw, eb.F_raw);
  if (a == b) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  // Influence of U: int (phiD) dS + int D d(phiS), per subject.
  const std::size_t n = ds.size();
  double ssq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double infl = 0.0, prev_sum = 0.0, prev_phis = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double d = ea.F_raw[k] - eb.F_raw[k];
      const double sum = ea.F_raw[k] + eb.F_raw[k];
      const double phid = ea.phi[k][i] - eb.phi[k][i];
      const double phis = ea.phi[k][i] + eb.phi[k][i];
      infl += phid * (sum - prev_sum) + d * (phis - prev_phis);
      prev_sum = sum;
      prev_phis = phis;
    }
    ssq += infl * infl;
  }
  r.variance = ssq / static_cast<double>(n) / static_cast<double>(n);
  const double z = r.variance > 0.0 ? r.statistic / std::sqrt(r.variance) : 0.0;
  r.p_value = 2.0 * (1.0 - norm_cdf(std::abs(z)));
  return r;
}

// SPE curves across a kappa grid; SPE_{0->1} is kappa-invariant because both
// the 0->2 and 2->3 hazards are controlled in that contrast.
inline std::vector<std::pair<double, std::vector<SpeResult>>> sensitivity_sweep(
    const Dataset& ds, const GnaipwOptions& base, const std::vector<double>& kappa_grid,
    const std::vector<double>& t_grid) {
  GnaipwAnalysis analysis(ds, base);
  std::vector<std::pair<double, std::vector<SpeResult>>> out;
  for (double kappa : kappa_grid) {
    analysis.set_kappa(kappa);
    out.emplace_back(kappa, spe_decomposition(analysis, t_grid));
  }
  return out;
}

}  // namespace sepath
