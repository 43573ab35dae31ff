#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sepath/common.hpp"
#include "sepath/dataset.hpp"
#include "sepath/hazards.hpp"
#include "sepath/incidence.hpp"

namespace sepath {

// Covariate columns that define the strata; empty means all covariates.
struct StrataSpec {
  std::vector<std::size_t> columns;
};

// Stratified nonparametric nuisances for one (stratum, arm) cell:
// cause-specific hazards on the Markov clock plus the censoring hazard.
struct NuisanceCell {
  CumulativeHazard L1, L2, L3, LC;
  std::size_t count = 0;
};

struct NuisanceSet {
  std::vector<std::vector<double>> stratum_values;  // distinct key vectors
  std::vector<std::size_t> stratum_of;              // per subject
  std::vector<std::array<NuisanceCell, 2>> cells;   // [stratum][arm]
  std::vector<double> propensity;                   // P(A=1 | stratum)
  std::size_t min_cell = 10;
};

namespace detail {

inline CumulativeHazard censoring_hazard(const Dataset& ds,
                                         const std::vector<std::size_t>& members) {
  // Censoring as the event: N jumps at T~ with delta_t = 0, risk set T~ >= t.
  TransitionProcesses proc;
  std::vector<std::pair<double, double>> events;
  for (std::size_t i : members) {
    const auto& s = ds.subjects[i];
    if (s.t_obs <= 0.0) continue;
    proc.entry_.push_back(0.0);
    proc.exit_.push_back(s.t_obs);
    proc.w_.push_back(1.0);
    if (s.delta_t == 0) events.push_back({s.t_obs, 1.0});
  }
  std::sort(events.begin(), events.end());
  for (const auto& [time, w] : events) {
    if (!proc.times.empty() && proc.times.back() == time)
      proc.dN.back() += w;
    else {
      proc.times.push_back(time);
      proc.dN.push_back(w);
    }
  }
  proc.Y.resize(proc.times.size());
  proc.Yw.resize(proc.times.size());
  for (std::size_t k = 0; k < proc.times.size(); ++k)
    proc.Yw[k] = proc.Y[k] = proc.at_risk(proc.times[k]);
  return nelson_aalen(proc);
}

}  // namespace detail

// Stratified Nelson-Aalen nuisance fits.  Covariates must be discrete; a thin
// stratum-arm cell signals either conditional-positivity failure or a
// continuous covariate that needs discretization.
inline NuisanceSet fit_nuisances(const Dataset& ds, const StrataSpec& spec = {},
                                 std::size_t min_cell = 10) {
  NuisanceSet nuis;
  nuis.min_cell = min_cell;
  std::vector<std::size_t> cols = spec.columns;
  if (cols.empty() && spec.columns.empty() && ds.n_covariates() > 0)
    for (std::size_t j = 0; j < ds.n_covariates(); ++j) cols.push_back(j);
  for (std::size_t c : cols)
    if (c >= ds.n_covariates()) throw ConfigError("strata column index out of range");

  std::map<std::vector<double>, std::size_t> index;
  nuis.stratum_of.resize(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<double> key;
    for (std::size_t c : cols) key.push_back(ds.subjects[i].covariates[c]);
    auto [it, inserted] = index.try_emplace(key, nuis.stratum_values.size());
    if (inserted) nuis.stratum_values.push_back(key);
    nuis.stratum_of[i] = it->second;
  }

  const std::size_t g_count = nuis.stratum_values.size();
  nuis.cells.resize(g_count);
  nuis.propensity.resize(g_count);
  for (std::size_t g = 0; g < g_count; ++g) {
    std::array<std::vector<std::size_t>, 2> members;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (nuis.stratum_of[i] == g) members[static_cast<std::size_t>(ds.subjects[i].arm)].push_back(i);
    const std::size_t n_g = members[0].size() + members[1].size();
    for (int a = 0; a < 2; ++a) {
      if (members[a].size() < min_cell) {
        std::string cell = "stratum (";
        for (double v : nuis.stratum_values[g]) cell += std::to_string(v) + " ";
        cell += ") arm " + std::to_string(a);
        throw PositivityError("thin nuisance cell (" + std::to_string(members[a].size()) +
                              " < " + std::to_string(min_cell) + " subjects): " + cell);
      }
      std::vector<double> w(ds.size(), 0.0);
      for (std::size_t i : members[a]) w[i] = 1.0;
      NuisanceCell& cell = nuis.cells[g][a];
      cell.count = members[a].size();
      cell.L1 = nelson_aalen(build_processes(ds, w, 1));
      cell.L2 = nelson_aalen(build_processes(ds, w, 2));
      cell.L3 = nelson_aalen(build_processes(ds, w, 3, Clock::markov));
      cell.LC = detail::censoring_hazard(ds, members[a]);
    }
    nuis.propensity[g] = static_cast<double>(members[1].size()) / static_cast<double>(n_g);
  }
  return nuis;
}

enum class NuisanceComponent { none, lambda1, lambda2, lambda3, propensity, censoring };

// Multiplies the named nuisance's hazard increments (or the propensity odds)
// by a fixed factor.  Used to probe multiple robustness empirically.
inline NuisanceSet corrupt_nuisances(NuisanceSet nuis, NuisanceComponent component,
                                     double factor = 1.5) {
  auto scale = [&](CumulativeHazard& h) {
    double acc = 0.0;
    for (std::size_t k = 0; k < h.dL.size(); ++k) {
      h.dL[k] *= factor;
      acc += h.dL[k];
      h.L[k] = acc;
    }
  };
  for (auto& strata : nuis.cells)
    for (auto& cell : strata) {
      switch (component) {
        case NuisanceComponent::lambda1: scale(cell.L1); break;
        case NuisanceComponent::lambda2: scale(cell.L2); break;
        case NuisanceComponent::lambda3: scale(cell.L3); break;
        case NuisanceComponent::censoring: scale(cell.LC); break;
        default: break;
      }
    }
  if (component == NuisanceComponent::propensity)
    for (double& p : nuis.propensity) {
      const double odds = factor * p / (1.0 - p);
      p = odds / (1.0 + odds);
    }
  return nuis;
}

struct EifEstimate {
  ComponentVector a;
  std::vector<double> t;
  std::vector<double> F_raw;      // one-step estimate (not range-respecting)
  std::vector<double> F_clipped;  // clipped to [0,1] for reporting
  std::vector<double> sigma2;     // empirical mean of phi^2
  std::vector<std::vector<double>> phi;  // [t_index][subject]

  double variance(std::size_t t_index, std::size_t n) const {
    return sigma2[t_index] / static_cast<double>(n);
  }
};

namespace detail {

// Per-stratum machinery at a fixed output time t: influence brackets on the
// own-arm jump grids plus their hazard-integrated cumulatives.
struct StratumTerms {
  // For j in {1,2}: brackets/cumulatives on the jump grid of the own-arm
  // (A = a_j) hazard for that transition.
  struct Channel {
    const CumulativeHazard* own = nullptr;  // own-arm hazard Lambda_j^{A}
    std::vector<double> factor;  // B_j(s,t) / (p_j K(s-)) at own jumps
    std::vector<double> cum;     // sum_{u<=s} factor(u) dLambda_j(u)
    double at(double s) const {  // factor at an own jump time s
      auto it = std::lower_bound(own->times.begin(), own->times.end(), s);
      if (it == own->times.end() || *it != s) return 0.0;
      return factor[static_cast<std::size_t>(it - own->times.begin())];
    }
    double cum_at(double s) const {
      auto it = std::upper_bound(own->times.begin(), own->times.end(), s);
      if (it == own->times.begin()) return 0.0;
      return cum[static_cast<std::size_t>(it - own->times.begin()) - 1];
    }
  };
  Channel ch[3];
  double plugin_f = 0.0;  // F^{a}(t; stratum)
};

inline StratumTerms build_stratum_terms(const NuisanceSet& nuis, std::size_t g,
                                        const ComponentVector& a, double t,
                                        double denom_guard) {
  StratumTerms out;
  const NuisanceCell& c1 = nuis.cells[g][a.a1];
  const NuisanceCell& c2 = nuis.cells[g][a.a2];
  const NuisanceCell& c3 = nuis.cells[g][a.a3];
  const double p1 = a.a1 == 1 ? nuis.propensity[g] : 1.0 - nuis.propensity[g];
  const double p2 = a.a2 == 1 ? nuis.propensity[g] : 1.0 - nuis.propensity[g];
  const double p3 = a.a3 == 1 ? nuis.propensity[g] : 1.0 - nuis.propensity[g];

  // Target-cell curves.
  const CumulativeHazard& L1 = c1.L1;
  const CumulativeHazard& L2 = c2.L2;
  const CumulativeHazard& L3 = c3.L3;
  auto s12_left = [&](double s) { return std::exp(-L1.left_value(s) - L2.left_value(s)); };
  const double s12_t = std::exp(-L1.value(t) - L2.value(t));
  const double l3_t = L3.value(t);

  // dF2 jumps and the tail integral J(s,t) = sum_{s<u<=t} S12(u-) e^{-(L3(t)-L3(u))} dL2(u).
  const std::vector<double>& u_times = L2.times;
  std::vector<double> tailJ(u_times.size() + 1, 0.0);
  for (std::size_t j = u_times.size(); j-- > 0;) {
    tailJ[j] = tailJ[j + 1];
    if (u_times[j] <= t)
      tailJ[j] += s12_left(u_times[j]) * std::exp(-(l3_t - L3.value(u_times[j]))) * L2.dL[j];
  }
  auto J_after = [&](double s) {  // sum over u with s < u <= t
    auto it = std::upper_bound(u_times.begin(), u_times.end(), s);
    return tailJ[static_cast<std::size_t>(it - u_times.begin())];
  };
  auto B3_before = [&](double s) {  // sum over u < s of S12(u-) e^{-(L3(t)-L3(u))} dL2(u)
    double acc = 0.0;
    auto it = std::lower_bound(u_times.begin(), u_times.end(), s);
    for (std::size_t j = 0; j < static_cast<std::size_t>(it - u_times.begin()); ++j)
      acc += s12_left(u_times[j]) * std::exp(-(l3_t - L3.value(u_times[j]))) * L2.dL[j];
    return acc;
  };

  // Plug-in incidence for this stratum.
  {
    double f1 = 0.0;
    for (std::size_t k = 0; k < L1.times.size() && L1.times[k] <= t; ++k)
      f1 += s12_left(L1.times[k]) * L1.dL[k];
    double f2 = 0.0, direct = 0.0;
    for (std::size_t j = 0; j < u_times.size() && u_times[j] <= t; ++j) {
      f2 += s12_left(u_times[j]) * L2.dL[j];
      direct += s12_left(u_times[j]) * std::exp(-(l3_t - L3.value(u_times[j]))) * L2.dL[j];
    }
    out.plugin_f = f1 + (f2 - direct);
  }

  // Own-arm inverse-probability-of-observation factors.
  auto make_channel = [&](int j, int arm_j, double p_j) {
    StratumTerms::Channel ch;
    const NuisanceCell& own = nuis.cells[g][arm_j];
    const CumulativeHazard* own_h = (j == 1) ? &own.L1 : (j == 2) ? &own.L2 : &own.L3;
    ch.own = own_h;
    ch.factor.resize(own_h->times.size(), 0.0);
    ch.cum.resize(own_h->times.size(), 0.0);
    double cum = 0.0;
    for (std::size_t k = 0; k < own_h->times.size(); ++k) {
      const double s = own_h->times[k];
      if (s > t) {
        ch.cum[k] = cum;
        continue;
      }
      double bracket;
      if (j == 1) {
        bracket = s12_t + J_after(s);
      } else if (j == 2) {
        bracket = s12_t - s12_left(s) * std::exp(-(l3_t - L3.value(s))) + J_after(s);
      } else {
        bracket = B3_before(s);
      }
      double denom;
      if (j == 3) {
        // P(relapsed before s, alive and uncensored at s | A, X)
        double mass = 0.0;
        const CumulativeHazard& oL2 = own.L2;
        for (std::size_t v = 0; v < oL2.times.size() && oL2.times[v] < s; ++v)
          mass += std::exp(-own.L1.left_value(oL2.times[v]) - oL2.left_value(oL2.times[v])) *
                  std::exp(-(own.L3.left_value(s) - own.L3.value(oL2.times[v]))) * oL2.dL[v];
        denom = mass * std::exp(-own.LC.left_value(s));
      } else {
        denom = std::exp(-own.L1.left_value(s) - own.L2.left_value(s) - own.LC.left_value(s));
      }
      if (denom < denom_guard)
        throw TruncationError("at-risk denominator underflow in EIF transition-" +
                              std::to_string(j) + " term at time " + std::to_string(s));
      ch.factor[k] = bracket / (p_j * denom);
      cum += ch.factor[k] * own_h->dL[k];
      ch.cum[k] = cum;
    }
    return ch;
  };
  out.ch[0] = make_channel(1, a.a1, p1);
  out.ch[1] = make_channel(2, a.a2, p2);
  out.ch[2] = make_channel(3, a.a3, p3);
  return out;
}

}  // namespace detail

// One-step EIF-based estimator of F^{(a1,a2,a3)}(t) under the Markov clock.
// Solves P_n{phi_hat(t)} = 0; stores per-subject influence values.
inline EifEstimate eif_estimate(const Dataset& ds, const NuisanceSet& nuis,
                                const ComponentVector& a, const std::vector<double>& t_grid,
                                double denom_guard = 1e-6) {
  const std::size_t n = ds.size();
  EifEstimate est;
  est.a = a;
  est.t = t_grid;
  est.phi.assign(t_grid.size(), std::vector<double>(n, 0.0));

  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const double t = t_grid[ti];
    std::vector<detail::StratumTerms> terms;
    terms.reserve(nuis.cells.size());
    for (std::size_t g = 0; g < nuis.cells.size(); ++g)
      terms.push_back(detail::build_stratum_terms(nuis, g, a, t, denom_guard));

    std::vector<double>& phi = est.phi[ti];
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = ds.subjects[i];
      const std::size_t g = nuis.stratum_of[i];
      const detail::StratumTerms& tg = terms[g];
      const double exit0 = std::min(std::min(s.t_obs, s.r_obs), t);
      double contrib = tg.plugin_f;
      if (s.arm == a.a1) {
        double v = -tg.ch[0].cum_at(exit0);
        if (s.delta_t == 1 && s.delta_r == 0 && s.t_obs <= t) v += tg.ch[0].at(s.t_obs);
        contrib += v;
      }
      if (s.arm == a.a2) {
        double v = -tg.ch[1].cum_at(exit0);
        if (s.delta_r == 1 && s.r_obs <= t) v += tg.ch[1].at(s.r_obs);
        contrib += v;
      }
      if (s.arm == a.a3 && s.delta_r == 1) {
        const double lo = std::min(s.r_obs, t);
        const double hi = std::min(s.t_obs, t);
        double v = -(tg.ch[2].cum_at(hi) - tg.ch[2].cum_at(lo));
        if (s.delta_t == 1 && s.t_obs <= t) v += tg.ch[2].at(s.t_obs);
        contrib += v;
      }
      phi[i] = contrib;
      mean += contrib / static_cast<double>(n);
    }
    double ssq = 0.0;
    for (double& p : phi) {
      p -= mean;  // phi has mean zero by the one-step construction
      ssq += p * p;
    }
    est.F_raw.push_back(mean);
    est.F_clipped.push_back(std::clamp(mean, 0.0, 1.0));
    est.sigma2.push_back(ssq / static_cast<double>(n));
  }
  return est;
}

// Re-runs the estimator with one nuisance corrupted; used to demonstrate the
// multiple-robustness property empirically.
inline EifEstimate robustness_probe(const Dataset& ds, const NuisanceSet& nuis,
                                    const ComponentVector& a, const std::vector<double>& t_grid,
                                    NuisanceComponent corrupted, double factor = 1.5) {
  return eif_estimate(ds, corrupt_nuisances(nuis, corrupted, factor), a, t_grid);
}

}  // namespace sepath
