#pragma once

// Independent brute-force reference implementations used only by the tests.
// Everything here is computed with plain nested loops straight from the raw
// records, sharing no code with the library under test.

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace oracle {

struct Obs {
  double t = 0.0;  // observed terminal time
  double r = 0.0;  // observed intermediate time (= t when none observed)
  int dt = 0;
  int dr = 0;
};

// Textbook cause-specific Nelson-Aalen on unit weights, single sample.
// transition 1: 0->1 events, risk set = still in state 0.
// transition 2: 0->2 events, same risk set.
// transition 3: 2->3 events; Markov risk set r < s <= t, or sojourn clock.
inline double naive_cumhaz(const std::vector<Obs>& data, int transition, double t,
                           bool sojourn = false) {
  std::set<double> event_times;
  for (const auto& o : data) {
    if (transition == 1 && o.dt == 1 && o.dr == 0) event_times.insert(o.t);
    if (transition == 2 && o.dr == 1) event_times.insert(o.r);
    if (transition == 3 && o.dr == 1 && o.dt == 1)
      event_times.insert(sojourn ? o.t - o.r : o.t);
  }
  double acc = 0.0;
  for (double s : event_times) {
    if (s > t) continue;
    double dn = 0.0, y = 0.0;
    for (const auto& o : data) {
      if (transition == 1) {
        if (std::min(o.t, o.r) >= s) y += 1.0;
        if (o.dt == 1 && o.dr == 0 && o.t == s) dn += 1.0;
      } else if (transition == 2) {
        if (std::min(o.t, o.r) >= s) y += 1.0;
        if (o.dr == 1 && o.r == s) dn += 1.0;
      } else if (!sojourn) {
        if (o.dr == 1 && o.r < s && s <= o.t) y += 1.0;
        if (o.dr == 1 && o.dt == 1 && o.t == s) dn += 1.0;
      } else {
        if (o.dr == 1 && o.t - o.r >= s) y += 1.0;
        if (o.dr == 1 && o.dt == 1 && o.t - o.r == s) dn += 1.0;
      }
    }
    if (y > 0.0) acc += dn / y;
  }
  return acc;
}

// Hazard jump at exactly time s (same loops as above, one point).
inline double naive_jump(const std::vector<Obs>& data, int transition, double s,
                         bool sojourn = false) {
  return naive_cumhaz(data, transition, s, sojourn) -
         naive_cumhaz(data, transition, std::nexttoward(s, -1.0), sojourn);
}

struct BruteIncidence {
  double f1 = 0.0, f2 = 0.0, f3 = 0.0, f = 0.0;
};

// Multi-state cumulative incidence on unit weights, single sample, Markov
// clock: F1/F2 accumulate exp{-L1(s-)-L2(s-)} dLj(s) over the observed event
// grid; F3 = F2 - sum exp{-L1(s-)-L2(s-)} e^{-(L3(t)-L3(s))} dL2(s).
inline BruteIncidence brute_incidence(const std::vector<Obs>& data, double t) {
  std::set<double> grid;
  for (const auto& o : data) {
    if (o.dt == 1 && o.dr == 0) grid.insert(o.t);
    if (o.dr == 1) grid.insert(o.r);
  }
  auto s12_left = [&](double s) {
    const double eps = std::nexttoward(s, -1.0);
    return std::exp(-naive_cumhaz(data, 1, eps) - naive_cumhaz(data, 2, eps));
  };
  BruteIncidence out;
  const double l3_t = naive_cumhaz(data, 3, t);
  for (double s : grid) {
    if (s > t) continue;
    const double surv = s12_left(s);
    out.f1 += surv * naive_jump(data, 1, s);
    const double d2 = naive_jump(data, 2, s);
    out.f2 += surv * d2;
    out.f3 -= surv * d2 * std::exp(-(l3_t - naive_cumhaz(data, 3, s)));
  }
  out.f3 += out.f2;
  out.f = out.f1 + out.f3;
  return out;
}

struct LogrankValue {
  double stat = 0.0;
  double var = 0.0;
};

// Textbook unweighted two-sample logrank for one transition's event process,
// variance Y1*Y0*dN/Yp^2 (tie-free hypergeometric form).
inline LogrankValue textbook_logrank(const std::vector<Obs>& arm1,
                                     const std::vector<Obs>& arm0, int transition) {
  std::set<double> event_times;
  auto collect = [&](const std::vector<Obs>& data) {
    for (const auto& o : data) {
      if (transition == 1 && o.dt == 1 && o.dr == 0) event_times.insert(o.t);
      if (transition == 2 && o.dr == 1) event_times.insert(o.r);
    }
  };
  collect(arm1);
  collect(arm0);
  auto counts = [&](const std::vector<Obs>& data, double s, double& dn, double& y) {
    dn = y = 0.0;
    for (const auto& o : data) {
      if (std::min(o.t, o.r) >= s) y += 1.0;
      if (transition == 1 && o.dt == 1 && o.dr == 0 && o.t == s) dn += 1.0;
      if (transition == 2 && o.dr == 1 && o.r == s) dn += 1.0;
    }
  };
  LogrankValue out;
  for (double s : event_times) {
    double d1, y1, d0, y0;
    counts(arm1, s, d1, y1);
    counts(arm0, s, d0, y0);
    const double yp = y1 + y0;
    if (y1 <= 0.0 || y0 <= 0.0) continue;
    out.stat += d1 - y1 * (d1 + d0) / yp;
    out.var += y1 * y0 * (d1 + d0) / (yp * yp);
  }
  return out;
}

}  // namespace oracle
