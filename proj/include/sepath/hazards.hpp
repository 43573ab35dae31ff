#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sepath/common.hpp"
#include "sepath/dataset.hpp"
#include "sepath/step_function.hpp"

namespace sepath {

// Weighted counting/at-risk processes for one transition on its clock.
// Stored on the grid of (weighted) event times; Y and Yw are evaluated as
// left limits at those times.
struct TransitionProcesses {
  int transition = 1;  // 1: 0->1, 2: 0->2, 3: 2->3
  Clock clock = Clock::markov;
  std::vector<double> times;  // event times, strictly increasing
  std::vector<double> dN;     // weighted counting-process jumps
  std::vector<double> Y;      // weighted at-risk mass just before each time
  std::vector<double> Yw;     // squared-weight at-risk mass

  // Per-subject risk intervals (entry, exit] on this clock, for evaluation
  // at arbitrary times.
  std::vector<double> entry_, exit_, w_;

  double at_risk(double t) const {
    double y = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (entry_[i] < t && t <= exit_[i]) y += w_[i];
    return y;
  }

  double at_risk_w(double t) const {
    double y = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (entry_[i] < t && t <= exit_[i]) y += w_[i] * w_[i];
    return y;
  }

  double dN_at(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) return 0.0;
    return dN[static_cast<std::size_t>(it - times.begin())];
  }

  StepFunction counting_process() const {
    std::vector<double> cum(dN.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < dN.size(); ++i) cum[i] = (acc += dN[i]);
    return StepFunction(times, cum);
  }
};

inline TransitionProcesses build_processes(const Dataset& ds,
                                           const std::vector<double>& weights,
                                           int transition, Clock clock = Clock::markov) {
  if (weights.size() != ds.size()) throw ConfigError("weight vector length mismatch");
  if (transition < 1 || transition > 3) throw ConfigError("transition must be 1, 2 or 3");
  if (transition != 3 && clock == Clock::semimarkov)
    throw ConfigError("sojourn clock applies to transition 3 only");

  TransitionProcesses proc;
  proc.transition = transition;
  proc.clock = clock;

  struct Event {
    double time;
    double w;
  };
  std::vector<Event> events;

  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& s = ds.subjects[i];
    const double w = weights[i];
    if (w == 0.0) continue;
    double entry = 0.0, exit = 0.0;
    bool event = false;
    double etime = 0.0;
    if (transition == 1 || transition == 2) {
      // At risk in state 0 until min(T~, R~).
      exit = std::min(s.t_obs, s.r_obs);
      if (transition == 1) {
        event = (s.delta_t == 1 && s.delta_r == 0);
        etime = s.t_obs;
      } else {
        event = (s.delta_r == 1);
        etime = s.r_obs;
      }
    } else {
      if (s.delta_r != 1) continue;  // never entered state 2
      if (clock == Clock::markov) {
        entry = s.r_obs;
        exit = s.t_obs;
        event = (s.delta_t == 1);
        etime = s.t_obs;
      } else {
        entry = 0.0;
        exit = s.t_obs - s.r_obs;  // sojourn censoring C~ - R~ for censored subjects
        event = (s.delta_t == 1);
        etime = s.t_obs - s.r_obs;
      }
    }
    if (exit <= entry) continue;
    proc.entry_.push_back(entry);
    proc.exit_.push_back(exit);
    proc.w_.push_back(w);
    if (event) events.push_back({etime, w});
  }

  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.time < b.time; });
  for (const auto& e : events) {
    if (!proc.times.empty() && proc.times.back() == e.time) {
      proc.dN.back() += e.w;
    } else {
      proc.times.push_back(e.time);
      proc.dN.push_back(e.w);
    }
  }

  // Left-limit at-risk evaluation at the event grid via difference arrays;
  // a subject covers event times t with entry < t <= exit.
  const std::size_t m = proc.times.size();
  std::vector<double> dy(m + 1, 0.0), dyw(m + 1, 0.0);
  for (std::size_t i = 0; i < proc.w_.size(); ++i) {
    const auto lo = static_cast<std::size_t>(
        std::upper_bound(proc.times.begin(), proc.times.end(), proc.entry_[i]) -
        proc.times.begin());
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(proc.times.begin(), proc.times.end(), proc.exit_[i]) -
        proc.times.begin());
    if (lo >= hi) continue;
    const double w = proc.w_[i];
    dy[lo] += w;
    dy[hi] -= w;
    dyw[lo] += w * w;
    dyw[hi] -= w * w;
  }
  proc.Y.assign(m, 0.0);
  proc.Yw.assign(m, 0.0);
  double accy = 0.0, accyw = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    accy += dy[k];
    accyw += dyw[k];
    proc.Y[k] = accy;
    proc.Yw[k] = accyw;
  }
  return proc;
}

// Weighted Nelson-Aalen cumulative hazard.  Beyond the last time with positive
// at-risk mass the estimate is held constant and the curve is flagged as
// truncated there.
struct CumulativeHazard {
  int transition = 1;
  Clock clock = Clock::markov;
  std::vector<double> times;
  std::vector<double> dL;   // jump sizes dN/Y
  std::vector<double> L;    // cumulative value after each jump
  double truncation_time = std::numeric_limits<double>::infinity();
  bool truncated = false;

  double value(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0.0;
    return L[static_cast<std::size_t>(it - times.begin()) - 1];
  }
  double left_value(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0.0;
    return L[static_cast<std::size_t>(it - times.begin()) - 1];
  }
  StepFunction step() const { return StepFunction(times, L); }
};

inline CumulativeHazard nelson_aalen(const TransitionProcesses& proc) {
  CumulativeHazard h;
  h.transition = proc.transition;
  h.clock = proc.clock;
  double acc = 0.0;
  for (std::size_t k = 0; k < proc.times.size(); ++k) {
    if (proc.Y[k] <= 0.0) {
      // positivity diagnostic: stop accumulating, flag truncation
      h.truncated = true;
      h.truncation_time = k > 0 ? proc.times[k - 1] : 0.0;
      break;
    }
    h.times.push_back(proc.times[k]);
    h.dL.push_back(proc.dN[k] / proc.Y[k]);
    acc += h.dL.back();
    h.L.push_back(acc);
  }
  if (!h.truncated) {
    // reliable up to the last time with positive at-risk mass
    double last = 0.0;
    for (std::size_t i = 0; i < proc.exit_.size(); ++i) last = std::max(last, proc.exit_[i]);
    h.truncation_time = last;
  }
  return h;
}

// kappa-mixture evaluator for the 2->3 hazard:
// Lambda3(t;r) = (1-kappa){Lambda_ma(t) - Lambda_ma(r)} + kappa Lambda_sm(t-r).
struct Hazard3Mixture {
  CumulativeHazard markov;
  CumulativeHazard semimarkov;
  double kappa = 0.0;

  Hazard3Mixture() = default;
  Hazard3Mixture(CumulativeHazard ma, CumulativeHazard sm, double k)
      : markov(std::move(ma)), semimarkov(std::move(sm)), kappa(k) {
    if (!(k >= 0.0 && k <= 1.0)) throw ConfigError("kappa must lie in [0,1]");
  }

  double cumulative(double t, double r) const {
    if (t <= r) return 0.0;
    double v = 0.0;
    if (kappa < 1.0) v += (1.0 - kappa) * (markov.value(t) - markov.value(r));
    if (kappa > 0.0) v += kappa * semimarkov.value(t - r);
    return v;
  }
};

}  // namespace sepath
