#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "sepath/common.hpp"

namespace sepath {

// Right-continuous piecewise-constant function of time.  values[i] is the
// value on [times[i], times[i+1]); before the first jump the baseline applies.
// Carrier for counting processes, cumulative hazards and incidence curves.
class StepFunction {
 public:
  StepFunction() = default;

  StepFunction(std::vector<double> times, std::vector<double> values,
               double baseline = 0.0)
      : times_(std::move(times)), values_(std::move(values)), baseline_(baseline) {
    if (times_.size() != values_.size())
      throw ConfigError("StepFunction: times/values size mismatch");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1]))
        throw ConfigError("StepFunction: jump times must be strictly increasing");
  }

  double operator()(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return baseline_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
  }

  // Value just before t: sup over s < t.
  double left_limit(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return baseline_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  double baseline() const { return baseline_; }
  bool empty() const { return times_.empty(); }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  double baseline_ = 0.0;
};

}  // namespace sepath
