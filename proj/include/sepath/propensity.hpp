#pragma once

#include <cmath>
#include <vector>

#include "sepath/common.hpp"
#include "sepath/dataset.hpp"
#include "sepath/simulate.hpp"

namespace sepath {

struct PropensityModel {
  std::vector<double> coefficients;  // intercept first, one slope per covariate
  bool converged = false;
  int iterations = 0;
  std::vector<double> fitted;  // P(A=1 | X_i) per subject, row order

  double predict(const std::vector<double>& x) const {
    double lin = coefficients[0];
    for (std::size_t j = 0; j + 1 < coefficients.size(); ++j) lin += coefficients[j + 1] * x[j];
    return expit(lin);
  }
};

namespace detail {

// Solves the symmetric positive definite system H b = g in place (Cholesky).
inline std::vector<double> solve_spd(std::vector<double> h, std::vector<double> g) {
  const std::size_t p = g.size();
  for (std::size_t j = 0; j < p; ++j) {
    double d = h[j * p + j];
    for (std::size_t k = 0; k < j; ++k) d -= h[j * p + k] * h[j * p + k];
    if (d < 1e-12) throw ConfigError("design matrix is rank deficient");
    h[j * p + j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = h[i * p + j];
      for (std::size_t k = 0; k < j; ++k) s -= h[i * p + k] * h[j * p + k];
      h[i * p + j] = s / h[j * p + j];
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    double s = g[i];
    for (std::size_t k = 0; k < i; ++k) s -= h[i * p + k] * g[k];
    g[i] = s / h[i * p + i];
  }
  for (std::size_t ii = p; ii-- > 0;) {
    double s = g[ii];
    for (std::size_t k = ii + 1; k < p; ++k) s -= h[k * p + ii] * g[k];
    g[ii] = s / h[ii * p + ii];
  }
  return g;
}

}  // namespace detail

// Logistic MLE by iteratively reweighted least squares.  Convergence when the
// max absolute score component drops below 1e-8, capped at 100 iterations.
inline PropensityModel fit_logistic(const Dataset& ds) {
  const std::size_t n = ds.size();
  const std::size_t p = ds.n_covariates() + 1;
  bool any0 = false, any1 = false;
  for (const auto& s : ds.subjects) (s.arm == 1 ? any1 : any0) = true;
  if (!any0 || !any1) throw PositivityError("both arms must be present to fit the propensity model");

  PropensityModel model;
  model.coefficients.assign(p, 0.0);
  model.fitted.assign(n, 0.5);

  for (int iter = 1; iter <= 100; ++iter) {
    std::vector<double> score(p, 0.0), hess(p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = ds.subjects[i];
      const double mu = model.predict(s.covariates);
      model.fitted[i] = mu;
      const double resid = static_cast<double>(s.arm) - mu;
      const double w = mu * (1.0 - mu);
      auto xj = [&](std::size_t j) { return j == 0 ? 1.0 : s.covariates[j - 1]; };
      for (std::size_t j = 0; j < p; ++j) {
        score[j] += resid * xj(j);
        for (std::size_t k = 0; k <= j; ++k) hess[j * p + k] += w * xj(j) * xj(k);
      }
    }
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = j + 1; k < p; ++k) hess[j * p + k] = hess[k * p + j];

    model.iterations = iter;
    double max_score = 0.0;
    for (double g : score) max_score = std::max(max_score, std::abs(g));
    if (max_score < 1e-8) {
      model.converged = true;
      break;
    }
    std::vector<double> step;
    try {
      step = detail::solve_spd(hess, score);
    } catch (const ConfigError&) {
      // A collapsing Hessian with fitted probabilities at the boundary is
      // separation, not a rank-deficient design.
      for (double mu : model.fitted)
        if (mu < 1e-6 || mu > 1.0 - 1e-6)
          throw PositivityError("separation detected: fitted propensity at the boundary");
      throw;
    }
    for (std::size_t j = 0; j < p; ++j) model.coefficients[j] += step[j];
  }
  for (double mu : model.fitted)
    if (mu < 1e-8 || mu > 1.0 - 1e-8)
      throw PositivityError("separation detected: fitted propensity outside (1e-8, 1-1e-8)");
  return model;
}

// w_i(a) = I(A_i = a) / P(A_i = a | X_i).
inline std::vector<double> ipw_weights_from_ps(const Dataset& ds,
                                               const std::vector<double>& ps1, int a) {
  std::vector<double> w(ds.size(), 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double p1 = ps1[i];
    if (!(p1 > 0.0 && p1 < 1.0)) throw PositivityError("propensity outside (0,1)");
    if (ds.subjects[i].arm == a) w[i] = 1.0 / (a == 1 ? p1 : 1.0 - p1);
  }
  return w;
}

inline std::vector<double> ipw_weights(const Dataset& ds, const PropensityModel& model, int a) {
  return ipw_weights_from_ps(ds, model.fitted, a);
}

enum class PsMode { fit, truth, supplied };

// Resolves P(A=1|X) per subject for the requested mode.  True-propensity mode
// exists because the asymptotic variance treats weights as known.
inline std::vector<double> propensity_scores(const Dataset& ds, PsMode mode,
                                             const std::vector<double>* supplied = nullptr) {
  switch (mode) {
    case PsMode::fit:
      return fit_logistic(ds).fitted;
    case PsMode::truth: {
      std::vector<double> ps(ds.size());
      for (std::size_t i = 0; i < ds.size(); ++i)
        ps[i] = true_propensity(ds.subjects[i].covariates);
      return ps;
    }
    case PsMode::supplied:
      if (!supplied || supplied->size() != ds.size())
        throw ConfigError("supplied propensity scores missing or wrong length");
      return *supplied;
  }
  throw ConfigError("bad ps mode");
}

}  // namespace sepath
