#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sepath/common.hpp"
#include "sepath/eif.hpp"
#include "sepath/incidence.hpp"
#include "sepath/simulate.hpp"

namespace sepath {

enum class EstimatorKind { gnaipw, eif };

struct StudyConfig {
  SimulationConfig sim;
  EstimatorKind method = EstimatorKind::gnaipw;
  GnaipwOptions gnaipw;
  StrataSpec strata;          // eif only
  std::size_t min_cell = 10;  // eif only
  std::vector<ComponentVector> targets = {{1, 1, 1}, {0, 0, 0}};
  std::vector<double> t_grid = {1.0, 2.0, 3.0};
  std::size_t replications = 500;
  double level = 0.95;
  std::size_t jobs = 1;
};

// Aggregates for one (component vector, time) cell over the replications.
struct StudyCell {
  ComponentVector a;
  double t = 0.0;
  double truth = 0.0;
  double mean_est = 0.0;
  double bias = 0.0;
  double sd = 0.0;       // empirical SD of the estimates
  double mean_se = 0.0;  // mean of the analytic standard errors
  double coverage = 0.0;
  std::size_t used = 0;  // replications contributing a finite estimate + SE
};

struct StudyResult {
  std::vector<StudyCell> cells;
  std::size_t replications = 0;
  std::size_t failed_replications = 0;  // positivity/truncation failures
};

// True marginal incidence under the study's own generating mechanism.
inline OracleIncidence study_truth(const SimulationConfig& sim, const ComponentVector& a,
                                   double t) {
  const HazardTriple spec = sim.hazards();
  if (sim.force_x) return oracle_incidence_at(spec, a, t, *sim.force_x);
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

// Simulate -> estimate -> Wald CI, repeated.  Per-replication seeds are split
// from the root, so the replications are independent, reproducible, and
// job-count invariant; replications run on up to cfg.jobs threads with fully
// separate buffers, and the report is assembled sequentially.
inline StudyResult run_study(const StudyConfig& cfg) {
  const std::size_t n_cells = cfg.targets.size() * cfg.t_grid.size();
  // Per replication, per cell: estimate and SE (NaN when unavailable).
  std::vector<std::vector<std::pair<double, double>>> reps(
      cfg.replications,
      std::vector<std::pair<double, double>>(n_cells, {std::nan(""), std::nan("")}));
  std::vector<char> failed(cfg.replications, 0);

  auto run_one = [&](std::size_t rep) {
    SimulationConfig sim = cfg.sim;
    sim.seed = split_seed(cfg.sim.seed, rep);
    try {
      const Dataset ds = simulate_setting(sim);
      std::optional<GnaipwAnalysis> gn;
      std::optional<NuisanceSet> nuis;
      if (cfg.method == EstimatorKind::gnaipw)
        gn.emplace(ds, cfg.gnaipw);
      else
        nuis = fit_nuisances(ds, cfg.strata, cfg.min_cell);

      for (std::size_t ai = 0; ai < cfg.targets.size(); ++ai) {
        if (cfg.method == EstimatorKind::gnaipw) {
          const IncidenceResult r = gn->estimate(cfg.targets[ai], cfg.t_grid, true, cfg.level);
          for (std::size_t k = 0; k < cfg.t_grid.size(); ++k)
            reps[rep][ai * cfg.t_grid.size() + k] = {r.F[k], std::sqrt(r.var[k])};
        } else {
          const EifEstimate r = eif_estimate(ds, *nuis, cfg.targets[ai], cfg.t_grid);
          for (std::size_t k = 0; k < cfg.t_grid.size(); ++k)
            reps[rep][ai * cfg.t_grid.size() + k] = {r.F_raw[k],
                                                     std::sqrt(r.variance(k, ds.size()))};
        }
      }
    } catch (const PositivityError&) {
      failed[rep] = 1;
    } catch (const TruncationError&) {
      failed[rep] = 1;
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
  if (jobs == 1) {
    for (std::size_t rep = 0; rep < cfg.replications; ++rep) run_one(rep);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j)
      pool.emplace_back([&, j] {
        for (std::size_t rep = j; rep < cfg.replications; rep += jobs) run_one(rep);
      });
    for (auto& th : pool) th.join();
  }

  StudyResult out;
  out.replications = cfg.replications;
  for (char f : failed) out.failed_replications += f;

  const double z = norm_quantile(0.5 + cfg.level / 2.0);
  for (std::size_t ai = 0; ai < cfg.targets.size(); ++ai)
    for (std::size_t k = 0; k < cfg.t_grid.size(); ++k) {
      StudyCell cell;
      cell.a = cfg.targets[ai];
      cell.t = cfg.t_grid[k];
      cell.truth = study_truth(cfg.sim, cfg.targets[ai], cfg.t_grid[k]).f;

      double sum = 0.0, sumsq = 0.0, se_sum = 0.0;
      std::size_t cover = 0;
      for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
        const auto [est, se] = reps[rep][ai * cfg.t_grid.size() + k];
        if (std::isnan(est) || std::isnan(se)) continue;
        sum += est;
        sumsq += est * est;
        se_sum += se;
        if (cell.truth >= est - z * se && cell.truth <= est + z * se) ++cover;
        ++cell.used;
      }
      if (cell.used > 0) {
        const double m = sum / static_cast<double>(cell.used);
        cell.mean_est = m;
        cell.bias = m - cell.truth;
        cell.mean_se = se_sum / static_cast<double>(cell.used);
        cell.coverage = static_cast<double>(cover) / static_cast<double>(cell.used);
        if (cell.used > 1)
          cell.sd = std::sqrt(std::max(0.0, sumsq - sum * m) /
                              static_cast<double>(cell.used - 1));
      }
      out.cells.push_back(cell);
    }
  return out;
}

}  // namespace sepath
