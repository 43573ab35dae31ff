#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sepath/simulate.hpp"

using namespace sepath;

TEST_CASE("covariates live on {0.5, 1} with mean 0.75") {
  std::mt19937_64 rng(11);
  auto x = draw_covariates(4, rng);
  REQUIRE(x.size() == 4);
  for (const auto& row : x)
    for (double v : row) CHECK((v == 0.5 || v == 1.0));

  std::mt19937_64 rng2(11);
  CHECK(draw_covariates(4, rng2) == x);  // reproducible

  std::mt19937_64 rng3(5);
  auto big = draw_covariates(100000, rng3);
  double mean0 = 0.0, mean1 = 0.0;
  for (const auto& row : big) {
    mean0 += row[0] / 100000.0;
    mean1 += row[1] / 100000.0;
  }
  CHECK(mean0 == Catch::Approx(0.75).margin(0.01));
  CHECK(mean1 == Catch::Approx(0.75).margin(0.01));
}

TEST_CASE("treatment assignment follows the logistic mechanism") {
  CHECK(true_propensity({1.0, 1.0}) == Catch::Approx(expit(0.6)));
  CHECK(true_propensity({0.5, 0.5}) == Catch::Approx(0.5));

  std::mt19937_64 rng(3);
  std::size_t treated = 0;
  for (int i = 0; i < 100000; ++i) treated += assign_treatment({1.0, 1.0}, rng);
  CHECK(static_cast<double>(treated) / 100000.0 ==
        Catch::Approx(expit(0.6)).margin(0.005));
}

TEST_CASE("setting-1 first transition is exponential with proportional causes") {
  const HazardTriple spec = setting_hazards(1);
  // x=(1,1), a=(1,1,1): rates 0.3 and 0.2, total 0.5, P(direct) = 0.6.
  std::mt19937_64 rng(17);
  const std::size_t reps = 200000;
  double sum_first = 0.0;
  std::size_t direct = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    LatentPath p = draw_event_times(spec, {1.0, 1.0}, {1, 1, 1}, rng);
    const double first = p.via_intermediate ? p.r : p.t;
    sum_first += first;
    if (!p.via_intermediate) ++direct;
  }
  CHECK(sum_first / static_cast<double>(reps) == Catch::Approx(2.0).margin(0.03));
  CHECK(static_cast<double>(direct) / static_cast<double>(reps) ==
        Catch::Approx(0.6).margin(0.005));
}

TEST_CASE("zero intermediate hazard means all paths are direct") {
  HazardTriple spec = setting_hazards(1);
  spec.h2.scale = 0.0;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i)
    CHECK_FALSE(draw_event_times(spec, {1.0, 1.0}, {1, 1, 1}, rng).via_intermediate);
}

TEST_CASE("setting-3 sojourn quantile matches the closed form") {
  // Lambda_sojourn(s) = 0.1(x2+a) s^2 / 2; at x2=1, a=1 the median sojourn
  // solves 0.1 s^2 = ln 2.
  const double median_truth = std::sqrt(std::log(2.0) / 0.1);
  const HazardTriple spec = setting_hazards(3);
  std::mt19937_64 rng(19);
  std::vector<double> sojourns;
  for (int i = 0; i < 400000 && sojourns.size() < 50000; ++i) {
    LatentPath p = draw_event_times(spec, {1.0, 1.0}, {1, 1, 1}, rng);
    if (p.via_intermediate) sojourns.push_back(p.t - p.r);
  }
  REQUIRE(sojourns.size() == 50000);
  std::nth_element(sojourns.begin(), sojourns.begin() + 25000, sojourns.end());
  CHECK(sojourns[25000] == Catch::Approx(median_truth).margin(0.05));
}

TEST_CASE("simulate_setting is deterministic and valid") {
  SimulationConfig cfg;
  cfg.setting_id = 1;
  cfg.n = 500;
  cfg.seed = 7;
  Dataset a = simulate_setting(cfg);
  Dataset b = simulate_setting(cfg);
  REQUIRE(a.size() == 500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.subjects[i].t_obs == b.subjects[i].t_obs);
    CHECK(a.subjects[i].r_obs == b.subjects[i].r_obs);
    CHECK(a.subjects[i].arm == b.subjects[i].arm);
    CHECK(a.subjects[i].t_obs <= cfg.censoring.admin_tau);
    if (a.subjects[i].delta_r == 0) CHECK(a.subjects[i].r_obs == a.subjects[i].t_obs);
  }
  CHECK_THROWS_AS(setting_hazards(9), ConfigError);
}

TEST_CASE("direct-terminal fraction matches the closed form") {
  // x=(1,1), arm forced to 1, no censoring: P(T<=2, direct) = 0.6(1-e^{-1}).
  SimulationConfig cfg;
  cfg.setting_id = 1;
  cfg.n = 100000;
  cfg.seed = 23;
  cfg.no_censoring = true;
  cfg.force_arm = 1;
  cfg.force_x = std::vector<double>{1.0, 1.0};
  Dataset ds = simulate_setting(cfg);
  std::size_t hits = 0;
  for (const auto& s : ds.subjects)
    if (s.delta_t == 1 && s.delta_r == 0 && s.t_obs <= 2.0) ++hits;
  CHECK(static_cast<double>(hits) / 100000.0 ==
        Catch::Approx(0.6 * (1.0 - std::exp(-1.0))).margin(0.01));
}

TEST_CASE("oracle incidence basics") {
  for (int setting : {1, 2, 3}) {
    OracleIncidence zero = oracle_incidence(setting, {1, 1, 1}, 0.0);
    CHECK(zero.f == 0.0);
  }
  OracleIncidence late = oracle_incidence(1, {1, 1, 1}, 500.0,
                                          std::vector<double>{1.0, 1.0});
  CHECK(late.f == Catch::Approx(1.0).margin(1e-9));

  // Monotone in t, bounded, and F = F1 + F3.
  double prev = -1.0;
  for (double t : {0.5, 1.0, 2.0, 3.0, 5.0}) {
    OracleIncidence o = oracle_incidence(2, {1, 0, 1}, t);
    CHECK(o.f >= prev);
    CHECK(o.f >= 0.0);
    CHECK(o.f <= 1.0);
    CHECK(o.f == Catch::Approx(o.f1 + o.f3).margin(1e-12));
    CHECK(o.f3 <= o.f2 + 1e-12);
    prev = o.f;
  }
}

TEST_CASE("closed-form oracle agrees with the Monte Carlo oracle") {
  // Setting 1, a=(1,0,1), x=(1,1): rates 0.3, 0.15, 0.4.
  const std::vector<double> x{1.0, 1.0};
  OracleIncidence cf = oracle_incidence(1, {1, 0, 1}, 2.0, x);
  MonteCarloEstimate mc = oracle_incidence_mc(1, {1, 0, 1}, 2.0, x, 1000000);
  CHECK(std::abs(cf.f - mc.value) < 4.0 * mc.std_error + 1e-6);

  // Settings 2-3 use quadrature; cross-check one point each.
  OracleIncidence cf2 = oracle_incidence(2, {1, 1, 1}, 4.0);
  MonteCarloEstimate mc2 = oracle_incidence_mc(2, {1, 1, 1}, 4.0, {}, 400000);
  CHECK(std::abs(cf2.f - mc2.value) < 4.0 * mc2.std_error + 1e-6);

  OracleIncidence cf3 = oracle_incidence(3, {1, 0, 1}, 4.0);
  MonteCarloEstimate mc3 = oracle_incidence_mc(3, {1, 0, 1}, 4.0, {}, 400000);
  CHECK(std::abs(cf3.f - mc3.value) < 4.0 * mc3.std_error + 1e-6);
}
