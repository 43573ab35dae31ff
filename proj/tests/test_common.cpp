#include <catch2/catch_amalgamated.hpp>

#include "sepath/common.hpp"
#include "sepath/step_function.hpp"

using namespace sepath;

TEST_CASE("expit basics") {
  CHECK(expit(0.0) == Catch::Approx(0.5));
  CHECK(expit(0.6) == Catch::Approx(0.6456563062));
  CHECK(expit(-0.6) == Catch::Approx(1.0 - expit(0.6)));
}

TEST_CASE("normal quantile and cdf are consistent") {
  for (double p : {0.001, 0.025, 0.1, 0.5, 0.9, 0.975, 0.999})
    CHECK(norm_cdf(norm_quantile(p)) == Catch::Approx(p).margin(1e-12));
  CHECK(norm_quantile(0.975) == Catch::Approx(1.959963984540054).margin(1e-9));
  CHECK_THROWS_AS(norm_quantile(0.0), ConfigError);
  CHECK_THROWS_AS(norm_quantile(1.0), ConfigError);
}

TEST_CASE("seed splitting is deterministic and spread out") {
  CHECK(split_seed(7, 0) == split_seed(7, 0));
  CHECK(split_seed(7, 0) != split_seed(7, 1));
  CHECK(split_seed(7, 0) != split_seed(8, 0));
}

TEST_CASE("component vector helpers") {
  CHECK(all_components(1) == ComponentVector{1, 1, 1});
  CHECK(to_string(ComponentVector{1, 0, 1}) == "(1,0,1)");
}

TEST_CASE("step function evaluation") {
  StepFunction f({1.0, 2.0, 4.0}, {0.5, 0.7, 1.2});
  CHECK(f(0.5) == 0.0);
  CHECK(f(1.0) == 0.5);
  CHECK(f(1.999) == 0.5);
  CHECK(f(2.0) == 0.7);
  CHECK(f(10.0) == 1.2);
  CHECK(f.left_limit(2.0) == 0.5);
  CHECK(f.left_limit(1.0) == 0.0);
  CHECK(f.left_limit(2.5) == 0.7);
  CHECK_THROWS_AS(StepFunction({2.0, 1.0}, {0.1, 0.2}), ConfigError);
  CHECK_THROWS_AS(StepFunction({1.0}, {0.1, 0.2}), ConfigError);
}
