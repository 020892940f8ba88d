#include <cmath>

#include "doctest.h"
#include "mhdbl/errors.hpp"
#include "mhdbl/pipeline.hpp"

using namespace mhdbl;

TEST_CASE("sweep preconditions") {
  CHECK_NOTHROW(validate_sweep({4e-2, 2e-2, 1e-2, 4e-3}, 0.4));
  CHECK_THROWS_AS(validate_sweep({4e-2, 2e-2, 1e-2}, 0.4), ConfigError);
  CHECK_THROWS_AS(validate_sweep({4e-2, 3e-2, 2e-2, 1e-2}, 0.4), ConfigError);
  CHECK_THROWS_AS(validate_sweep({5e-2, 2e-2, 1e-2, 5e-3}, 0.4), ConfigError);
}

TEST_CASE("solver failures carry module, operation and eps") {
  PipelineConfig c;
  c.params.eps = 1e-2;
  c.grid.nx = 16;
  c.grid.ny = 64;
  c.grid.nY = 32;
  c.baseline_ratio_max = 1e-3;
  try {
    run_pipeline(c);
    FAIL("expected a ratio violation");
  } catch (const Error& e) {
    CHECK(e.kind() == "RatioViolated");
    CHECK(e.module() == "remainder");
    CHECK(std::string(e.what()).find("eps = 0.01") != std::string::npos);
  }
  c.profile = "unknown";
  CHECK_THROWS_AS(run_pipeline(c, Stage::validate), Error);
}

TEST_CASE("structural checks of a coarse mild run") {
  PipelineConfig c;
  c.grid.nx = 32;
  c.grid.ny = 64;
  c.grid.nY = 64;
  auto r = run_pipeline(c);
  auto checks = structural_checks(r, c);
  REQUIRE(checks.size() == 14);
  for (const auto& k : checks) {
    INFO(k.name << " " << k.measured);
    if (k.name == "magnetic_multiplier") continue;
    CHECK(k.pass);
  }
}

TEST_CASE("study rows follow the eps order and are independent of the job count") {
  PipelineConfig c;
  c.grid.nx = 16;
  c.grid.ny = 64;
  c.grid.nY = 32;
  const std::vector<double> eps{4e-2, 1e-2, 2e-2, 4e-3};
  auto one = scaling_study(c, eps, 1, false);
  auto two = scaling_study(c, eps, 3, false);
  REQUIRE(one.rows.size() == eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) {
    CHECK(one.rows[k].eps == eps[k]);
    CHECK(one.rows[k].weighted == two.rows[k].weighted);
  }
  CHECK(one.weighted.slope == two.weighted.slope);
}
