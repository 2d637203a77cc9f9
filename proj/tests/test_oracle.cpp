#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gecopt/dispatch.hpp"
#include "gecopt/model.hpp"
#include "gecopt/oracle.hpp"

using namespace gecopt;

namespace {
const std::string kDataDir = GECOPT_DATA_DIR;
}

TEST_CASE("oracle: grid minimum of the coupled fixture") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  oracle::GridSpec grid;
  auto best = oracle::brute_force_dispatch(sys, fc.lambda_tilde, grid);
  CHECK(best.cost == doctest::Approx(9250.0).epsilon(1e-9));
  // optimum sits at variable bounds: both units at p_max, wind at profile
  for (int t = 0; t < sys.horizon; ++t) {
    CHECK(best.gen_mw[t][0] == doctest::Approx(60.0));
    CHECK(best.gen_mw[t][1] == doctest::Approx(50.0));
    CHECK(best.wind_mw[t][0] ==
          doctest::Approx(sys.wind_units[0].p_max_profile[t]));
  }
  // export closes the bus balance: 30 / 25 / 20 / 25 MW
  CHECK(best.tie_mw[0][0] == doctest::Approx(30.0));
  CHECK(best.tie_mw[1][0] == doctest::Approx(25.0));
  CHECK(best.tie_mw[2][0] == doctest::Approx(20.0));
  CHECK(best.tie_mw[3][0] == doctest::Approx(25.0));
}

TEST_CASE("oracle: agrees with the solver on the coupled fixture") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  DispatchProblem p;
  p.system = &sys;
  p.prices = fc.lambda_tilde;
  auto out = solve_dispatch(p);
  REQUIRE(out.status == DispatchStatus::converged);
  auto best = oracle::brute_force_dispatch(sys, fc.lambda_tilde, {});
  CHECK(std::abs(out.solution.total_cost - best.cost) <=
        0.005 * std::abs(best.cost));
}

TEST_CASE("oracle: forced single-unit dispatch is exact") {
  std::string doc = R"({
    "base_mva": 100, "horizon": 2,
    "buses": [{"id": "a", "is_reference": true}],
    "tie_lines": [{"id": "t", "from_bus": "a", "external_zone": "z",
                   "reactance": 0.1, "export_limit": 0}],
    "generators": [{"id": "g", "bus": "a", "cost_coeff": 7.0,
                    "p_min": 40, "p_max": 40,
                    "ramp_up": 100, "ramp_down": 100}],
    "electric_loads": {"a": [40.0, 40.0]}
  })";
  auto sys = parse_system(doc);
  auto best = oracle::brute_force_dispatch(sys, {10.0, 10.0}, {});
  CHECK(best.cost == doctest::Approx(2 * 40.0 * 7.0).epsilon(1e-12));
}

TEST_CASE("oracle: impossible load reports no feasible point") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  sys.loads.electric["b1"][0] = 5000.0;
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  CHECK_THROWS_WITH_AS(oracle::brute_force_dispatch(sys, fc.lambda_tilde, {}),
                       doctest::Contains("no feasible"), oracle::OracleError);
}

TEST_CASE("oracle: parallel scan reproduces the serial result exactly") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  oracle::GridSpec grid;
  auto serial = oracle::brute_force_dispatch(sys, fc.lambda_tilde, grid, false);
  auto parallel = oracle::brute_force_dispatch(sys, fc.lambda_tilde, grid, true);
  CHECK(serial.cost == parallel.cost);  // bit-for-bit
  for (int t = 0; t < sys.horizon; ++t) {
    for (std::size_t g = 0; g < serial.gen_mw[t].size(); ++g)
      CHECK(serial.gen_mw[t][g] == parallel.gen_mw[t][g]);
    for (std::size_t l = 0; l < serial.tie_mw[t].size(); ++l)
      CHECK(serial.tie_mw[t][l] == parallel.tie_mw[t][l]);
    for (std::size_t k = 0; k < serial.supply_ksm3h[t].size(); ++k)
      CHECK(serial.supply_ksm3h[t][k] == parallel.supply_ksm3h[t][k]);
  }
}

TEST_CASE("oracle: refuses oversized grids") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  oracle::GridSpec grid;
  grid.points_per_variable = 2000;
  grid.max_points = 1000;
  CHECK_THROWS_AS(oracle::brute_force_dispatch(sys, fc.lambda_tilde, grid),
                  oracle::OracleError);
}

TEST_CASE("oracle: horizon scan matches closed form on the analytic fixture") {
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  // B0 = 4000, revenue at forecast = 16000 => alpha-hat(sigma) = sigma / 4
  const double a = oracle::brute_force_horizon(sys, fc, IgdtMode::robust, 0.2,
                                               1e-3, {});
  CHECK(a == doctest::Approx(0.05).epsilon(0.05));
  const double b = oracle::brute_force_horizon(sys, fc, IgdtMode::opportunity,
                                               0.2, 1e-3, {});
  CHECK(b == doctest::Approx(0.05).epsilon(0.05));
}
