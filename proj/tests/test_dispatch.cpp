#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gecopt/dispatch.hpp"
#include "gecopt/model.hpp"

using namespace gecopt;

namespace {
const std::string kDataDir = GECOPT_DATA_DIR;

DispatchProblem make_problem(const CoupledSystem& sys,
                             const std::vector<double>& prices) {
  DispatchProblem p;
  p.system = &sys;
  p.prices = prices;
  return p;
}
}  // namespace

TEST_CASE("dispatch: coupled fixture converges to the frozen optimum") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto out = solve_dispatch(make_problem(sys, fc.lambda_tilde));
  REQUIRE(out.status == DispatchStatus::converged);
  // independently derived grid-search optimum, frozen
  CHECK(out.solution.total_cost == doctest::Approx(9250.0).epsilon(1e-6));
  CHECK(out.solution.diagnostics.max_weymouth_residual <= 1e-4);
}

TEST_CASE("dispatch: solution satisfies every physical balance") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto out = solve_dispatch(make_problem(sys, fc.lambda_tilde));
  REQUIRE(out.status == DispatchStatus::converged);
  const auto& s = out.solution;
  CHECK(s.diagnostics.max_power_imbalance_pu <= 1e-7);
  CHECK(s.diagnostics.max_gas_imbalance <= 1e-6);
  for (int t = 0; t < sys.horizon; ++t) {
    for (std::size_t g = 0; g < sys.generators.size(); ++g) {
      CHECK(s.gen_mw[t][g] >= sys.generators[g].p_min - 1e-7);
      CHECK(s.gen_mw[t][g] <= sys.generators[g].p_max + 1e-7);
    }
    for (std::size_t l = 0; l < sys.tie_lines.size(); ++l) {
      CHECK(s.tie_mw[t][l] >= -1e-7);
      CHECK(s.tie_mw[t][l] <= sys.tie_lines[l].export_limit + 1e-7);
    }
    for (std::size_t m = 0; m < sys.gas_nodes.size(); ++m) {
      CHECK(s.pressure_bar[t][m] >= sys.gas_nodes[m].pressure_min - 1e-6);
      CHECK(s.pressure_bar[t][m] <= sys.gas_nodes[m].pressure_max + 1e-6);
    }
  }
}

TEST_CASE("dispatch: cost decomposition matches independent evaluation") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto out = solve_dispatch(make_problem(sys, fc.lambda_tilde));
  REQUIRE(out.status == DispatchStatus::converged);
  const double recomputed = evaluate_cost(sys, out.solution, fc.lambda_tilde);
  CHECK(recomputed == doctest::Approx(out.solution.total_cost).epsilon(1e-10));
  CHECK(out.solution.total_cost ==
        doctest::Approx(out.solution.generation_cost + out.solution.gas_cost -
                        out.solution.export_revenue)
            .epsilon(1e-12));
}

TEST_CASE("dispatch: raising the export price never raises the cost") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto base = solve_dispatch(make_problem(sys, fc.lambda_tilde));
  REQUIRE(base.status == DispatchStatus::converged);
  std::vector<double> higher = fc.lambda_tilde;
  for (auto& p : higher) p *= 1.2;
  auto up = solve_dispatch(make_problem(sys, higher));
  REQUIRE(up.status == DispatchStatus::converged);
  CHECK(up.solution.total_cost <= base.solution.total_cost + 1e-6);
}

TEST_CASE("dispatch: zero export prices remove the revenue term") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  std::vector<double> zero(sys.horizon, 0.0);
  auto out = solve_dispatch(make_problem(sys, zero));
  REQUIRE(out.status == DispatchStatus::converged);
  CHECK(out.solution.export_revenue == doctest::Approx(0.0));
  CHECK(out.solution.total_cost ==
        doctest::Approx(out.solution.generation_cost + out.solution.gas_cost)
            .epsilon(1e-10));
}

TEST_CASE("dispatch: electric-only fixture solves without a gas network") {
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  auto out = solve_dispatch(make_problem(sys, fc.lambda_tilde));
  REQUIRE(out.status == DispatchStatus::converged);
  // gen cost 10, price 40, export limit 100: per hour 400*10 + 100*10 - 100*40
  CHECK(out.solution.total_cost == doctest::Approx(4000.0).epsilon(1e-9));
  CHECK(out.solution.diagnostics.slp_iterations == 1);
  CHECK(out.solution.gas_cost == 0.0);
}

TEST_CASE("dispatch: infeasible load names the violated balance") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  // load far above installed capacity in hour 2 (index 1)
  sys.loads.electric["b1"][1] = 1000.0;
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto out = solve_dispatch(make_problem(sys, fc.lambda_tilde));
  CHECK(out.status == DispatchStatus::infeasible);
  CHECK(out.diagnostics.find("hour 2") != std::string::npos);
  CHECK(out.diagnostics.find("power balance") != std::string::npos);
}

TEST_CASE("dispatch: tie flow obeys the DC relation of the solved angles") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  DispatchVarMap map;
  std::vector<std::vector<double>> u0(sys.horizon);
  for (int t = 0; t < sys.horizon; ++t)
    for (const auto& n : sys.gas_nodes)
      u0[t].push_back(0.5 * (n.pressure_min * n.pressure_min +
                             n.pressure_max * n.pressure_max));
  auto lp = build_lp(sys, fc.lambda_tilde, u0, 0.25, &map);
  auto sol = lp::solve_lp(lp);
  REQUIRE(sol.status == lp::LpStatus::optimal);
  for (int t = 0; t < sys.horizon; ++t) {
    for (std::size_t l = 0; l < sys.branches.size(); ++l) {
      const auto& br = sys.branches[l];
      const double expect = sys.base_mva *
                            (sol.x[map.angle(t, sys.bus_index(br.from_bus))] -
                             sol.x[map.angle(t, sys.bus_index(br.to_bus))]) /
                            br.reactance;
      CHECK(sol.x[map.branch(t, static_cast<int>(l))] ==
            doctest::Approx(expect).epsilon(1e-8));
    }
  }
}

TEST_CASE("dispatch: DC flow arithmetic on interconnector data") {
  // x = 0.0245 pu on a 100 MVA base: a 0.049 rad angle gap carries 200 MW
  std::string doc = R"({
    "base_mva": 100, "horizon": 1,
    "buses": [{"id": "a", "is_reference": true}],
    "tie_lines": [{"id": "t", "from_bus": "a", "external_zone": "z",
                   "reactance": 0.0245, "export_limit": 900}],
    "generators": [{"id": "g", "bus": "a", "cost_coeff": 1.0,
                    "p_min": 200, "p_max": 200,
                    "ramp_up": 1000, "ramp_down": 1000}],
    "electric_loads": {"a": [0.0]}
  })";
  auto sys = parse_system(doc);
  auto out = solve_dispatch(make_problem(sys, {50.0}));
  REQUIRE(out.status == DispatchStatus::converged);
  CHECK(out.solution.tie_mw[0][0] == doctest::Approx(200.0).epsilon(1e-8));
  // internal bus is the reference, so its angle stays at zero and the whole
  // 0.049 rad gap sits on the free external angle
  CHECK(out.solution.angle_rad[0][0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(out.solution.total_cost ==
        doctest::Approx(200.0 * 1.0 - 200.0 * 50.0).epsilon(1e-9));
}

TEST_CASE("dispatch: ramp limits bind across hours") {
  std::string doc = R"({
    "base_mva": 100, "horizon": 2,
    "buses": [{"id": "a", "is_reference": true}],
    "generators": [{"id": "g", "bus": "a", "cost_coeff": 5.0,
                    "p_min": 0, "p_max": 100,
                    "ramp_up": 10, "ramp_down": 10}],
    "tie_lines": [{"id": "t", "from_bus": "a", "external_zone": "z",
                   "reactance": 0.1, "export_limit": 500}],
    "electric_loads": {"a": [20.0, 20.0]}
  })";
  auto sys = parse_system(doc);
  // price above cost in hour 2 only: unconstrained optimum would jump to 100
  auto out = solve_dispatch(make_problem(sys, {0.0, 50.0}));
  REQUIRE(out.status == DispatchStatus::converged);
  CHECK(out.solution.gen_mw[1][0] - out.solution.gen_mw[0][0] <= 10.0 + 1e-7);
  CHECK(out.solution.gen_mw[1][0] ==
        doctest::Approx(out.solution.gen_mw[0][0] + 10.0).epsilon(1e-7));
}

TEST_CASE("dispatch: SLP trace records accepted iterations") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto out = solve_dispatch(make_problem(sys, fc.lambda_tilde));
  REQUIRE(out.status == DispatchStatus::converged);
  REQUIRE(!out.trace.iterations.empty());
  CHECK(out.trace.iterations.back().accepted);
  CHECK(out.trace.iterations.back().max_residual <= 1e-4);
  CHECK(static_cast<int>(out.trace.iterations.size()) ==
        out.solution.diagnostics.slp_iterations);
}
