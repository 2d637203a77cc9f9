#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gecopt/igdt.hpp"
#include "gecopt/model.hpp"
#include "gecopt/oracle.hpp"

using namespace gecopt;

namespace {
const std::string kDataDir = GECOPT_DATA_DIR;
}

TEST_CASE("igdt: target construction and domain checks") {
  auto r = make_target(IgdtMode::robust, 0.5, 1000.0);
  CHECK(r.cost_target == doctest::Approx(1500.0));
  auto o = make_target(IgdtMode::opportunity, 0.3, 1000.0);
  CHECK(o.cost_target == doctest::Approx(700.0));
  CHECK_THROWS_AS(make_target(IgdtMode::robust, -0.1, 1000.0),
                  std::domain_error);
  CHECK_THROWS_AS(make_target(IgdtMode::opportunity, 1.0, 1000.0),
                  std::domain_error);
}

TEST_CASE("igdt: critical price envelopes") {
  PriceForecast fc{{50.0, 40.0}};
  auto worst = critical_prices(fc, 0.206, IgdtMode::robust);
  CHECK(worst[0] == doctest::Approx(50.0 * 0.794).epsilon(1e-12));
  auto best = critical_prices(fc, 0.121, IgdtMode::opportunity);
  CHECK(best[0] == doctest::Approx(50.0 * 1.121).epsilon(1e-12));
  CHECK(best[1] == doctest::Approx(40.0 * 1.121).epsilon(1e-12));
  CHECK_THROWS_AS(critical_prices(fc, 1.5, IgdtMode::robust),
                  std::domain_error);
}

TEST_CASE("igdt: base cost of the coupled fixture") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto [b0, sol] = base_cost(sys, fc);
  CHECK(b0 == doctest::Approx(9250.0).epsilon(1e-6));
  CHECK(sol.total_cost == doctest::Approx(b0));
}

TEST_CASE("igdt: robustness matches closed form on the analytic fixture") {
  // one bus, gen cost 10 / pmax 500, load 400, tie limit 100, price 40:
  // while exports stay saturated, cost(alpha) = B0 + 16000 * alpha, so the
  // ceiling (1 + sigma) * 4000 is hit at alpha = sigma / 4.
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  for (double sigma : {0.1, 0.2, 0.4}) {
    auto r = solve_robustness(sys, fc, sigma);
    REQUIRE(!r.failed);
    CHECK(std::abs(r.horizon_opt - sigma / 4.0) <= 1e-4);
    CHECK(!r.saturated);
    CHECK(!r.infeasible_at_zero);
  }
}

TEST_CASE("igdt: opportunity matches closed form on the analytic fixture") {
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  for (double rho : {0.1, 0.2, 0.4}) {
    auto r = solve_opportunity(sys, fc, rho);
    REQUIRE(!r.failed);
    CHECK(std::abs(r.horizon_opt - rho / 4.0) <= 1e-4);
    CHECK(!r.unreachable);
  }
}

TEST_CASE("igdt: sigma = 0 gives a zero horizon") {
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  auto r = solve_robustness(sys, fc, 0.0);
  REQUIRE(!r.failed);
  CHECK(r.horizon_opt <= 1e-4);
}

TEST_CASE("igdt: boundary certificate straddles the cost target") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  const double sigma = 0.05;
  auto r = solve_robustness(sys, fc, sigma);
  REQUIRE(!r.failed);
  REQUIRE(!r.saturated);
  const double ceiling = (1.0 + sigma) * 9250.0;
  // feasible just inside the reported horizon
  {
    auto prices = critical_prices(fc, std::max(0.0, r.horizon_opt - 1e-4),
                                  IgdtMode::robust);
    auto [c, sol] = base_cost(sys, PriceForecast{prices});
    CHECK(c <= ceiling + 1e-6 * ceiling);
  }
  // violating just beyond it
  {
    auto prices =
        critical_prices(fc, r.horizon_opt + 1e-3, IgdtMode::robust);
    auto [c, sol] = base_cost(sys, PriceForecast{prices});
    CHECK(c > ceiling);
  }
  CHECK(r.certificate.total_cost <= ceiling + 1e-6 * ceiling);
}

TEST_CASE("igdt: horizons grow with the deviation factor") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  std::vector<double> sigmas{0.02, 0.05, 0.08, 0.12};
  auto rs = sweep(sys, fc, IgdtMode::robust, sigmas);
  REQUIRE(rs.size() == sigmas.size());
  for (std::size_t i = 1; i < rs.size(); ++i) {
    REQUIRE(!rs[i].failed);
    CHECK(rs[i].horizon_opt >= rs[i - 1].horizon_opt - 1e-6);
  }
  auto os = sweep(sys, fc, IgdtMode::opportunity, sigmas);
  for (std::size_t i = 1; i < os.size(); ++i) {
    REQUIRE(!os[i].failed);
    CHECK(os[i].horizon_opt >= os[i - 1].horizon_opt - 1e-6);
  }
}

TEST_CASE("igdt: sweep is deterministic across worker counts") {
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  std::vector<double> sigmas{0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  auto one = sweep(sys, fc, IgdtMode::robust, sigmas, {}, 1);
  auto four = sweep(sys, fc, IgdtMode::robust, sigmas, {}, 4);
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].horizon_opt == four[i].horizon_opt);  // bit-for-bit
    CHECK(one[i].certificate.total_cost == four[i].certificate.total_cost);
  }
}

TEST_CASE("igdt: robust saturation at full price collapse") {
  // the export price never beats the marginal cost, so no power is sold and
  // the worst-case cost stays flat at the base cost for every alpha
  std::string doc = R"({
    "base_mva": 100, "horizon": 1,
    "buses": [{"id": "a", "is_reference": true}],
    "tie_lines": [{"id": "t", "from_bus": "a", "external_zone": "z",
                   "reactance": 0.1, "export_limit": 50}],
    "generators": [{"id": "g", "bus": "a", "cost_coeff": 10.0,
                    "p_min": 0, "p_max": 200,
                    "ramp_up": 500, "ramp_down": 500}],
    "electric_loads": {"a": [100.0]}
  })";
  auto sys = parse_system(doc);
  PriceForecast fc{{5.0}};
  auto r = solve_robustness(sys, fc, 0.1);
  REQUIRE(!r.failed);
  CHECK(r.saturated);
  CHECK(r.horizon_opt == doctest::Approx(1.0));
}

TEST_CASE("igdt: opportunity floor below reach is flagged unreachable") {
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  // alpha-hat(rho) = rho / 4 only while exports saturate; with alpha_max = 2
  // the best achievable cost is 4000 - 16000*2 ... actually reachable, so
  // instead cap alpha_max low to force the flag.
  IgdtSettings st;
  st.alpha_max = 0.01;
  auto r = solve_opportunity(sys, fc, 0.4, st);
  REQUIRE(!r.failed);
  CHECK(r.unreachable);
}

TEST_CASE("igdt: bisection trace brackets shrink monotonically") {
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  auto r = solve_robustness(sys, fc, 0.2);
  REQUIRE(!r.failed);
  REQUIRE(r.trace.size() >= 3);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    const double w0 = r.trace[i - 1].hi - r.trace[i - 1].lo;
    const double w1 = r.trace[i].hi - r.trace[i].lo;
    CHECK(w1 <= 0.5 * w0 + 1e-12);
  }
}

TEST_CASE("igdt: solver horizons agree with the exhaustive scan") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  const double sigma = 0.05;
  auto r = solve_robustness(sys, fc, sigma);
  REQUIRE(!r.failed);
  const double scan = oracle::brute_force_horizon(sys, fc, IgdtMode::robust,
                                                  sigma, 2e-3, {});
  CHECK(std::abs(r.horizon_opt - scan) <= 4e-3);
  const double rho = 0.05;
  auto o = solve_opportunity(sys, fc, rho);
  REQUIRE(!o.failed);
  const double oscan = oracle::brute_force_horizon(
      sys, fc, IgdtMode::opportunity, rho, 2e-3, {});
  CHECK(std::abs(o.horizon_opt - oscan) <= 4e-3);
}
