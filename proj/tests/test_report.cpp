#include <doctest.h>

#include <string>
#include <vector>

#include "gecopt/dispatch.hpp"
#include "gecopt/igdt.hpp"
#include "gecopt/model.hpp"
#include "gecopt/report.hpp"

using namespace gecopt;

namespace {
const std::string kDataDir = GECOPT_DATA_DIR;

DispatchOutcome tiny3_outcome(const CoupledSystem& sys,
                              const PriceForecast& fc) {
  DispatchProblem p;
  p.system = &sys;
  p.prices = fc.lambda_tilde;
  return solve_dispatch(p);
}
}  // namespace

TEST_CASE("report: hourly CSV lists every entity column") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto out = tiny3_outcome(sys, fc);
  REQUIRE(out.status == DispatchStatus::converged);
  const auto csv = report::export_results(sys, out.solution, report::Format::csv);
  CHECK(csv.find("hour") == 0);
  CHECK(csv.find("gen:g1") != std::string::npos);
  CHECK(csv.find("wind:w1") != std::string::npos);
  CHECK(csv.find("branch:br1") != std::string::npos);
  CHECK(csv.find("tie:t1") != std::string::npos);
  CHECK(csv.find("supply:s1") != std::string::npos);
  CHECK(csv.find("flow:p1") != std::string::npos);
  CHECK(csv.find("pressure:n3") != std::string::npos);
  // one header plus one row per hour
  int rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == sys.horizon + 1);
}

TEST_CASE("report: JSON export carries the cost decomposition") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto out = tiny3_outcome(sys, fc);
  REQUIRE(out.status == DispatchStatus::converged);
  const auto js = report::export_results(sys, out.solution, report::Format::json);
  CHECK(js.find("\"total_cost\"") != std::string::npos);
  CHECK(js.find("\"generation_cost\"") != std::string::npos);
  CHECK(js.find("\"export_revenue\"") != std::string::npos);
  CHECK(js.find("\"diagnostics\"") != std::string::npos);
}

TEST_CASE("report: serializers are byte-for-byte deterministic") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto a = tiny3_outcome(sys, fc);
  auto b = tiny3_outcome(sys, fc);
  REQUIRE(a.status == DispatchStatus::converged);
  CHECK(report::export_results(sys, a.solution, report::Format::csv) ==
        report::export_results(sys, b.solution, report::Format::csv));
  CHECK(report::export_results(sys, a.solution, report::Format::json) ==
        report::export_results(sys, b.solution, report::Format::json));
}

TEST_CASE("report: sweep CSV headers follow the mode") {
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  auto rs = sweep(sys, fc, IgdtMode::robust, {0.1, 0.2});
  const auto rcsv = report::sweep_csv(IgdtMode::robust, rs);
  CHECK(rcsv.rfind("sigma,alpha_hat,B_c\n", 0) == 0);
  auto os = sweep(sys, fc, IgdtMode::opportunity, {0.1});
  const auto ocsv = report::sweep_csv(IgdtMode::opportunity, os);
  CHECK(ocsv.rfind("rho,beta_hat,B_w\n", 0) == 0);
  const auto agg = report::sweep_aggregates_csv(rs);
  CHECK(agg.rfind("factor,P_iz_MW,P_g_MW,S_k_1e6Sm3\n", 0) == 0);
}

TEST_CASE("report: empty sweep yields a header-only file") {
  const auto csv = report::sweep_csv(IgdtMode::robust, {});
  CHECK(csv == "sigma,alpha_hat,B_c\n");
  CHECK(report::sweep_aggregates_csv({}) == "factor,P_iz_MW,P_g_MW,S_k_1e6Sm3\n");
}

TEST_CASE("report: failed sweep points are marked") {
  IgdtResult bad;
  bad.target = make_target(IgdtMode::robust, 0.3, 100.0);
  bad.failed = true;
  bad.error = "solver blew up";
  const auto csv = report::sweep_csv(IgdtMode::robust, {bad});
  CHECK(csv.find("failed") != std::string::npos);
}

TEST_CASE("report: SVG curve is a well-formed polyline plot") {
  auto sys = load_system(kDataDir + "/analytic1.json");
  auto fc = load_prices(kDataDir + "/analytic1_prices.csv", sys.horizon);
  auto rs = sweep(sys, fc, IgdtMode::robust, {0.1, 0.2, 0.3});
  const auto svg = report::sweep_curve_svg(IgdtMode::robust, rs);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("cost deviation factor") != std::string::npos);
}

TEST_CASE("report: SLP trace CSV mirrors the iterations") {
  auto sys = load_system(kDataDir + "/tiny3.json");
  auto fc = load_prices(kDataDir + "/tiny3_prices.csv", sys.horizon);
  auto out = tiny3_outcome(sys, fc);
  REQUIRE(out.status == DispatchStatus::converged);
  const auto csv = report::slp_trace_csv(out.trace);
  CHECK(csv.rfind("iteration,", 0) == 0);
  int rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == static_cast<int>(out.trace.iterations.size()) + 1);
}

TEST_CASE("report: factor formatting trims zeros but keeps one decimal") {
  CHECK(report::format_factor(0.0) == "0.0");
  CHECK(report::format_factor(0.05) == "0.05");
  CHECK(report::format_factor(0.5) == "0.5");
  CHECK(report::format_factor(0.45) == "0.45");
  CHECK(report::format_factor(1.0) == "1.0");
}
