#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gecopt/dispatch.hpp"
#include "gecopt/igdt.hpp"
#include "gecopt/model.hpp"
#include "gecopt/report.hpp"

namespace fs = std::filesystem;
using namespace gecopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitSolver = 4;

struct CommonOpts {
  std::string system_path;
  std::string prices_path;
  std::string out_dir = "out";
  std::string format = "csv";
  double tol_alpha = 1e-4;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_out) {
  cmd->add_option("--system", o.system_path, "system JSON file")->required();
  cmd->add_option("--prices", o.prices_path, "prices CSV file")->required();
  if (needs_out) cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--tol-alpha", o.tol_alpha, "bisection tolerance on the horizon");
  cmd->add_option("--jobs", o.jobs, "worker count for sweeps (0 = auto)");
  cmd->add_option("--format", o.format, "single-result output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

void write_file(const fs::path& path, const std::string& bytes) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

// loads and validates both inputs; on failure prints and exits
struct Inputs {
  CoupledSystem system;
  PriceForecast forecast;
};

std::optional<Inputs> load_inputs(const CommonOpts& o, int& exit_code) {
  try {
    Inputs in;
    in.system = load_system(o.system_path);
    for (const auto& w : in.system.warnings)
      std::cerr << "warning: " << w << "\n";
    in.forecast = load_prices(o.prices_path, in.system.horizon);
    return in;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
    exit_code = kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    exit_code = kExitParse;
  }
  return std::nullopt;
}

std::vector<double> parse_sweep(const std::string& spec) {
  double a = 0, b = 0, step = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0)
    throw CLI::ValidationError("--sweep", "expected a:b:step with step > 0");
  std::vector<double> factors;
  for (int i = 0;; ++i) {
    const double f = a + i * step;
    if (f > b + 1e-12) break;
    factors.push_back(f);
  }
  return factors;
}

int run_validate(const CommonOpts& o) {
  int code = kExitOk;
  auto in = load_inputs(o, code);
  if (!in) return code;
  std::cout << "system ok: " << in->system.buses.size() << " buses, "
            << in->system.generators.size() << " generators, "
            << in->system.gas_nodes.size() << " gas nodes, horizon "
            << in->system.horizon << "\n";
  return kExitOk;
}

int run_base(const CommonOpts& o) {
  int code = kExitOk;
  auto in = load_inputs(o, code);
  if (!in) return code;
  DispatchProblem dp;
  dp.system = &in->system;
  dp.prices = in->forecast.lambda_tilde;
  DispatchOutcome out = solve_dispatch(dp);
  const fs::path dir(o.out_dir);
  if (out.status != DispatchStatus::converged) {
    write_file(dir / "diagnostics.txt", out.diagnostics + "\n");
    std::cerr << "solver error: " << out.diagnostics << "\n";
    return kExitSolver;
  }
  nlohmann::json j;
  j["B_0"] = out.solution.total_cost;
  j["generation_cost"] = out.solution.generation_cost;
  j["gas_cost"] = out.solution.gas_cost;
  j["export_revenue"] = out.solution.export_revenue;
  write_file(dir / "base_cost.json", j.dump(2) + "\n");
  const auto fmt = o.format == "json" ? report::Format::json : report::Format::csv;
  write_file(dir / (o.format == "json" ? "dispatch_hourly.json" : "dispatch_hourly.csv"),
             report::export_results(in->system, out.solution, fmt));
  write_file(dir / "slp_trace.csv", report::slp_trace_csv(out.trace));
  std::cout << "B_0 = " << out.solution.total_cost << "\n";
  return kExitOk;
}

int run_igdt(const CommonOpts& o, IgdtMode mode, std::optional<double> factor,
             const std::string& sweep_spec) {
  int code = kExitOk;
  auto in = load_inputs(o, code);
  if (!in) return code;
  IgdtSettings settings;
  settings.tol_alpha = o.tol_alpha;
  const std::string stem = mode == IgdtMode::robust ? "robust" : "opportunity";
  const fs::path dir(o.out_dir);
  try {
    if (!sweep_spec.empty()) {
      const auto factors = parse_sweep(sweep_spec);
      const auto results =
          sweep(in->system, in->forecast, mode, factors, settings, o.jobs);
      write_file(dir / (stem + "_sweep.csv"), report::sweep_csv(mode, results));
      write_file(dir / (stem + "_aggregates.csv"),
                 report::sweep_aggregates_csv(results));
      write_file(dir / (stem + "_curve.svg"),
                 report::sweep_curve_svg(mode, results));
      int failed = 0;
      for (const auto& r : results)
        if (r.failed) {
          ++failed;
          std::cerr << "sweep point " << r.target.deviation_factor
                    << " failed: " << r.error << "\n";
        }
      if (failed == static_cast<int>(results.size()) && failed > 0)
        return kExitSolver;
      return kExitOk;
    }
    const IgdtResult r =
        mode == IgdtMode::robust
            ? solve_robustness(in->system, in->forecast, factor.value_or(0.0), settings)
            : solve_opportunity(in->system, in->forecast, factor.value_or(0.0), settings);
    write_file(dir / (stem + "_result.json"),
               report::export_results(r, report::Format::json));
    write_file(dir / (stem + "_certificate.csv"),
               report::export_results(in->system, r.certificate, report::Format::csv));
    std::cout << stem << " horizon = " << r.horizon_opt << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    write_file(dir / "diagnostics.txt", std::string(e.what()) + "\n");
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated electricity/natural-gas dispatch with info-gap "
               "robustness and opportunity analysis"};
  app.set_config("--config", "", "TOML-style config file (flags take precedence)");
  app.require_subcommand(1);

  CommonOpts vo, bo, ro, oo;
  auto* cmd_validate = app.add_subcommand("validate", "load and validate inputs");
  add_common(cmd_validate, vo, false);

  auto* cmd_base = app.add_subcommand("base", "base-cost dispatch at forecasted prices");
  add_common(cmd_base, bo, true);

  auto* cmd_robust = app.add_subcommand("robust", "robustness horizon analysis");
  add_common(cmd_robust, ro, true);
  std::optional<double> sigma;
  std::string robust_sweep;
  cmd_robust->add_option("--sigma", sigma, "cost deviation factor");
  cmd_robust->add_option("--sweep", robust_sweep, "factor sweep a:b:step");

  auto* cmd_opp = app.add_subcommand("opportunity", "opportunity horizon analysis");
  add_common(cmd_opp, oo, true);
  std::optional<double> rho;
  std::string opp_sweep;
  cmd_opp->add_option("--rho", rho, "cost deviation factor");
  cmd_opp->add_option("--sweep", opp_sweep, "factor sweep a:b:step");

  CLI11_PARSE(app, argc, argv);

  if (cmd_validate->parsed()) return run_validate(vo);
  if (cmd_base->parsed()) return run_base(bo);
  if (cmd_robust->parsed())
    return run_igdt(ro, IgdtMode::robust, sigma, robust_sweep);
  if (cmd_opp->parsed())
    return run_igdt(oo, IgdtMode::opportunity, rho, opp_sweep);
  return kExitOk;
}
