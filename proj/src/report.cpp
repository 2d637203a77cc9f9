#include "gecopt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace gecopt::report {

using nlohmann::json;

namespace {

std::string num(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

json solution_json(const CoupledSystem& sys, const DispatchSolution& sol) {
  json j;
  j["horizon"] = sol.horizon;
  j["generation_cost"] = sol.generation_cost;
  j["gas_cost"] = sol.gas_cost;
  j["export_revenue"] = sol.export_revenue;
  j["total_cost"] = sol.total_cost;
  auto ids = [](const auto& v) {
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(e.id);
    return out;
  };
  j["generators"] = ids(sys.generators);
  j["wind_units"] = ids(sys.wind_units);
  j["branches"] = ids(sys.branches);
  j["tie_lines"] = ids(sys.tie_lines);
  j["buses"] = ids(sys.buses);
  j["suppliers"] = ids(sys.suppliers);
  j["pipelines"] = ids(sys.pipelines);
  j["gas_nodes"] = ids(sys.gas_nodes);
  j["gen_mw"] = sol.gen_mw;
  j["wind_mw"] = sol.wind_mw;
  j["branch_mw"] = sol.branch_mw;
  j["tie_mw"] = sol.tie_mw;
  j["angle_rad"] = sol.angle_rad;
  j["supply_ksm3h"] = sol.supply_ksm3h;
  j["pipe_flow_ksm3h"] = sol.pipe_flow_ksm3h;
  j["pressure_bar"] = sol.pressure_bar;
  j["diagnostics"] = {
      {"slp_iterations", sol.diagnostics.slp_iterations},
      {"max_weymouth_residual", sol.diagnostics.max_weymouth_residual},
      {"max_power_imbalance_pu", sol.diagnostics.max_power_imbalance_pu},
      {"max_gas_imbalance", sol.diagnostics.max_gas_imbalance}};
  return j;
}

}  // namespace

std::string format_factor(double v) {
  std::string s = num(v, "%.3f");
  while (s.size() > 1 && s.back() == '0' &&
         s[s.size() - 2] != '.')  // keep one decimal
    s.pop_back();
  return s;
}

std::string export_results(const CoupledSystem& sys, const DispatchSolution& sol,
                           Format format) {
  if (format == Format::json) return solution_json(sys, sol).dump(2) + "\n";
  std::ostringstream os;
  os << "hour";
  for (const auto& g : sys.generators) os << ",gen:" << g.id;
  for (const auto& w : sys.wind_units) os << ",wind:" << w.id;
  for (const auto& b : sys.branches) os << ",branch:" << b.id;
  for (const auto& t : sys.tie_lines) os << ",tie:" << t.id;
  for (const auto& s : sys.suppliers) os << ",supply:" << s.id;
  for (const auto& p : sys.pipelines) os << ",flow:" << p.id;
  for (const auto& n : sys.gas_nodes) os << ",pressure:" << n.id;
  os << "\n";
  for (int t = 0; t < sol.horizon; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    os << (t + 1);
    auto emit = [&](const std::vector<double>& row) {
      for (double v : row) os << "," << num(v, "%.6f");
    };
    emit(sol.gen_mw[tt]);
    emit(sol.wind_mw[tt]);
    emit(sol.branch_mw[tt]);
    emit(sol.tie_mw[tt]);
    emit(sol.supply_ksm3h[tt]);
    emit(sol.pipe_flow_ksm3h[tt]);
    emit(sol.pressure_bar[tt]);
    os << "\n";
  }
  return os.str();
}

std::string export_results(const IgdtResult& r, Format format) {
  const bool robust = r.target.mode == IgdtMode::robust;
  if (format == Format::csv) {
    std::ostringstream os;
    os << (robust ? "sigma,alpha_hat,B_c" : "rho,beta_hat,B_w") << "\n";
    os << format_factor(r.target.deviation_factor) << ","
       << num(r.horizon_opt, "%.3f") << "," << num(r.target.cost_target, "%.2f")
       << "\n";
    return os.str();
  }
  json j;
  j["mode"] = robust ? "robust" : "opportunity";
  j["deviation_factor"] = r.target.deviation_factor;
  j["base_cost"] = r.target.base_cost;
  j["cost_target"] = r.target.cost_target;
  j["horizon_opt"] = r.horizon_opt;
  j["saturated"] = r.saturated;
  j["unreachable"] = r.unreachable;
  j["infeasible_at_zero"] = r.infeasible_at_zero;
  j["failed"] = r.failed;
  if (r.failed) j["error"] = r.error;
  j["total_export_mw"] = r.total_export_mw;
  j["total_generation_mw"] = r.total_generation_mw;
  j["total_supply_1e6sm3"] = r.total_supply_ksm3 / 1000.0;
  j["bisection_trace"] = json::array();
  for (const auto& s : r.trace)
    j["bisection_trace"].push_back({{"lo", s.lo},
                                    {"hi", s.hi},
                                    {"probe", s.probe},
                                    {"cost", s.cost},
                                    {"feasible", s.feasible}});
  return j.dump(2) + "\n";
}

std::string sweep_csv(IgdtMode mode, const std::vector<IgdtResult>& results) {
  std::ostringstream os;
  os << (mode == IgdtMode::robust ? "sigma,alpha_hat,B_c" : "rho,beta_hat,B_w")
     << "\n";
  for (const auto& r : results) {
    if (r.failed) {
      os << format_factor(r.target.deviation_factor) << ",failed,failed\n";
      continue;
    }
    os << format_factor(r.target.deviation_factor) << ","
       << num(r.horizon_opt, "%.3f") << "," << num(r.target.cost_target, "%.2f")
       << "\n";
  }
  return os.str();
}

std::string sweep_aggregates_csv(const std::vector<IgdtResult>& results) {
  std::ostringstream os;
  os << "factor,P_iz_MW,P_g_MW,S_k_1e6Sm3\n";
  for (const auto& r : results) {
    if (r.failed) {
      os << format_factor(r.target.deviation_factor) << ",failed,failed,failed\n";
      continue;
    }
    os << format_factor(r.target.deviation_factor) << ","
       << num(r.total_export_mw, "%.2f") << "," << num(r.total_generation_mw, "%.2f")
       << "," << num(r.total_supply_ksm3 / 1000.0, "%.3f") << "\n";
  }
  return os.str();
}

std::string sweep_curve_svg(IgdtMode mode, const std::vector<IgdtResult>& results) {
  const double width = 640, height = 420;
  const double ml = 70, mr = 20, mt = 20, mb = 55;
  double fmax = 1e-9, hmax = 1e-9;
  for (const auto& r : results) {
    if (r.failed) continue;
    fmax = std::max(fmax, r.target.deviation_factor);
    hmax = std::max(hmax, r.horizon_opt);
  }
  auto px = [&](double f) { return ml + (width - ml - mr) * f / fmax; };
  auto py = [&](double h) { return height - mb - (height - mt - mb) * h / hmax; };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
     << width - mr << "\" y2=\"" << height - mb
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << height - mb << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  bool first = true;
  for (const auto& r : results) {
    if (r.failed) continue;
    if (!first) os << " ";
    first = false;
    os << num(px(r.target.deviation_factor), "%.2f") << ","
       << num(py(r.horizon_opt), "%.2f");
  }
  os << "\"/>\n";
  for (const auto& r : results) {
    if (r.failed) continue;
    os << "<circle cx=\"" << num(px(r.target.deviation_factor), "%.2f")
       << "\" cy=\"" << num(py(r.horizon_opt), "%.2f")
       << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  os << "<text x=\"" << (ml + (width - ml - mr) / 2) << "\" y=\""
     << height - 15 << "\" text-anchor=\"middle\" font-size=\"14\">"
     << "cost deviation factor</text>\n";
  os << "<text x=\"18\" y=\"" << (mt + (height - mt - mb) / 2)
     << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
     << (mt + (height - mt - mb) / 2) << ")\">optimum horizon"
     << (mode == IgdtMode::robust ? " (alpha)" : " (beta)") << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string slp_trace_csv(const SlpTrace& trace) {
  std::ostringstream os;
  os << "iteration,objective,max_residual,trust_frac,accepted\n";
  int i = 1;
  for (const auto& it : trace.iterations)
    os << i++ << "," << num(it.objective, "%.6f") << ","
       << num(it.max_residual, "%.9f") << "," << num(it.trust_frac, "%.6f")
       << "," << (it.accepted ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace gecopt::report
