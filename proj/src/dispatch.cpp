#include "gecopt/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gecopt/gasflow.hpp"

namespace gecopt {

using lp::LpProblem;
using lp::RowSense;

namespace {

// weight of the elastic Weymouth-mismatch variables; large against every cost
// coefficient so mismatches are driven to zero whenever physically possible
constexpr double kWeymouthPenalty = 1e5;

std::vector<std::string> distinct_zones(const CoupledSystem& sys) {
  std::vector<std::string> zones;
  for (const auto& tl : sys.tie_lines)
    if (std::find(zones.begin(), zones.end(), tl.external_zone) == zones.end())
      zones.push_back(tl.external_zone);
  return zones;
}

}  // namespace

LpProblem build_lp(const CoupledSystem& sys, const std::vector<double>& prices,
                   const std::vector<std::vector<double>>& u_point,
                   double trust_frac, DispatchVarMap* map_out,
                   std::vector<std::string>* row_labels) {
  const int T = sys.horizon;
  const int nb = static_cast<int>(sys.buses.size());
  const int ng = static_cast<int>(sys.generators.size());
  const int nw = static_cast<int>(sys.wind_units.size());
  const int nbr = static_cast<int>(sys.branches.size());
  const int nt = static_cast<int>(sys.tie_lines.size());
  const int nk = static_cast<int>(sys.suppliers.size());
  const int np = static_cast<int>(sys.pipelines.size());
  const int nm = static_cast<int>(sys.gas_nodes.size());

  DispatchVarMap map;
  map.horizon = T;
  map.zones = distinct_zones(sys);
  const int nz = static_cast<int>(map.zones.size());
  map.gen0 = 0;
  map.wind0 = map.gen0 + ng;
  map.angle0 = map.wind0 + nw;
  map.zone_angle0 = map.angle0 + nb;
  map.branch0 = map.zone_angle0 + nz;
  map.tie0 = map.branch0 + nbr;
  map.supply0 = map.tie0 + nt;
  map.flow0 = map.supply0 + nk;
  map.u0 = map.flow0 + np;
  map.pen0 = map.u0 + nm;
  map.per_hour = map.pen0 + 2 * np;

  LpProblem p;
  const int ref = sys.reference_bus();

  for (int t = 0; t < T; ++t) {
    for (int g = 0; g < ng; ++g) {
      const Generator& gen = sys.generators[g];
      double lo = gen.p_min, up = gen.p_max;
      if (t == 0 && gen.initial_output) {
        lo = std::max(lo, *gen.initial_output - gen.ramp_down);
        up = std::min(up, *gen.initial_output + gen.ramp_up);
      }
      p.add_var(gen.cost_coeff, lo, up);
    }
    for (int w = 0; w < nw; ++w)
      p.add_var(0.0, sys.wind_units[w].p_min,
                sys.wind_units[w].p_max_profile[static_cast<std::size_t>(t)]);
    for (int i = 0; i < nb; ++i) {
      if (i == ref)
        p.add_var(0.0, 0.0, 0.0);  // angle datum
      else
        p.add_var(0.0, -lp::kInf, lp::kInf);
    }
    for (int z = 0; z < nz; ++z) p.add_var(0.0, -lp::kInf, lp::kInf);
    for (int l = 0; l < nbr; ++l)
      p.add_var(0.0, -sys.branches[l].flow_limit, sys.branches[l].flow_limit);
    for (int l = 0; l < nt; ++l)
      p.add_var(-prices[static_cast<std::size_t>(t)], 0.0,
                sys.tie_lines[l].export_limit);
    for (int k = 0; k < nk; ++k)
      p.add_var(sys.suppliers[k].cost_coeff, sys.suppliers[k].s_min,
                sys.suppliers[k].s_max);
    for (int pi = 0; pi < np; ++pi) {
      (void)pi;
      p.add_var(0.0, -lp::kInf, lp::kInf);
    }
    for (int m = 0; m < nm; ++m) {
      const GasNode& node = sys.gas_nodes[m];
      const double ulo = node.pressure_min * node.pressure_min;
      const double uup = node.pressure_max * node.pressure_max;
      const double radius = trust_frac * (uup - ulo);
      const double u0 = u_point[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
      double lo = std::max(ulo, u0 - radius);
      double up = std::min(uup, u0 + radius);
      if (lo > up) {  // degenerate range (pressure_min == pressure_max)
        lo = ulo;
        up = uup;
      }
      p.add_var(0.0, lo, up);
    }
    // elastic Weymouth mismatch, two signed parts per pipeline
    for (int pi = 0; pi < 2 * np; ++pi) {
      (void)pi;
      p.add_var(kWeymouthPenalty, 0.0, lp::kInf);
    }
  }

  auto label = [&](const std::string& s) {
    if (row_labels) row_labels->push_back(s);
  };

  for (int t = 0; t < T; ++t) {
    const std::string ht = "hour " + std::to_string(t + 1);

    // per-bus power balance
    for (int i = 0; i < nb; ++i) {
      const Bus& bus = sys.buses[i];
      const int row = p.add_row(RowSense::eq, sys.electric_load(bus.id, t));
      label(ht + ": power balance at bus '" + bus.id + "'");
      for (int g = 0; g < ng; ++g)
        if (sys.generators[g].bus == bus.id) p.set_coeff(row, map.gen(t, g), 1.0);
      for (int w = 0; w < nw; ++w)
        if (sys.wind_units[w].bus == bus.id) p.set_coeff(row, map.wind(t, w), 1.0);
      for (int l = 0; l < nbr; ++l) {
        if (sys.branches[l].from_bus == bus.id)
          p.set_coeff(row, map.branch(t, l), -1.0);
        else if (sys.branches[l].to_bus == bus.id)
          p.set_coeff(row, map.branch(t, l), 1.0);
      }
      for (int l = 0; l < nt; ++l)
        if (sys.tie_lines[l].from_bus == bus.id)
          p.set_coeff(row, map.tie(t, l), -1.0);
    }

    // branch flow definition: P = base * (delta_i - delta_j) / x
    for (int l = 0; l < nbr; ++l) {
      const Branch& br = sys.branches[l];
      const int row = p.add_row(RowSense::eq, 0.0);
      label(ht + ": flow definition of branch '" + br.id + "'");
      const double k = sys.base_mva / br.reactance;
      p.set_coeff(row, map.branch(t, l), 1.0);
      p.set_coeff(row, map.angle(t, sys.bus_index(br.from_bus)), -k);
      p.set_coeff(row, map.angle(t, sys.bus_index(br.to_bus)), k);
    }

    // tie-line flow definition against free external-zone angle
    for (int l = 0; l < nt; ++l) {
      const TieLine& tl = sys.tie_lines[l];
      const int row = p.add_row(RowSense::eq, 0.0);
      label(ht + ": flow definition of tie line '" + tl.id + "'");
      const double k = sys.base_mva / tl.reactance;
      const int z = static_cast<int>(
          std::find(map.zones.begin(), map.zones.end(), tl.external_zone) -
          map.zones.begin());
      p.set_coeff(row, map.tie(t, l), 1.0);
      p.set_coeff(row, map.angle(t, sys.bus_index(tl.from_bus)), -k);
      p.set_coeff(row, map.zone_angle(t, z), k);
    }

    // per-node gas balance; gas-fired units enter as load h_g * P_g
    for (int m = 0; m < nm; ++m) {
      const GasNode& node = sys.gas_nodes[m];
      const int row = p.add_row(RowSense::eq, -sys.gas_load(node.id, t));
      label(ht + ": gas balance at node '" + node.id + "'");
      for (int pi = 0; pi < np; ++pi) {
        if (sys.pipelines[pi].from_node == node.id)
          p.set_coeff(row, map.flow(t, pi), 1.0);
        else if (sys.pipelines[pi].to_node == node.id)
          p.set_coeff(row, map.flow(t, pi), -1.0);
      }
      for (int k = 0; k < nk; ++k)
        if (sys.suppliers[k].node == node.id)
          p.set_coeff(row, map.supply(t, k), -1.0);
      for (int g = 0; g < ng; ++g) {
        const Generator& gen = sys.generators[g];
        if (gen.gas_link && gen.gas_link->node == node.id)
          p.set_coeff(row, map.gen(t, g), gen.gas_link->conversion);
      }
    }

    // linearized Weymouth rows
    for (int pi = 0; pi < np; ++pi) {
      const Pipeline& pipe = sys.pipelines[pi];
      const int im = sys.gas_node_index(pipe.from_node);
      const int in = sys.gas_node_index(pipe.to_node);
      const auto lin = gasflow::linearize_weymouth(
          pipe.weymouth_const,
          u_point[static_cast<std::size_t>(t)][static_cast<std::size_t>(im)],
          u_point[static_cast<std::size_t>(t)][static_cast<std::size_t>(in)]);
      const int row = p.add_row(
          pipe.has_compressor ? RowSense::ge : RowSense::eq, lin.constant);
      label(ht + ": Weymouth relation of pipeline '" + pipe.id + "'");
      p.set_coeff(row, map.flow(t, pi), 1.0);
      p.set_coeff(row, map.usq(t, im), -lin.coeff_m);
      p.set_coeff(row, map.usq(t, in), -lin.coeff_n);
      p.set_coeff(row, map.pen(t, pi, true), 1.0);
      if (!pipe.has_compressor) p.set_coeff(row, map.pen(t, pi, false), -1.0);
    }

    // inter-hour ramps
    if (t > 0) {
      for (int g = 0; g < ng; ++g) {
        const Generator& gen = sys.generators[g];
        int row = p.add_row(RowSense::le, gen.ramp_up);
        label(ht + ": ramp-up limit of generator '" + gen.id + "'");
        p.set_coeff(row, map.gen(t, g), 1.0);
        p.set_coeff(row, map.gen(t - 1, g), -1.0);
        row = p.add_row(RowSense::le, gen.ramp_down);
        label(ht + ": ramp-down limit of generator '" + gen.id + "'");
        p.set_coeff(row, map.gen(t, g), -1.0);
        p.set_coeff(row, map.gen(t - 1, g), 1.0);
      }
    }
  }

  if (map_out) *map_out = map;
  return p;
}

namespace {

DispatchSolution extract_solution(const CoupledSystem& sys,
                                  const DispatchVarMap& map,
                                  const std::vector<double>& x,
                                  const std::vector<double>& prices) {
  const int T = sys.horizon;
  DispatchSolution sol;
  sol.horizon = T;
  auto grab = [&](int t, int base0, int count) {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
      v[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(t * map.per_hour + base0 + i)];
    return v;
  };
  const int nb = static_cast<int>(sys.buses.size());
  for (int t = 0; t < T; ++t) {
    sol.gen_mw.push_back(grab(t, map.gen0, static_cast<int>(sys.generators.size())));
    sol.wind_mw.push_back(grab(t, map.wind0, static_cast<int>(sys.wind_units.size())));
    sol.branch_mw.push_back(grab(t, map.branch0, static_cast<int>(sys.branches.size())));
    sol.tie_mw.push_back(grab(t, map.tie0, static_cast<int>(sys.tie_lines.size())));
    sol.angle_rad.push_back(grab(t, map.angle0, nb));
    sol.supply_ksm3h.push_back(grab(t, map.supply0, static_cast<int>(sys.suppliers.size())));
    sol.pipe_flow_ksm3h.push_back(grab(t, map.flow0, static_cast<int>(sys.pipelines.size())));
    auto u = grab(t, map.u0, static_cast<int>(sys.gas_nodes.size()));
    std::vector<double> pr(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) pr[i] = std::sqrt(std::max(0.0, u[i]));
    sol.pressure_bar.push_back(pr);
  }

  double gen_cost = 0.0, gas_cost = 0.0, revenue = 0.0;
  for (int t = 0; t < T; ++t) {
    for (std::size_t g = 0; g < sys.generators.size(); ++g)
      gen_cost += sol.gen_mw[static_cast<std::size_t>(t)][g] * sys.generators[g].cost_coeff;
    for (std::size_t k = 0; k < sys.suppliers.size(); ++k)
      gas_cost += sol.supply_ksm3h[static_cast<std::size_t>(t)][k] * sys.suppliers[k].cost_coeff;
    for (std::size_t l = 0; l < sys.tie_lines.size(); ++l)
      revenue += sol.tie_mw[static_cast<std::size_t>(t)][l] * prices[static_cast<std::size_t>(t)];
  }
  sol.generation_cost = gen_cost;
  sol.gas_cost = gas_cost;
  sol.export_revenue = revenue;
  sol.total_cost = gen_cost + gas_cost - revenue;
  return sol;
}

double max_weymouth_residual(const CoupledSystem& sys, const DispatchSolution& sol) {
  double worst = 0.0;
  for (int t = 0; t < sol.horizon; ++t) {
    gasflow::PressureState st;
    for (std::size_t m = 0; m < sys.gas_nodes.size(); ++m)
      st.pressure_bar[sys.gas_nodes[m].id] = sol.pressure_bar[static_cast<std::size_t>(t)][m];
    for (std::size_t pi = 0; pi < sys.pipelines.size(); ++pi) {
      const double r = gasflow::pipeline_residual(
          sys.pipelines[pi], st, sol.pipe_flow_ksm3h[static_cast<std::size_t>(t)][pi]);
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

void fill_balance_diagnostics(const CoupledSystem& sys, DispatchSolution& sol) {
  double worst_pu = 0.0, worst_gas = 0.0;
  for (int t = 0; t < sol.horizon; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    for (std::size_t i = 0; i < sys.buses.size(); ++i) {
      const Bus& bus = sys.buses[i];
      double net = -sys.electric_load(bus.id, t);
      for (std::size_t g = 0; g < sys.generators.size(); ++g)
        if (sys.generators[g].bus == bus.id) net += sol.gen_mw[tt][g];
      for (std::size_t w = 0; w < sys.wind_units.size(); ++w)
        if (sys.wind_units[w].bus == bus.id) net += sol.wind_mw[tt][w];
      for (std::size_t l = 0; l < sys.branches.size(); ++l) {
        if (sys.branches[l].from_bus == bus.id) net -= sol.branch_mw[tt][l];
        else if (sys.branches[l].to_bus == bus.id) net += sol.branch_mw[tt][l];
      }
      for (std::size_t l = 0; l < sys.tie_lines.size(); ++l)
        if (sys.tie_lines[l].from_bus == bus.id) net -= sol.tie_mw[tt][l];
      worst_pu = std::max(worst_pu, std::abs(net) / sys.base_mva);
    }
    for (std::size_t m = 0; m < sys.gas_nodes.size(); ++m) {
      const GasNode& node = sys.gas_nodes[m];
      double net = -sys.gas_load(node.id, t);
      for (std::size_t k = 0; k < sys.suppliers.size(); ++k)
        if (sys.suppliers[k].node == node.id) net += sol.supply_ksm3h[tt][k];
      for (std::size_t g = 0; g < sys.generators.size(); ++g) {
        const Generator& gen = sys.generators[g];
        if (gen.gas_link && gen.gas_link->node == node.id)
          net -= gen.gas_link->conversion * sol.gen_mw[tt][g];
      }
      for (std::size_t pi = 0; pi < sys.pipelines.size(); ++pi) {
        if (sys.pipelines[pi].from_node == node.id)
          net -= sol.pipe_flow_ksm3h[tt][pi];
        else if (sys.pipelines[pi].to_node == node.id)
          net += sol.pipe_flow_ksm3h[tt][pi];
      }
      worst_gas = std::max(worst_gas, std::abs(net));
    }
  }
  sol.diagnostics.max_power_imbalance_pu = worst_pu;
  sol.diagnostics.max_gas_imbalance = worst_gas;
}

}  // namespace

DispatchOutcome solve_dispatch(const DispatchProblem& problem) {
  const CoupledSystem& sys = *problem.system;
  const SlpSettings& s = problem.settings;
  const int T = sys.horizon;
  const int nm = static_cast<int>(sys.gas_nodes.size());

  DispatchOutcome out;
  if (static_cast<int>(problem.prices.size()) != T) {
    out.status = DispatchStatus::infeasible;
    out.diagnostics = "price vector length does not match horizon";
    return out;
  }

  // flat squared-pressure start: a common level clipped into each node's
  // bounds, so pipeline pressure differences start near zero and the
  // linearization approaches the Weymouth root from below
  std::vector<std::vector<double>> u_point(
      static_cast<std::size_t>(T), std::vector<double>(static_cast<std::size_t>(nm)));
  double flat = 0.0;
  for (int m = 0; m < nm; ++m) {
    const GasNode& n = sys.gas_nodes[static_cast<std::size_t>(m)];
    flat += 0.5 * (n.pressure_min * n.pressure_min + n.pressure_max * n.pressure_max);
  }
  if (nm > 0) flat /= nm;
  for (int t = 0; t < T; ++t)
    for (int m = 0; m < nm; ++m) {
      const GasNode& n = sys.gas_nodes[static_cast<std::size_t>(m)];
      u_point[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] = std::clamp(
          flat, n.pressure_min * n.pressure_min, n.pressure_max * n.pressure_max);
    }

  double trust = s.trust_region_frac;
  const bool has_pipes = !sys.pipelines.empty();
  double best_residual = lp::kInf;
  double prev_obj = 0.0;
  bool have_prev_obj = false;
  DispatchSolution best_sol;
  bool have_sol = false;

  for (int iter = 0; iter < s.max_iter; ++iter) {
    DispatchVarMap map;
    std::vector<std::string> labels;
    lp::LpProblem lpp = build_lp(sys, problem.prices, u_point, trust, &map, &labels);
    lp::LpSolution lps = lp::solve_lp(lpp);

    if (lps.status == lp::LpStatus::infeasible) {
      out.status = DispatchStatus::infeasible;
      std::ostringstream os;
      os << "dispatch LP infeasible (phase-1 residual " << lps.phase1_residual << ")";
      if (lps.worst_row >= 0 && lps.worst_row < static_cast<int>(labels.size()))
        os << "; tightest constraint: " << labels[static_cast<std::size_t>(lps.worst_row)];
      out.diagnostics = os.str();
      return out;
    }
    if (lps.status == lp::LpStatus::unbounded) {
      out.status = DispatchStatus::infeasible;
      out.diagnostics = "dispatch LP unbounded (model error)";
      return out;
    }

    DispatchSolution cand = extract_solution(sys, map, lps.x, problem.prices);
    const double residual = max_weymouth_residual(sys, cand);
    const double true_obj = cand.total_cost;  // excludes the elastic penalty

    SlpIterate it;
    it.objective = true_obj;
    it.max_residual = residual;
    it.trust_frac = trust;

    const bool accept = residual <= best_residual + 1e-12;
    it.accepted = accept;
    out.trace.iterations.push_back(it);

    if (accept) {
      best_residual = residual;
      best_sol = cand;
      have_sol = true;
      // move the linearization point to the accepted iterate
      for (int t = 0; t < T; ++t)
        for (int m = 0; m < nm; ++m) {
          const double pr = cand.pressure_bar[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
          u_point[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] = pr * pr;
        }
      const bool obj_settled =
          !has_pipes ||
          (have_prev_obj &&
           std::abs(true_obj - prev_obj) <= s.tol_obj * std::max(1.0, std::abs(prev_obj)));
      if (residual <= s.tol_flow && obj_settled) {
        best_sol.diagnostics.slp_iterations = iter + 1;
        best_sol.diagnostics.max_weymouth_residual = residual;
        fill_balance_diagnostics(sys, best_sol);
        out.status = DispatchStatus::converged;
        out.solution = best_sol;
        return out;
      }
      prev_obj = true_obj;
      have_prev_obj = true;
    } else {
      trust *= 0.5;
      if (trust < 1e-10) break;
    }
  }

  out.status = DispatchStatus::not_converged;
  std::ostringstream os;
  os << "SLP did not converge within " << s.max_iter
     << " iterations; best Weymouth residual " << best_residual;
  out.diagnostics = os.str();
  if (have_sol) {
    best_sol.diagnostics.slp_iterations =
        static_cast<int>(out.trace.iterations.size());
    best_sol.diagnostics.max_weymouth_residual = best_residual;
    fill_balance_diagnostics(sys, best_sol);
    out.solution = best_sol;
  }
  return out;
}

double evaluate_cost(const CoupledSystem& sys, const DispatchSolution& sol,
                     const std::vector<double>& prices) {
  double gen_cost = 0.0, gas_cost = 0.0, revenue = 0.0;
  for (int t = 0; t < sol.horizon; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    for (std::size_t g = 0; g < sys.generators.size(); ++g)
      gen_cost += sol.gen_mw[tt][g] * sys.generators[g].cost_coeff;
    for (std::size_t k = 0; k < sys.suppliers.size(); ++k)
      gas_cost += sol.supply_ksm3h[tt][k] * sys.suppliers[k].cost_coeff;
    for (std::size_t l = 0; l < sys.tie_lines.size(); ++l)
      revenue += sol.tie_mw[tt][l] * prices[tt];
  }
  return gen_cost + gas_cost - revenue;
}

}  // namespace gecopt
