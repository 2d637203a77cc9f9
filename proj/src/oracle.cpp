#include "gecopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gecopt::oracle {

namespace {

constexpr double kTol = 1e-7;

struct Grid1d {
  int entity = 0;  // index into the owning entity vector
  std::vector<double> values;
};

std::vector<double> linspace(double lo, double up, int n) {
  if (up <= lo) return {lo};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = lo + (up - lo) * i / (n - 1);
  return v;
}

// gas network as a rooted tree
struct GasTree {
  bool present = false;
  std::vector<int> parent;      // node -> parent node (-1 at root)
  std::vector<int> parent_arc;  // node -> pipe index toward parent
  std::vector<int> bfs_order;
  std::vector<std::vector<int>> children;
};

GasTree build_tree(const CoupledSystem& sys) {
  GasTree tr;
  const int nm = static_cast<int>(sys.gas_nodes.size());
  if (nm == 0) return tr;
  const int np = static_cast<int>(sys.pipelines.size());
  if (np != nm - 1)
    throw OracleError("oracle supports tree-shaped gas networks only");
  tr.present = true;
  tr.parent.assign(static_cast<std::size_t>(nm), -1);
  tr.parent_arc.assign(static_cast<std::size_t>(nm), -1);
  tr.children.resize(static_cast<std::size_t>(nm));
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(nm));
  for (int p = 0; p < np; ++p) {
    const int a = sys.gas_node_index(sys.pipelines[static_cast<std::size_t>(p)].from_node);
    const int b = sys.gas_node_index(sys.pipelines[static_cast<std::size_t>(p)].to_node);
    adj[static_cast<std::size_t>(a)].push_back({b, p});
    adj[static_cast<std::size_t>(b)].push_back({a, p});
  }
  std::vector<bool> seen(static_cast<std::size_t>(nm), false);
  tr.bfs_order.push_back(0);
  seen[0] = true;
  for (std::size_t q = 0; q < tr.bfs_order.size(); ++q) {
    const int n = tr.bfs_order[q];
    for (auto [nb, arc] : adj[static_cast<std::size_t>(n)]) {
      if (seen[static_cast<std::size_t>(nb)]) continue;
      seen[static_cast<std::size_t>(nb)] = true;
      tr.parent[static_cast<std::size_t>(nb)] = n;
      tr.parent_arc[static_cast<std::size_t>(nb)] = arc;
      tr.children[static_cast<std::size_t>(n)].push_back(nb);
      tr.bfs_order.push_back(nb);
    }
  }
  if (static_cast<int>(tr.bfs_order.size()) != nm)
    throw OracleError("oracle requires a connected gas network");
  return tr;
}

// required squared-pressure drop along the pipe for flow f: u_from - u_to
double required_drop(double f, double weymouth_const) {
  const double q = f / weymouth_const;
  return (f >= 0.0 ? 1.0 : -1.0) * q * q;
}

class HourSolver {
 public:
  HourSolver(const CoupledSystem& sys, const GasTree& tree, const GridSpec& grid,
             int t, double price)
      : sys_(sys), tree_(tree), grid_(grid), t_(t), price_(price) {
    const int ng = static_cast<int>(sys.generators.size());
    const int nw = static_cast<int>(sys.wind_units.size());
    const int nt = static_cast<int>(sys.tie_lines.size());
    const int nk = static_cast<int>(sys.suppliers.size());

    // closure choices: one electric variable and one supplier are solved
    // from the balance equations instead of being enumerated
    if (nt > 0) {
      closure_tie_ = nt - 1;
    } else {
      for (int g = ng - 1; g >= 0; --g)
        if (!sys.generators[static_cast<std::size_t>(g)].is_gas_fired()) {
          closure_gen_ = g;
          break;
        }
      if (closure_gen_ < 0 && ng > 0) closure_gen_ = ng - 1;  // gas-fired closure
      if (closure_gen_ < 0 && nw > 0) closure_wind_ = nw - 1;
    }
    closure_supplier_ = nk > 0 ? nk - 1 : -1;
    closure_in_gas_ = closure_gen_ >= 0 &&
                      sys.generators[static_cast<std::size_t>(closure_gen_)].is_gas_fired();

    // grids; t = 0 generator ranges tightened by the initial-output ramps
    auto gen_grid = [&](int g) {
      const Generator& gen = sys.generators[static_cast<std::size_t>(g)];
      double lo = gen.p_min, up = gen.p_max;
      if (t == 0 && gen.initial_output) {
        lo = std::max(lo, *gen.initial_output - gen.ramp_down);
        up = std::min(up, *gen.initial_output + gen.ramp_up);
      }
      return linspace(lo, up, grid.points_per_variable);
    };
    for (int g = 0; g < ng; ++g) {
      if (g == closure_gen_) continue;
      const bool gasfired = sys.generators[static_cast<std::size_t>(g)].is_gas_fired();
      if (gasfired && !closure_in_gas_) {
        outer_.push_back({g, gen_grid(g)});
        outer_is_supplier_.push_back(false);
      } else {
        inner_.push_back({g, gen_grid(g)});
        inner_kind_.push_back(Kind::gen);
      }
    }
    for (int w = 0; w < nw; ++w) {
      if (w == closure_wind_) continue;
      const WindUnit& wu = sys.wind_units[static_cast<std::size_t>(w)];
      inner_.push_back({w, linspace(wu.p_min,
                                    wu.p_max_profile[static_cast<std::size_t>(t)],
                                    grid.points_per_variable)});
      inner_kind_.push_back(Kind::wind);
    }
    for (int l = 0; l < nt; ++l) {
      if (l == closure_tie_) continue;
      const TieLine& tl = sys.tie_lines[static_cast<std::size_t>(l)];
      inner_.push_back({l, linspace(0.0, tl.export_limit, grid.points_per_variable)});
      inner_kind_.push_back(Kind::tie);
    }
    for (int k = 0; k < nk; ++k) {
      if (k == closure_supplier_) continue;
      const GasSupplier& sp = sys.suppliers[static_cast<std::size_t>(k)];
      outer_.push_back({k, linspace(sp.s_min, sp.s_max, grid.points_per_variable)});
      outer_is_supplier_.push_back(true);
    }

    n_outer_ = 1;
    for (auto& o : outer_) n_outer_ *= o.values.size();
    n_inner_ = 1;
    for (auto& iv : inner_) n_inner_ *= iv.values.size();
    if (n_outer_ * n_inner_ > grid.max_points)
      throw OracleError("grid too large (" + std::to_string(n_outer_ * n_inner_) +
                        " points exceed cap)");

    // reduced DC susceptance factorization (direct physics check)
    const int nb = static_cast<int>(sys.buses.size());
    ref_ = sys.reference_bus();
    if (nb > 1) {
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nb - 1, nb - 1);
      auto red = [&](int i) { return i < ref_ ? i : i - 1; };
      for (const auto& br : sys.branches) {
        const int a = sys.bus_index(br.from_bus);
        const int b = sys.bus_index(br.to_bus);
        const double y = 1.0 / br.reactance;
        if (a != ref_) B(red(a), red(a)) += y;
        if (b != ref_) B(red(b), red(b)) += y;
        if (a != ref_ && b != ref_) {
          B(red(a), red(b)) -= y;
          B(red(b), red(a)) -= y;
        }
      }
      lu_.compute(B);
      if (!lu_.isInvertible())
        throw OracleError("oracle requires a connected electric network");
    }
  }

  std::size_t combos() const { return n_outer_ * n_inner_; }

  struct Best {
    double cost = std::numeric_limits<double>::infinity();
    std::size_t flat = 0;
    bool found = false;
    std::vector<double> gen, wind, tie, supply;
  };

  Best solve(bool parallel) const {
    Best best;
#ifdef _OPENMP
    if (parallel) {
#pragma omp parallel
      {
        Best local;
        Workspace ws(sys_);
#pragma omp for schedule(static) nowait
        for (long o = 0; o < static_cast<long>(n_outer_); ++o)
          scan_outer(static_cast<std::size_t>(o), ws, local);
#pragma omp critical
        {
          if (local.found &&
              (!best.found || local.cost < best.cost ||
               (local.cost == best.cost && local.flat < best.flat)))
            best = local;
        }
      }
      return best;
    }
#else
    (void)parallel;
#endif
    Workspace ws(sys_);
    for (std::size_t o = 0; o < n_outer_; ++o) scan_outer(o, ws, best);
    return best;
  }

 private:
  enum class Kind { gen, wind, tie };

  struct Workspace {
    std::vector<double> gen, wind, tie, supply, inj_bus, node_inj, arc_flow;
    explicit Workspace(const CoupledSystem& s)
        : gen(s.generators.size(), 0.0),
          wind(s.wind_units.size(), 0.0),
          tie(s.tie_lines.size(), 0.0),
          supply(s.suppliers.size(), 0.0),
          inj_bus(s.buses.size(), 0.0),
          node_inj(s.gas_nodes.size(), 0.0),
          arc_flow(s.pipelines.size(), 0.0) {}
  };

  void scan_outer(std::size_t o, Workspace& ws, Best& best) const {
    // decode outer (gas) point
    std::size_t rem = o;
    for (std::size_t v = 0; v < outer_.size(); ++v) {
      const auto& g = outer_[v];
      const std::size_t idx = rem % g.values.size();
      rem /= g.values.size();
      if (outer_is_supplier_[v])
        ws.supply[static_cast<std::size_t>(g.entity)] = g.values[idx];
      else
        ws.gen[static_cast<std::size_t>(g.entity)] = g.values[idx];
    }

    double gas_cost = 0.0;
    bool gas_ok = true;
    if (!closure_in_gas_) {
      gas_ok = check_gas(ws, &gas_cost);
      if (!gas_ok) return;
    }

    for (std::size_t i = 0; i < n_inner_; ++i) {
      std::size_t r = i;
      for (std::size_t v = 0; v < inner_.size(); ++v) {
        const auto& g = inner_[v];
        const std::size_t idx = r % g.values.size();
        r /= g.values.size();
        const double val = g.values[idx];
        switch (inner_kind_[v]) {
          case Kind::gen: ws.gen[static_cast<std::size_t>(g.entity)] = val; break;
          case Kind::wind: ws.wind[static_cast<std::size_t>(g.entity)] = val; break;
          case Kind::tie: ws.tie[static_cast<std::size_t>(g.entity)] = val; break;
        }
      }
      if (!evaluate(ws)) continue;
      double cost = closure_in_gas_ ? 0.0 : gas_cost;
      if (closure_in_gas_ && !check_gas(ws, &cost)) continue;
      for (std::size_t g = 0; g < ws.gen.size(); ++g)
        cost += ws.gen[g] * sys_.generators[g].cost_coeff;
      for (std::size_t l = 0; l < ws.tie.size(); ++l) cost -= ws.tie[l] * price_;
      const std::size_t flat = o * n_inner_ + i;
      if (!best.found || cost < best.cost ||
          (cost == best.cost && flat < best.flat)) {
        best.found = true;
        best.cost = cost;
        best.flat = flat;
        best.gen = ws.gen;
        best.wind = ws.wind;
        best.tie = ws.tie;
        best.supply = ws.supply;
      }
    }
  }

  // closure + electric network feasibility; fills the closure entries of ws
  bool evaluate(Workspace& ws) const {
    double balance = 0.0;
    for (double v : ws.gen) balance += v;
    for (double v : ws.wind) balance += v;
    for (const auto& [bus, prof] : sys_.loads.electric)
      balance -= prof[static_cast<std::size_t>(t_)];
    for (std::size_t l = 0; l < ws.tie.size(); ++l)
      if (static_cast<int>(l) != closure_tie_) balance -= ws.tie[l];

    if (closure_tie_ >= 0) {
      const auto l = static_cast<std::size_t>(closure_tie_);
      const double lim = sys_.tie_lines[l].export_limit;
      if (balance < -kTol || balance > lim + kTol) return false;
      ws.tie[l] = std::clamp(balance, 0.0, lim);
    } else if (closure_gen_ >= 0) {
      const auto g = static_cast<std::size_t>(closure_gen_);
      const double need = -(balance - ws.gen[g]);
      const Generator& gen = sys_.generators[g];
      double lo = gen.p_min, up = gen.p_max;
      if (t_ == 0 && gen.initial_output) {
        lo = std::max(lo, *gen.initial_output - gen.ramp_down);
        up = std::min(up, *gen.initial_output + gen.ramp_up);
      }
      if (need < lo - kTol || need > up + kTol) return false;
      ws.gen[g] = std::clamp(need, lo, up);
    } else if (closure_wind_ >= 0) {
      const auto w = static_cast<std::size_t>(closure_wind_);
      const double need = -(balance - ws.wind[w]);
      const WindUnit& wu = sys_.wind_units[w];
      const double up = wu.p_max_profile[static_cast<std::size_t>(t_)];
      if (need < wu.p_min - kTol || need > up + kTol) return false;
      ws.wind[w] = std::clamp(need, wu.p_min, up);
    } else if (std::abs(balance) > kTol) {
      return false;
    }

    // DC network: angles from injections, branch limits
    const int nb = static_cast<int>(sys_.buses.size());
    if (nb > 1 && !sys_.branches.empty()) {
      std::fill(ws.inj_bus.begin(), ws.inj_bus.end(), 0.0);
      for (std::size_t g = 0; g < ws.gen.size(); ++g)
        ws.inj_bus[static_cast<std::size_t>(sys_.bus_index(sys_.generators[g].bus))] += ws.gen[g];
      for (std::size_t w = 0; w < ws.wind.size(); ++w)
        ws.inj_bus[static_cast<std::size_t>(sys_.bus_index(sys_.wind_units[w].bus))] += ws.wind[w];
      for (std::size_t l = 0; l < ws.tie.size(); ++l)
        ws.inj_bus[static_cast<std::size_t>(sys_.bus_index(sys_.tie_lines[l].from_bus))] -= ws.tie[l];
      for (const auto& [bus, prof] : sys_.loads.electric)
        ws.inj_bus[static_cast<std::size_t>(sys_.bus_index(bus))] -=
            prof[static_cast<std::size_t>(t_)];

      Eigen::VectorXd p(nb - 1);
      int r = 0;
      for (int i = 0; i < nb; ++i)
        if (i != ref_) p(r++) = ws.inj_bus[static_cast<std::size_t>(i)] / sys_.base_mva;
      Eigen::VectorXd th = lu_.solve(p);
      auto angle = [&](int i) {
        if (i == ref_) return 0.0;
        return th(i < ref_ ? i : i - 1);
      };
      for (const auto& br : sys_.branches) {
        const double flow = sys_.base_mva *
                            (angle(sys_.bus_index(br.from_bus)) -
                             angle(sys_.bus_index(br.to_bus))) /
                            br.reactance;
        if (std::abs(flow) > br.flow_limit + 1e-6) return false;
      }
    }
    return true;
  }

  // supplier closure, tree flows, nested 1-D pressure search
  bool check_gas(Workspace& ws, double* gas_cost) const {
    const int nm = static_cast<int>(sys_.gas_nodes.size());
    double demand = 0.0;
    for (const auto& [node, prof] : sys_.loads.gas)
      demand += prof[static_cast<std::size_t>(t_)];
    for (std::size_t g = 0; g < ws.gen.size(); ++g) {
      const auto& gen = sys_.generators[g];
      if (gen.gas_link) demand += gen.gas_link->conversion * ws.gen[g];
    }
    double others = 0.0;
    for (std::size_t k = 0; k < ws.supply.size(); ++k)
      if (static_cast<int>(k) != closure_supplier_) others += ws.supply[k];
    if (closure_supplier_ >= 0) {
      const auto k = static_cast<std::size_t>(closure_supplier_);
      const GasSupplier& sp = sys_.suppliers[k];
      const double need = demand - others;
      if (need < sp.s_min - kTol || need > sp.s_max + kTol) return false;
      ws.supply[k] = std::clamp(need, sp.s_min, sp.s_max);
    } else if (std::abs(demand - others) > kTol) {
      return false;
    }
    *gas_cost = 0.0;
    for (std::size_t k = 0; k < ws.supply.size(); ++k)
      *gas_cost += ws.supply[k] * sys_.suppliers[k].cost_coeff;
    if (nm == 0) return true;

    // node injections and tree-closure arc flows
    std::fill(ws.node_inj.begin(), ws.node_inj.end(), 0.0);
    for (std::size_t k = 0; k < ws.supply.size(); ++k)
      ws.node_inj[static_cast<std::size_t>(sys_.gas_node_index(sys_.suppliers[k].node))] +=
          ws.supply[k];
    for (const auto& [node, prof] : sys_.loads.gas)
      ws.node_inj[static_cast<std::size_t>(sys_.gas_node_index(node))] -=
          prof[static_cast<std::size_t>(t_)];
    for (std::size_t g = 0; g < ws.gen.size(); ++g) {
      const auto& gen = sys_.generators[g];
      if (gen.gas_link)
        ws.node_inj[static_cast<std::size_t>(sys_.gas_node_index(gen.gas_link->node))] -=
            gen.gas_link->conversion * ws.gen[g];
    }
    std::vector<double> sub(ws.node_inj);
    std::fill(ws.arc_flow.begin(), ws.arc_flow.end(), 0.0);
    for (auto it = tree_.bfs_order.rbegin(); it != tree_.bfs_order.rend(); ++it) {
      const int n = *it;
      const int par = tree_.parent[static_cast<std::size_t>(n)];
      if (par < 0) continue;
      const int arc = tree_.parent_arc[static_cast<std::size_t>(n)];
      const Pipeline& pipe = sys_.pipelines[static_cast<std::size_t>(arc)];
      // subtree surplus leaves through the arc toward the parent
      const double toward_parent = sub[static_cast<std::size_t>(n)];
      ws.arc_flow[static_cast<std::size_t>(arc)] =
          sys_.gas_node_index(pipe.from_node) == n ? toward_parent : -toward_parent;
      sub[static_cast<std::size_t>(par)] += toward_parent;
    }

    // root pressure scan with nested search at compressor arcs
    const GasNode& root = sys_.gas_nodes[0];
    const double lo = root.pressure_min * root.pressure_min;
    const double up = root.pressure_max * root.pressure_max;
    for (double u : linspace(lo, up, grid_.pressure_points))
      if (assign_pressures(0, u, ws.arc_flow)) return true;
    return false;
  }

  bool assign_pressures(int node, double u, const std::vector<double>& flow) const {
    for (int c : tree_.children[static_cast<std::size_t>(node)]) {
      const int arc = tree_.parent_arc[static_cast<std::size_t>(c)];
      const Pipeline& pipe = sys_.pipelines[static_cast<std::size_t>(arc)];
      const bool parent_is_from = sys_.gas_node_index(pipe.from_node) == node;
      const double f = flow[static_cast<std::size_t>(arc)];
      const double drop = required_drop(f, pipe.weymouth_const);
      const GasNode& cn = sys_.gas_nodes[static_cast<std::size_t>(c)];
      const double clo = cn.pressure_min * cn.pressure_min;
      const double cup = cn.pressure_max * cn.pressure_max;
      if (!pipe.has_compressor) {
        const double uc = parent_is_from ? u - drop : u + drop;
        if (uc < clo - 1e-9 || uc > cup + 1e-9) return false;
        if (!assign_pressures(c, std::clamp(uc, clo, cup), flow)) return false;
      } else {
        // one-sided: the compressor may boost beyond the passive drop
        double rlo = clo, rup = cup;
        if (parent_is_from)
          rlo = std::max(rlo, u - drop);
        else
          rup = std::min(rup, u + drop);
        if (rlo > rup + 1e-9) return false;
        if (tree_.children[static_cast<std::size_t>(c)].empty()) continue;
        bool ok = false;
        for (double uc : linspace(rlo, std::max(rlo, rup), grid_.pressure_points))
          if (assign_pressures(c, uc, flow)) {
            ok = true;
            break;
          }
        if (!ok) return false;
      }
    }
    return true;
  }

  const CoupledSystem& sys_;
  const GasTree& tree_;
  const GridSpec& grid_;
  int t_;
  double price_;
  int closure_tie_ = -1;
  int closure_gen_ = -1;
  int closure_wind_ = -1;
  int closure_supplier_ = -1;
  bool closure_in_gas_ = false;
  std::vector<Grid1d> outer_, inner_;
  std::vector<bool> outer_is_supplier_;
  std::vector<Kind> inner_kind_;
  std::size_t n_outer_ = 1, n_inner_ = 1;
  int ref_ = 0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace

OracleDispatch brute_force_dispatch(const CoupledSystem& sys,
                                    const std::vector<double>& prices,
                                    const GridSpec& grid, bool parallel) {
  if (sys.horizon > 4)
    throw OracleError("oracle limited to horizons of at most 4 hours");
  const GasTree tree = build_tree(sys);
  OracleDispatch result;
  for (int t = 0; t < sys.horizon; ++t) {
    HourSolver solver(sys, tree, grid, t, prices[static_cast<std::size_t>(t)]);
    auto best = solver.solve(parallel);
    if (!best.found)
      throw OracleError("no feasible grid point in hour " + std::to_string(t + 1));
    result.cost += best.cost;
    result.gen_mw.push_back(best.gen);
    result.wind_mw.push_back(best.wind);
    result.tie_mw.push_back(best.tie);
    result.supply_ksm3h.push_back(best.supply);
  }
  // hours were searched independently; reject if ramps actually bind
  for (int t = 1; t < sys.horizon; ++t)
    for (std::size_t g = 0; g < sys.generators.size(); ++g) {
      const double d = result.gen_mw[static_cast<std::size_t>(t)][g] -
                       result.gen_mw[static_cast<std::size_t>(t - 1)][g];
      if (d > sys.generators[g].ramp_up + 1e-9 ||
          -d > sys.generators[g].ramp_down + 1e-9)
        throw OracleError("ramp limits bind; hour-separable oracle unsupported");
    }
  return result;
}

double brute_force_horizon(const CoupledSystem& sys, const PriceForecast& forecast,
                           IgdtMode mode, double factor, double alpha_step,
                           const GridSpec& grid) {
  const double b0 = brute_force_dispatch(sys, forecast.lambda_tilde, grid).cost;
  auto cost_at = [&](double alpha) {
    return brute_force_dispatch(sys, critical_prices(forecast, alpha, mode), grid)
        .cost;
  };
  if (mode == IgdtMode::robust) {
    const double bc = (1.0 + factor) * b0;
    const double tol = 1e-9 * std::max(1.0, std::abs(bc));
    double last_ok = 0.0;
    for (double a = alpha_step; a <= 1.0 + 1e-12; a += alpha_step) {
      if (cost_at(std::min(a, 1.0)) <= bc + tol)
        last_ok = std::min(a, 1.0);
      else
        break;
    }
    return last_ok;
  }
  const double bw = (1.0 - factor) * b0;
  const double tol = 1e-9 * std::max(1.0, std::abs(bw));
  for (double a = 0.0; a <= 2.0 + 1e-12; a += alpha_step)
    if (cost_at(a) <= bw + tol) return a;
  throw OracleError("opportunity target unreachable within alpha <= 2");
}

}  // namespace gecopt::oracle
