#ifndef GECOPT_DISPATCH_HPP
#define GECOPT_DISPATCH_HPP

#include <string>
#include <vector>

#include "gecopt/lp.hpp"
#include "gecopt/model.hpp"

namespace gecopt {

struct SlpSettings {
  int max_iter = 50;
  double trust_region_frac = 0.25;  // initial trust radius, fraction of each u range
  double tol_flow = 1e-4;           // kSm3/h, max Weymouth residual
  double tol_obj = 1e-7;            // relative objective change
};

// Inner least-cost coordinated dispatch at a fixed hourly price vector.
struct DispatchProblem {
  const CoupledSystem* system = nullptr;
  std::vector<double> prices;  // currency/MWh, length = horizon
  SlpSettings settings;
};

struct SlpIterate {
  double objective = 0.0;
  double max_residual = 0.0;  // true Weymouth residual of the LP iterate
  double trust_frac = 0.0;
  bool accepted = false;
};

struct SlpTrace {
  std::vector<SlpIterate> iterations;
};

enum class DispatchStatus { converged, infeasible, not_converged };

struct DispatchOutcome {
  DispatchStatus status = DispatchStatus::infeasible;
  DispatchSolution solution;  // converged result, or best iterate when not_converged
  SlpTrace trace;
  std::string diagnostics;
};

// Variable layout of the hourly dispatch LP (indices into LpProblem columns).
struct DispatchVarMap {
  int horizon = 0;
  int per_hour = 0;
  int gen0 = 0, wind0 = 0, angle0 = 0, zone_angle0 = 0, branch0 = 0, tie0 = 0,
      supply0 = 0, flow0 = 0, u0 = 0, pen0 = 0;
  std::vector<std::string> zones;  // distinct external zones, file order

  int gen(int t, int g) const { return t * per_hour + gen0 + g; }
  int wind(int t, int w) const { return t * per_hour + wind0 + w; }
  int angle(int t, int i) const { return t * per_hour + angle0 + i; }
  int zone_angle(int t, int z) const { return t * per_hour + zone_angle0 + z; }
  int branch(int t, int l) const { return t * per_hour + branch0 + l; }
  int tie(int t, int l) const { return t * per_hour + tie0 + l; }
  int supply(int t, int k) const { return t * per_hour + supply0 + k; }
  int flow(int t, int p) const { return t * per_hour + flow0 + p; }
  int usq(int t, int m) const { return t * per_hour + u0 + m; }
  // elastic Weymouth mismatch of pipeline p (positive / negative part)
  int pen(int t, int p, bool positive) const {
    return t * per_hour + pen0 + 2 * p + (positive ? 0 : 1);
  }
};

// Assemble the hourly dispatch LP about a squared-pressure linearization
// point u_point[t][node], with a trust-region box of the given fraction of
// each u range. row_labels (optional) receives one label per row for
// infeasibility reporting.
lp::LpProblem build_lp(const CoupledSystem& sys, const std::vector<double>& prices,
                       const std::vector<std::vector<double>>& u_point,
                       double trust_frac, DispatchVarMap* map_out = nullptr,
                       std::vector<std::string>* row_labels = nullptr);

DispatchOutcome solve_dispatch(const DispatchProblem& problem);

// Cost decomposition of a solution at given prices (exact arithmetic of the
// objective: generation + gas purchase - export revenue).
double evaluate_cost(const CoupledSystem& sys, const DispatchSolution& sol,
                     const std::vector<double>& prices);

}  // namespace gecopt

#endif
