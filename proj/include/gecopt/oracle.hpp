#ifndef GECOPT_ORACLE_HPP
#define GECOPT_ORACLE_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "gecopt/igdt.hpp"
#include "gecopt/model.hpp"

namespace gecopt::oracle {

// Exhaustive grid minimizer for tiny instances. Independent of the lp and
// dispatch modules: electric feasibility is checked by a direct DC network
// solve, gas feasibility by tree flow closure plus a nested 1-D pressure
// search per pipe chain.
struct GridSpec {
  int points_per_variable = 50;  // generators, winds, exports, supplies
  int pressure_points = 100;
  std::size_t max_points = 10'000'000;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleDispatch {
  double cost = 0.0;
  // indexed [t][entity], same entity order as the CoupledSystem
  std::vector<std::vector<double>> gen_mw;
  std::vector<std::vector<double>> wind_mw;
  std::vector<std::vector<double>> tie_mw;
  std::vector<std::vector<double>> supply_ksm3h;
};

// Grid minimum of the dispatch cost. Hours are searched independently; the
// combined point is then checked against the ramp limits (instances where
// ramps bind are rejected as unsupported). Ties broken by lexicographically
// smallest grid point; the parallel path reproduces the serial result.
OracleDispatch brute_force_dispatch(const CoupledSystem& sys,
                                    const std::vector<double>& prices,
                                    const GridSpec& grid, bool parallel = false);

// Direct scan of the uncertainty horizon: calls brute_force_dispatch at each
// critical price vector and returns the boundary alpha.
double brute_force_horizon(const CoupledSystem& sys, const PriceForecast& forecast,
                           IgdtMode mode, double factor, double alpha_step,
                           const GridSpec& grid);

}  // namespace gecopt::oracle

#endif
