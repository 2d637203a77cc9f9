#ifndef GECOPT_IGDT_HPP
#define GECOPT_IGDT_HPP

#include <string>
#include <utility>
#include <vector>

#include "gecopt/dispatch.hpp"
#include "gecopt/model.hpp"

namespace gecopt {

enum class IgdtMode { robust, opportunity };

// Cost target derived from the base cost and a deviation factor:
// robust ceiling (1 + sigma) * B0, opportunity floor (1 - rho) * B0.
struct IgdtTarget {
  IgdtMode mode = IgdtMode::robust;
  double deviation_factor = 0.0;  // sigma or rho
  double base_cost = 0.0;         // B0
  double cost_target = 0.0;       // B_c or B_w
};

IgdtTarget make_target(IgdtMode mode, double factor, double base_cost);

struct BisectionStep {
  double lo = 0.0;
  double hi = 0.0;
  double probe = 0.0;
  double cost = 0.0;
  bool feasible = false;
};

struct IgdtResult {
  IgdtTarget target;
  double horizon_opt = 0.0;  // alpha-hat or beta-hat
  bool saturated = false;    // robust: even alpha = 1 meets the ceiling
  bool unreachable = false;  // opportunity: alpha_max still misses the floor
  bool infeasible_at_zero = false;
  DispatchSolution certificate;  // dispatch at the critical price vector
  std::vector<BisectionStep> trace;
  double total_export_mw = 0.0;
  double total_generation_mw = 0.0;
  double total_supply_ksm3 = 0.0;
  bool failed = false;
  std::string error;
};

struct IgdtSettings {
  double tol_alpha = 1e-4;
  double alpha_max = 2.0;  // opportunity search cap
  SlpSettings slp;
};

// B0: optimal dispatch cost at the forecasted prices (alpha = 0).
std::pair<double, DispatchSolution> base_cost(const CoupledSystem& sys,
                                              const PriceForecast& forecast,
                                              const SlpSettings& slp = {});

// Worst-case (robust, (1-alpha)) or best-case (opportunity, (1+alpha))
// price vector on the envelope boundary. Robust mode requires alpha <= 1.
std::vector<double> critical_prices(const PriceForecast& forecast, double alpha,
                                    IgdtMode mode);

IgdtResult solve_robustness(const CoupledSystem& sys, const PriceForecast& forecast,
                            double sigma, const IgdtSettings& settings = {});

IgdtResult solve_opportunity(const CoupledSystem& sys, const PriceForecast& forecast,
                             double rho, const IgdtSettings& settings = {});

// One result per factor; per-factor failures are recorded in the result and
// the sweep continues. jobs > 0 caps the worker count (0 = library default).
std::vector<IgdtResult> sweep(const CoupledSystem& sys, const PriceForecast& forecast,
                              IgdtMode mode, const std::vector<double>& factors,
                              const IgdtSettings& settings = {}, int jobs = 0);

}  // namespace gecopt

#endif
