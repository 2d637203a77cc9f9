#include "gecopt/igdt.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gecopt {

namespace {

double cost_tolerance(double target) {
  return 1e-9 * std::max(1.0, std::abs(target));
}

struct Probe {
  double cost = 0.0;
  DispatchSolution solution;
};

Probe solve_at(const CoupledSystem& sys, const PriceForecast& forecast,
               double alpha, IgdtMode mode, const SlpSettings& slp) {
  DispatchProblem dp;
  dp.system = &sys;
  dp.prices = critical_prices(forecast, alpha, mode);
  dp.settings = slp;
  DispatchOutcome out = solve_dispatch(dp);
  if (out.status != DispatchStatus::converged)
    throw std::runtime_error("inner dispatch failed at alpha=" +
                             std::to_string(alpha) + ": " + out.diagnostics);
  return {out.solution.total_cost, out.solution};
}

void attach_aggregates(IgdtResult& r) {
  r.total_export_mw = r.certificate.total_export_mw();
  r.total_generation_mw = r.certificate.total_generation_mw();
  r.total_supply_ksm3 = r.certificate.total_supply_ksm3();
}

}  // namespace

IgdtTarget make_target(IgdtMode mode, double factor, double base) {
  if (factor < 0) throw std::domain_error("deviation factor must be >= 0");
  if (mode == IgdtMode::opportunity && factor >= 1.0)
    throw std::domain_error("opportunity deviation factor must be < 1");
  IgdtTarget t;
  t.mode = mode;
  t.deviation_factor = factor;
  t.base_cost = base;
  t.cost_target = mode == IgdtMode::robust ? (1.0 + factor) * base
                                           : (1.0 - factor) * base;
  return t;
}

std::pair<double, DispatchSolution> base_cost(const CoupledSystem& sys,
                                              const PriceForecast& forecast,
                                              const SlpSettings& slp) {
  Probe p = solve_at(sys, forecast, 0.0, IgdtMode::robust, slp);
  return {p.cost, p.solution};
}

std::vector<double> critical_prices(const PriceForecast& forecast, double alpha,
                                    IgdtMode mode) {
  if (alpha < 0) throw std::domain_error("alpha must be >= 0");
  if (mode == IgdtMode::robust && alpha > 1.0)
    throw std::domain_error("robust alpha > 1 would give negative prices");
  const double scale =
      mode == IgdtMode::robust ? (1.0 - alpha) : (1.0 + alpha);
  std::vector<double> prices(forecast.lambda_tilde.size());
  for (std::size_t t = 0; t < prices.size(); ++t)
    prices[t] = scale * forecast.lambda_tilde[t];
  return prices;
}

IgdtResult solve_robustness(const CoupledSystem& sys, const PriceForecast& forecast,
                            double sigma, const IgdtSettings& settings) {
  IgdtResult r;
  auto [b0, base_sol] = base_cost(sys, forecast, settings.slp);
  r.target = make_target(IgdtMode::robust, sigma, b0);
  const double bc = r.target.cost_target;
  const double tol_cost = cost_tolerance(bc);

  auto probe = [&](double alpha) {
    return solve_at(sys, forecast, alpha, IgdtMode::robust, settings.slp);
  };

  if (b0 > bc + tol_cost) {
    // possible only via numerical noise or B0 < 0
    r.horizon_opt = 0.0;
    r.infeasible_at_zero = true;
    r.certificate = base_sol;
    attach_aggregates(r);
    return r;
  }

  Probe at_one = probe(1.0);
  if (at_one.cost <= bc + tol_cost) {
    r.horizon_opt = 1.0;
    r.saturated = true;
    r.certificate = at_one.solution;
    attach_aggregates(r);
    return r;
  }

  double lo = 0.0, hi = 1.0;
  DispatchSolution best = base_sol;
  while (hi - lo > 0.5 * settings.tol_alpha) {
    const double mid = 0.5 * (lo + hi);
    Probe p = probe(mid);
    const bool feasible = p.cost <= bc + tol_cost;
    r.trace.push_back({lo, hi, mid, p.cost, feasible});
    if (feasible) {
      lo = mid;
      best = p.solution;
    } else {
      hi = mid;
    }
  }
  r.horizon_opt = lo;
  r.certificate = best;
  attach_aggregates(r);
  return r;
}

IgdtResult solve_opportunity(const CoupledSystem& sys, const PriceForecast& forecast,
                             double rho, const IgdtSettings& settings) {
  IgdtResult r;
  auto [b0, base_sol] = base_cost(sys, forecast, settings.slp);
  r.target = make_target(IgdtMode::opportunity, rho, b0);
  const double bw = r.target.cost_target;
  const double tol_cost = cost_tolerance(bw);

  auto probe = [&](double alpha) {
    return solve_at(sys, forecast, alpha, IgdtMode::opportunity, settings.slp);
  };

  if (b0 <= bw + tol_cost) {
    r.horizon_opt = 0.0;
    r.certificate = base_sol;
    attach_aggregates(r);
    return r;
  }

  Probe at_max = probe(settings.alpha_max);
  if (at_max.cost > bw + tol_cost) {
    r.horizon_opt = settings.alpha_max;
    r.unreachable = true;
    r.certificate = at_max.solution;
    attach_aggregates(r);
    return r;
  }

  double lo = 0.0, hi = settings.alpha_max;
  DispatchSolution best = at_max.solution;
  while (hi - lo > 0.5 * settings.tol_alpha) {
    const double mid = 0.5 * (lo + hi);
    Probe p = probe(mid);
    const bool feasible = p.cost <= bw + tol_cost;
    r.trace.push_back({lo, hi, mid, p.cost, feasible});
    if (feasible) {
      hi = mid;
      best = p.solution;
    } else {
      lo = mid;
    }
  }
  r.horizon_opt = hi;
  r.certificate = best;
  attach_aggregates(r);
  return r;
}

std::vector<IgdtResult> sweep(const CoupledSystem& sys, const PriceForecast& forecast,
                              IgdtMode mode, const std::vector<double>& factors,
                              const IgdtSettings& settings, int jobs) {
  std::vector<IgdtResult> results(factors.size());
#ifdef _OPENMP
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (long i = 0; i < static_cast<long>(factors.size()); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      results[idx] = mode == IgdtMode::robust
                         ? solve_robustness(sys, forecast, factors[idx], settings)
                         : solve_opportunity(sys, forecast, factors[idx], settings);
    } catch (const std::exception& e) {
      results[idx].failed = true;
      results[idx].error = e.what();
      results[idx].target.mode = mode;
      results[idx].target.deviation_factor = factors[idx];
    }
  }
  return results;
}

}  // namespace gecopt
