#ifndef GECOPT_REPORT_HPP
#define GECOPT_REPORT_HPP

#include <string>
#include <vector>

#include "gecopt/dispatch.hpp"
#include "gecopt/igdt.hpp"
#include "gecopt/model.hpp"

namespace gecopt::report {

enum class Format { csv, json };

// Serializers are pure and deterministic: identical inputs give identical bytes.

std::string export_results(const CoupledSystem& sys, const DispatchSolution& sol,
                           Format format);
std::string export_results(const IgdtResult& result, Format format);

// sigma,alpha_hat,B_c  /  rho,beta_hat,B_w
std::string sweep_csv(IgdtMode mode, const std::vector<IgdtResult>& results);

// factor,P_iz_MW,P_g_MW,S_k_1e6Sm3
std::string sweep_aggregates_csv(const std::vector<IgdtResult>& results);

// horizon-versus-factor polyline, minimal in-repo SVG
std::string sweep_curve_svg(IgdtMode mode, const std::vector<IgdtResult>& results);

std::string slp_trace_csv(const SlpTrace& trace);

std::string format_factor(double v);

}  // namespace gecopt::report

#endif
