#include "gecopt/gasflow.hpp"

#include <algorithm>
#include <cmath>

namespace gecopt::gasflow {

double weymouth_flow_u(double du, double weymouth_const) {
  const double s = du >= 0.0 ? 1.0 : -1.0;
  return s * weymouth_const * std::sqrt(std::abs(du));
}

double weymouth_flow(double pi_m, double pi_n, double weymouth_const) {
  return weymouth_flow_u(pi_m * pi_m - pi_n * pi_n, weymouth_const);
}

double pipeline_residual(const Pipeline& pipe, const PressureState& state,
                         double flow) {
  const double pm = state.pressure_bar.at(pipe.from_node);
  const double pn = state.pressure_bar.at(pipe.to_node);
  const double r = flow - weymouth_flow(pm, pn, pipe.weymouth_const);
  if (pipe.has_compressor) return std::min(0.0, r);
  return r;
}

AffineFlow linearize_weymouth(double weymouth_const, double u_m0, double u_n0) {
  const double du = u_m0 - u_n0;
  AffineFlow lin{};
  if (std::abs(du) < kSmoothEps) {
    const double slope = weymouth_const / std::sqrt(kSmoothEps);
    lin.coeff_m = slope;
    lin.coeff_n = -slope;
    lin.constant = 0.0;  // the secant passes through du = 0
    return lin;
  }
  const double f0 = weymouth_flow_u(du, weymouth_const);
  const double slope = weymouth_const / (2.0 * std::sqrt(std::abs(du)));
  lin.coeff_m = slope;
  lin.coeff_n = -slope;
  lin.constant = f0 - slope * du;
  return lin;
}

}  // namespace gecopt::gasflow
