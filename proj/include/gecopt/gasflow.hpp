#ifndef GECOPT_GASFLOW_HPP
#define GECOPT_GASFLOW_HPP

#include <map>
#include <string>

#include "gecopt/model.hpp"

namespace gecopt::gasflow {

// smoothing band half-width for the sqrt derivative, in squared-pressure units
constexpr double kSmoothEps = 1e-3;

// Signed steady-state pipeline flow: sgn(pi_m, pi_n) * C * sqrt(|pi_m^2 - pi_n^2|).
// Positive means flow m -> n.
double weymouth_flow(double pi_m, double pi_n, double weymouth_const);

// Pressures per gas node at one hour.
struct PressureState {
  std::map<std::string, double> pressure_bar;
};

// Passive pipe: f - weymouth_flow (zero at physical consistency).
// Compressor pipe: min(0, f - weymouth_flow) (zero when the one-sided
// boosting inequality holds).
double pipeline_residual(const Pipeline& pipe, const PressureState& state,
                         double flow);

struct AffineFlow {
  double constant;  // a
  double coeff_m;   // b_m
  double coeff_n;   // b_n

  double evaluate(double u_m, double u_n) const {
    return constant + coeff_m * u_m + coeff_n * u_n;
  }
};

// First-order expansion of the flow in squared-pressure variables u = pi^2
// about (u_m0, u_n0). Outside the smoothing band the coefficients are the
// exact gradient; inside, the secant slope C / sqrt(eps) keeps them finite
// and continuous.
AffineFlow linearize_weymouth(double weymouth_const, double u_m0, double u_n0);

// flow as a function of du = u_m - u_n
double weymouth_flow_u(double du, double weymouth_const);

}  // namespace gecopt::gasflow

#endif
