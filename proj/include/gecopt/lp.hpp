#ifndef GECOPT_LP_HPP
#define GECOPT_LP_HPP

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gecopt::lp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { le, eq, ge };

struct Triplet {
  int row;
  int col;
  double value;
};

// Bounded-variable LP in triplet form, minimization.
struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<Triplet> entries;
  std::vector<RowSense> senses;
  std::vector<double> rhs;
  std::vector<double> lower;  // -inf allowed
  std::vector<double> upper;  // +inf allowed

  int num_rows() const { return static_cast<int>(rhs.size()); }

  int add_var(double cost, double lo, double up) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(up);
    return num_vars++;
  }
  int add_row(RowSense sense, double b) {
    senses.push_back(sense);
    rhs.push_back(b);
    return num_rows() - 1;
  }
  void set_coeff(int row, int col, double v) {
    entries.push_back({row, col, v});
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;  // row prices, valid when optimal
  int iterations = 0;
  double phase1_residual = 0.0;  // > 0 when infeasible
  int worst_row = -1;            // largest phase-1 residual row when infeasible
};

class LpNumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Revised simplex with explicit variable bounds. Phase 1 via artificial
// variables; Bland's rule engaged after a degeneracy streak. Deterministic
// (index tie-breaking throughout).
LpSolution solve_lp(const LpProblem& problem);

// plain-text dump for triage
std::string dump_problem(const LpProblem& problem);

}  // namespace gecopt::lp

#endif
