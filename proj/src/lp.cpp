#include "gecopt/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace gecopt::lp {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr int kDegenerateStreakLimit = 40;
constexpr int kRefactorInterval = 64;

enum class VarState { basic, at_lower, at_upper, free_zero };

struct Column {
  std::vector<int> rows;
  std::vector<double> vals;
  double lo = 0.0;
  double up = 0.0;
  double cost = 0.0;  // phase-2 cost
};

class Simplex {
 public:
  explicit Simplex(const LpProblem& p) : m_(p.num_rows()), nstruct_(p.num_vars) {
    // structural columns
    cols_.resize(nstruct_);
    for (int j = 0; j < nstruct_; ++j) {
      cols_[j].lo = p.lower[j];
      cols_[j].up = p.upper[j];
      cols_[j].cost = p.objective[j];
    }
    for (const auto& t : p.entries) {
      if (t.row < 0 || t.row >= m_ || t.col < 0 || t.col >= nstruct_)
        throw LpNumericalFailure("triplet index out of range");
      if (t.value != 0.0) {
        cols_[t.col].rows.push_back(t.row);
        cols_[t.col].vals.push_back(t.value);
      }
    }
    // slack column per inequality row
    for (int i = 0; i < m_; ++i) {
      if (p.senses[i] == RowSense::eq) continue;
      Column c;
      c.rows = {i};
      c.vals = {1.0};
      if (p.senses[i] == RowSense::le) {
        c.lo = 0.0;
        c.up = kInf;
      } else {
        c.lo = -kInf;
        c.up = 0.0;
      }
      cols_.push_back(std::move(c));
    }
    nreal_ = static_cast<int>(cols_.size());

    // initial nonbasic values: nearest finite bound, else 0
    state_.assign(nreal_, VarState::at_lower);
    x_.assign(nreal_, 0.0);
    for (int j = 0; j < nreal_; ++j) {
      const Column& c = cols_[j];
      if (std::isfinite(c.lo)) {
        x_[j] = c.lo;
        state_[j] = VarState::at_lower;
      } else if (std::isfinite(c.up)) {
        x_[j] = c.up;
        state_[j] = VarState::at_upper;
      } else {
        x_[j] = 0.0;
        state_[j] = VarState::free_zero;
      }
    }

    // artificial per row, signed so the initial basis is feasible
    rhs_ = Eigen::VectorXd::Zero(m_);
    for (int i = 0; i < m_; ++i) rhs_(i) = p.rhs[i];
    Eigen::VectorXd resid = rhs_;
    for (int j = 0; j < nreal_; ++j) {
      if (x_[j] == 0.0) continue;
      const Column& c = cols_[j];
      for (std::size_t k = 0; k < c.rows.size(); ++k)
        resid(c.rows[k]) -= c.vals[k] * x_[j];
    }
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      Column a;
      a.rows = {i};
      a.vals = {resid(i) >= 0.0 ? 1.0 : -1.0};
      a.lo = 0.0;
      a.up = kInf;
      a.cost = 0.0;
      cols_.push_back(std::move(a));
      const int j = nreal_ + i;
      basis_[i] = j;
      state_.push_back(VarState::basic);
      x_.push_back(std::abs(resid(i)));
    }
    ntotal_ = static_cast<int>(cols_.size());
    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    for (int i = 0; i < m_; ++i)
      if (cols_[nreal_ + i].vals[0] < 0.0) binv_(i, i) = -1.0;
    recompute_basics();
  }

  LpSolution run(const LpProblem& p) {
    LpSolution sol;
    // phase 1: minimize sum of artificials
    std::vector<double> c1(ntotal_, 0.0);
    for (int j = nreal_; j < ntotal_; ++j) c1[j] = 1.0;
    optimize(c1, /*phase1=*/true);
    double infeas = 0.0;
    for (int j = nreal_; j < ntotal_; ++j) infeas += x_[j];
    if (infeas > 1e-7) {
      sol.status = LpStatus::infeasible;
      sol.phase1_residual = infeas;
      double worst = 0.0;
      for (int i = 0; i < m_; ++i) {
        const int j = basis_[i];
        if (j >= nreal_ && x_[j] > worst) {
          worst = x_[j];
          sol.worst_row = i;
        }
      }
      sol.iterations = iters_;
      return sol;
    }
    // lock artificials at zero
    for (int j = nreal_; j < ntotal_; ++j) {
      cols_[j].up = 0.0;
      if (state_[j] != VarState::basic) {
        x_[j] = 0.0;
        state_[j] = VarState::at_lower;
      }
    }

    // phase 2
    std::vector<double> c2(ntotal_, 0.0);
    for (int j = 0; j < nreal_; ++j) c2[j] = cols_[j].cost;
    const bool bounded = optimize(c2, /*phase1=*/false);
    if (!bounded) {
      sol.status = LpStatus::unbounded;
      sol.iterations = iters_;
      return sol;
    }

    sol.status = LpStatus::optimal;
    sol.x.assign(x_.begin(), x_.begin() + nstruct_);
    double obj = 0.0;
    for (int j = 0; j < nstruct_; ++j) obj += p.objective[j] * sol.x[j];
    sol.objective = obj;
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = c2[basis_[i]];
    Eigen::VectorXd y = binv_.transpose() * cb;
    sol.duals.assign(y.data(), y.data() + m_);
    sol.iterations = iters_;
    return sol;
  }

 private:
  double col_dot(const Column& c, const Eigen::VectorXd& v) const {
    double s = 0.0;
    for (std::size_t k = 0; k < c.rows.size(); ++k) s += c.vals[k] * v(c.rows[k]);
    return s;
  }

  void refactorize() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      const Column& c = cols_[basis_[i]];
      for (std::size_t k = 0; k < c.rows.size(); ++k) B(c.rows[k], i) = c.vals[k];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible())
      throw LpNumericalFailure("singular basis during refactorization");
    binv_ = lu.inverse();
    recompute_basics();
  }

  void recompute_basics() {
    Eigen::VectorXd r = rhs_;
    for (int j = 0; j < ntotal_; ++j) {
      if (state_[j] == VarState::basic || x_[j] == 0.0) continue;
      const Column& c = cols_[j];
      for (std::size_t k = 0; k < c.rows.size(); ++k)
        r(c.rows[k]) -= c.vals[k] * x_[j];
    }
    Eigen::VectorXd xb = binv_ * r;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb(i);
  }

  // returns false iff unbounded (phase 2 only)
  bool optimize(const std::vector<double>& cost, bool phase1) {
    const long max_iters = 20000L + 200L * (m_ + ntotal_);
    int degen_streak = 0;
    bool bland = false;
    int since_refactor = 0;
    Eigen::VectorXd cb(m_), y(m_), w(m_);

    for (;;) {
      if (++iters_ > max_iters)
        throw LpNumericalFailure("iteration limit exceeded (anti-cycling safeguards exhausted)");
      for (int i = 0; i < m_; ++i) cb(i) = cost[basis_[i]];
      y = binv_.transpose() * cb;

      // pricing
      int enter = -1;
      double best = 0.0;
      int dir = 0;
      for (int j = 0; j < ntotal_; ++j) {
        if (state_[j] == VarState::basic) continue;
        if (cols_[j].lo == cols_[j].up && std::isfinite(cols_[j].lo)) continue;
        const double d = cost[j] - col_dot(cols_[j], y);
        int cand_dir = 0;
        double score = 0.0;
        if (state_[j] == VarState::at_lower && d < -kOptTol) {
          cand_dir = +1;
          score = -d;
        } else if (state_[j] == VarState::at_upper && d > kOptTol) {
          cand_dir = -1;
          score = d;
        } else if (state_[j] == VarState::free_zero && std::abs(d) > kOptTol) {
          cand_dir = d < 0 ? +1 : -1;
          score = std::abs(d);
        }
        if (cand_dir == 0) continue;
        if (bland) {
          enter = j;
          dir = cand_dir;
          break;
        }
        if (score > best + 1e-15) {
          best = score;
          enter = j;
          dir = cand_dir;
        }
      }
      if (enter < 0) return true;  // optimal for this cost vector

      const Column& ec = cols_[enter];
      Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
      for (std::size_t k = 0; k < ec.rows.size(); ++k) a(ec.rows[k]) = ec.vals[k];
      w = binv_ * a;

      // ratio test: step t >= 0 along entering direction dir
      double t_max = kInf;
      int leave_pos = -1;
      int leave_to_upper = 0;
      if (std::isfinite(ec.lo) && std::isfinite(ec.up))
        t_max = ec.up - ec.lo;  // bound flip
      for (int i = 0; i < m_; ++i) {
        const double delta = -dir * w(i);  // per-unit change of basic i
        const Column& bc = cols_[basis_[i]];
        double ti = kInf;
        int to_upper = 0;
        if (delta < -kPivotTol) {
          if (std::isfinite(bc.lo)) ti = (x_[basis_[i]] - bc.lo) / (-delta);
        } else if (delta > kPivotTol) {
          if (std::isfinite(bc.up)) {
            ti = (bc.up - x_[basis_[i]]) / delta;
            to_upper = 1;
          }
        }
        if (ti < 0.0) ti = 0.0;
        if (ti < t_max - 1e-12 ||
            (ti < t_max + 1e-12 && leave_pos >= 0 &&
             basis_[i] < basis_[leave_pos])) {
          t_max = ti;
          leave_pos = i;
          leave_to_upper = to_upper;
        }
      }

      if (!std::isfinite(t_max)) {
        if (phase1)
          throw LpNumericalFailure("unbounded phase-1 subproblem");
        return false;  // unbounded
      }

      if (t_max <= kPivotTol) {
        ++degen_streak;
        if (degen_streak > kDegenerateStreakLimit) bland = true;
      } else {
        degen_streak = 0;
        bland = false;
      }

      // apply step
      x_[enter] += dir * t_max;
      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * t_max * w(i);

      if (leave_pos < 0) {
        // bound flip, basis unchanged
        state_[enter] =
            dir > 0 ? VarState::at_upper : VarState::at_lower;
        x_[enter] = dir > 0 ? ec.up : ec.lo;
        continue;
      }

      const int leave = basis_[leave_pos];
      state_[leave] = leave_to_upper ? VarState::at_upper : VarState::at_lower;
      x_[leave] = leave_to_upper ? cols_[leave].up : cols_[leave].lo;
      state_[enter] = VarState::basic;
      basis_[leave_pos] = enter;

      const double piv = w(leave_pos);
      if (std::abs(piv) < kPivotTol)
        throw LpNumericalFailure("tiny pivot element");
      binv_.row(leave_pos) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_pos) continue;
        const double f = w(i);
        if (f != 0.0) binv_.row(i) -= f * binv_.row(leave_pos);
      }

      if (++since_refactor >= kRefactorInterval) {
        refactorize();
        since_refactor = 0;
      }
    }
  }

  int m_;
  int nstruct_;
  int nreal_ = 0;
  int ntotal_ = 0;
  std::vector<Column> cols_;
  std::vector<VarState> state_;
  std::vector<double> x_;
  std::vector<int> basis_;
  Eigen::VectorXd rhs_;
  Eigen::MatrixXd binv_;
  long iters_ = 0;
};

void check_problem(const LpProblem& p) {
  if (static_cast<int>(p.objective.size()) != p.num_vars ||
      static_cast<int>(p.lower.size()) != p.num_vars ||
      static_cast<int>(p.upper.size()) != p.num_vars)
    throw LpNumericalFailure("inconsistent problem dimensions");
  if (p.senses.size() != p.rhs.size())
    throw LpNumericalFailure("inconsistent row dimensions");
  for (int j = 0; j < p.num_vars; ++j) {
    if (!std::isfinite(p.objective[j]))
      throw LpNumericalFailure("non-finite objective coefficient");
    if (p.lower[j] > p.upper[j])
      throw LpNumericalFailure("variable with lower > upper");
  }
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  check_problem(problem);
  Simplex s(problem);
  return s.run(problem);
}

std::string dump_problem(const LpProblem& p) {
  std::ostringstream os;
  os << "lp: " << p.num_vars << " vars, " << p.num_rows() << " rows\n";
  os << "min";
  for (int j = 0; j < p.num_vars; ++j) os << " " << p.objective[j] << "*x" << j;
  os << "\n";
  std::vector<std::vector<std::pair<int, double>>> rows(p.num_rows());
  for (const auto& t : p.entries) rows[t.row].emplace_back(t.col, t.value);
  for (int i = 0; i < p.num_rows(); ++i) {
    os << "r" << i << ":";
    for (auto [c, v] : rows[i]) os << " " << v << "*x" << c;
    const char* s = p.senses[i] == RowSense::le   ? "<="
                    : p.senses[i] == RowSense::eq ? "=="
                                                  : ">=";
    os << " " << s << " " << p.rhs[i] << "\n";
  }
  for (int j = 0; j < p.num_vars; ++j)
    os << "x" << j << " in [" << p.lower[j] << ", " << p.upper[j] << "]\n";
  return os.str();
}

}  // namespace gecopt::lp
