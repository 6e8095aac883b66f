#pragma once

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace uavcrn::solver {

/// Value, gradient and (optionally) Hessian of one constraint, expressed in
/// the constraint's local coordinates (the order of its support list).
struct LocalEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// Evaluates a constraint at `x_local`. Returns false when the point is outside
/// the oracle's domain. The Hessian is only read when `want_hessian` is set.
/// Oracles must be reentrant; the solver never shares one LocalEval between
/// threads.
using Oracle =
    std::function<bool(const Eigen::VectorXd& x_local, bool want_hessian,
                        LocalEval& out)>;

/// g(x[support]) <= 0 with g convex on the region the solver visits.
struct SmoothConstraint {
  std::vector<int> support;
  Oracle oracle;
  std::string family;
};

/// sum_k coef[k] * x[idx[k]] <= rhs (or == rhs when used as an equality).
struct LinearRow {
  std::vector<int> idx;
  std::vector<double> coef;
  double rhs = 0.0;
  std::string family;
};

/// Maximize c'x + offset subject to box bounds, sparse linear rows, smooth
/// convex inequalities and a few affine equalities.
class SmoothProgram {
 public:
  explicit SmoothProgram(int num_vars);

  int num_vars() const { return n_; }

  void set_objective(int var, double coeff);
  void add_objective(int var, double coeff);
  void set_objective_offset(double offset) { offset_ = offset; }
  void set_bounds(int var, double lo, double hi);
  int add_linear_inequality(LinearRow row);
  int add_equality(LinearRow row);
  int add_smooth_inequality(SmoothConstraint c);
  void set_start(Eigen::VectorXd x0);

  const Eigen::VectorXd& objective_coefficients() const { return c_; }
  double objective_offset() const { return offset_; }
  double objective(const Eigen::VectorXd& x) const;
  const Eigen::VectorXd& lower() const { return lo_; }
  const Eigen::VectorXd& upper() const { return hi_; }
  const std::vector<LinearRow>& linear_rows() const { return rows_; }
  const std::vector<LinearRow>& equalities() const { return eqs_; }
  const std::vector<SmoothConstraint>& smooth() const { return smooth_; }
  const Eigen::VectorXd& start() const { return x0_; }

  /// Largest constraint violation at x over every family; +inf when an
  /// oracle rejects the point.
  double max_violation(const Eigen::VectorXd& x) const;

  /// Evaluates one smooth constraint at a full-length point.
  bool eval_smooth(int k, const Eigen::VectorXd& x, bool want_hessian,
                   LocalEval& out) const;

 private:
  void check_var(int var) const;
  void check_row(const LinearRow& row) const;

  int n_;
  Eigen::VectorXd c_;
  double offset_ = 0.0;
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
  std::vector<LinearRow> rows_;
  std::vector<LinearRow> eqs_;
  std::vector<SmoothConstraint> smooth_;
  Eigen::VectorXd x0_;
};

struct SolverOptions {
  double tol = 1e-8;        // target duality gap and KKT residual
  double t0 = 1.0;          // initial barrier weight on the objective
  double mu_factor = 10.0;  // barrier weight growth per outer step
  int max_newton = 2000;    // total Newton steps over both phases
  int max_centering = 200;  // Newton steps per centering
  double phase1_margin = 1e-7;
  std::ostream* trace = nullptr; // CSV rows: phase,iteration,mu,objective,residual
};

enum class Status { Optimal, MaxIterations, Infeasible, NumericalFailure };

std::string to_string(Status s);

struct SolveStatus {
  Status status = Status::NumericalFailure;
  double kkt_residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double objective = 0.0;
  double max_violation = std::numeric_limits<double>::infinity();
  bool used_phase1 = false;
};

struct SolveResult {
  /// Last strictly feasible iterate. When phase 1 fails this is the point of
  /// least elastic violation found, so callers can restart from it.
  Eigen::VectorXd x;
  SolveStatus status;
  /// Barrier estimates: linear rows first, then smooth constraints.
  Eigen::VectorXd multipliers;
};

/// Log-barrier interior-point method with damped Newton steps. An elastic
/// phase 1 runs first when the start is not strictly feasible.
/// Deterministic: the same program and options give bit-identical output.
SolveResult solve(const SmoothProgram& prog, const SolverOptions& opts = {});

/// Stationarity + complementarity residual with the best nonnegative
/// multipliers (dense nonnegative least squares), plus the largest violation.
/// Dense, so intended for small programs.
double kkt_residual(const SmoothProgram& prog, const Eigen::VectorXd& x);

} // namespace uavcrn::solver
