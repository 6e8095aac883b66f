#pragma once

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <string>

#include "uavcrn/decision_variables.hpp"
#include "uavcrn/model.hpp"
#include "uavcrn/sca.hpp"
#include "uavcrn/solver.hpp"

namespace uavcrn {

struct BlockOptions {
  LosModel los_model = LosModel::Probabilistic;
  double solver_tol = 1e-7;
  int inner_iters = 1;    // SCA steps per trajectory block
  int max_newton = 4000;
  double audit_tol = 1e-6;
  std::ostream* trace = nullptr;
};

struct BlockResult {
  DecisionVariables dv;          // accepted iterate, or the input when rejected
  bool accepted = false;
  bool stalled = false;          // solver failed to return a usable point
  solver::SolveStatus status;
  double objective_before = 0.0; // exact objective of the input
  double objective_after = 0.0;  // exact objective of dv
  double surrogate = 0.0;        // program objective at the solver output
  std::string note;
};

/// A subproblem ready for the solver, with a decoder back to the iterate.
struct BuiltProgram {
  solver::SmoothProgram program{0};
  std::function<DecisionVariables(const Eigen::VectorXd&)> decode;
  int num_smooth = 0;
  int num_rows = 0;
};

BuiltProgram build_scheduling(const DecisionVariables& dv, const Scenario& sc,
                              LosModel model);
BuiltProgram build_power(const DecisionVariables& dv, const Scenario& sc,
                         LosModel model);
BuiltProgram build_horizontal(const DecisionVariables& dv, const Scenario& sc,
                              const sca::ExpansionPoint& ep, LosModel model);
BuiltProgram build_vertical(const DecisionVariables& dv, const Scenario& sc,
                            const sca::ExpansionPoint& ep, LosModel model);

/// Linear program over the relaxed schedule, followed by a vertex crossover.
BlockResult solve_scheduling(const DecisionVariables& dv, const Scenario& sc,
                             const BlockOptions& opt = {});
/// Concave power allocation with box, average and interference limits.
BlockResult solve_power(const DecisionVariables& dv, const Scenario& sc,
                        const BlockOptions& opt = {});
/// SCA step(s) on the horizontal route, expanded at dv.
BlockResult solve_horizontal(const DecisionVariables& dv, const Scenario& sc,
                             const BlockOptions& opt = {});
/// SCA step(s) on the altitude profile, expanded at dv.
BlockResult solve_vertical(const DecisionVariables& dv, const Scenario& sc,
                           const BlockOptions& opt = {});

/// Repeated horizontal steps with an elastic start until the interference cap
/// holds in every slot. Returns false when `max_steps` is not enough.
bool restore_interference(DecisionVariables& dv, const Scenario& sc,
                          const BlockOptions& opt, int max_steps = 30);

/// Per-slot argmax of the weights, ties to the lowest user index.
Eigen::MatrixXd binarize_schedule(const Eigen::MatrixXd& weights);

/// True when every entry is 0 or 1 within `tol`.
bool is_binary(const Eigen::MatrixXd& schedule, double tol = 1e-9);

} // namespace uavcrn
