#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uavcrn/decision_variables.hpp"
#include "uavcrn/model.hpp"

namespace uavcrn {

enum class Scheme { Proposed, NPC, TwoDLoS, TwoDPLoS };

/// What each scheme optimizes. NPC keeps P at P_ave, the 2D schemes keep the
/// start altitude, and 2D-LoS also treats every link as LoS.
struct SchemeConfig {
  Scheme scheme = Scheme::Proposed;
  bool optimize_power = true;
  bool optimize_vertical = true;
  bool force_los = false;

  static SchemeConfig of(Scheme s);
  LosModel los_model() const {
    return force_los ? LosModel::AlwaysLoS : LosModel::Probabilistic;
  }
};

std::string to_string(Scheme s);
/// Accepts "proposed", "npc", "2d-los", "2d-plos" (any case).
std::optional<Scheme> parse_scheme(std::string_view name);
std::vector<std::string> scheme_names();
std::vector<Scheme> all_schemes();

struct IterationRecord {
  int index = 0;                 // outer iteration, from 1
  double objective = 0.0;        // exact objective after the iteration
  double after_scheduling = 0.0;
  double after_power = 0.0;
  double after_horizontal = 0.0;
  double after_vertical = 0.0;
  double max_residual = 0.0;     // audit residual of the iterate
  double wall_time_s = 0.0;      // cumulative
};

enum class RunOutcome { Converged, MaxIterations, Stalled, Decreased, Infeasible };

std::string to_string(RunOutcome o);

struct RunReport {
  Scheme scheme = Scheme::Proposed;
  Scenario scenario;
  DecisionVariables solution;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  std::vector<IterationRecord> records;
  RunOutcome outcome = RunOutcome::Infeasible;
  bool converged = false;
  bool binarized = false;        // schedule was rounded after the loop
  std::string diagnostics;
  double wall_time_s = 0.0;
};

struct DriverOptions {
  int inner_iters = 3;           // SCA steps per trajectory block
  std::ostream* log = nullptr;   // one line per outer iteration
  /// Start from this point instead of the circle. It must pass the audit.
  std::optional<DecisionVariables> warm_start;
};

/// Block coordinate ascent over scheduling, power, horizontal route and
/// altitude, stopping once an outer iteration gains at most sc.epsilon.
RunReport optimize(const Scenario& sc, Scheme scheme,
                   const DriverOptions& opt = {});

/// One optimize() per scheme, `workers` at a time. Results follow the input
/// order.
std::vector<RunReport> compare_schemes(const Scenario& sc,
                                       const std::vector<Scheme>& schemes,
                                       const DriverOptions& opt = {},
                                       int workers = 1);

/// 0 converged, 2 stalled or decreased, 3 infeasible. Reaching the iteration
/// cap without convergence counts as a stall.
int exit_code(const RunReport& r);

} // namespace uavcrn
