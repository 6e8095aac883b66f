#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "uavcrn/channel.hpp"
#include "uavcrn/decision_variables.hpp"
#include "uavcrn/energy.hpp"

namespace uavcrn {

/// One problem instance. Immutable once validated.
struct Scenario {
  std::vector<GroundNode> users;
  GroundNode primary{Eigen::Vector2d::Zero(), NodeKind::PrimaryUser};
  AirPosition start;
  double T = 70.0;        // horizon [s]
  int N = 70;             // slots
  double delta_t = 1.0;   // slot length [s]
  double H_min = 30.0;    // [m]
  double H_max = 100.0;   // [m]
  double V_max = 25.0;    // horizontal speed [m/s]
  double Vhat_max = 10.0; // vertical speed [m/s]
  double a_max = 6.0;     // horizontal acceleration [m/s^2]
  std::optional<double> ahat_max; // vertical acceleration, off unless set
  double P_max = 0.4;     // [W]
  double P_ave = 0.1;     // [W]
  double Gamma = 0.0;     // interference threshold [W]
  double P_hor_ave = 880.0;
  double P_ver_ave = 265.0;
  ChannelParams cp;
  RotorcraftParams rp;
  double epsilon = 1e-4;
  int max_outer_iters = 50;

  int R() const { return static_cast<int>(users.size()); }

  /// Throws std::invalid_argument naming the first broken invariant.
  void validate() const;

  /// The mission table used throughout the experiments.
  static Scenario table2();

  /// Changes T and N together, keeping delta_t.
  void set_horizon(double T_s);
};

/// Per-user, per-slot P_L * R_L [bit/s/Hz], R x N.
Eigen::MatrixXd lower_bound_rates(const DecisionVariables& dv,
                                  const Scenario& sc,
                                  LosModel model = LosModel::Probabilistic);

/// (1/N) sum_n sum_r A[r][n] * P_L R_L. Throws std::invalid_argument on a
/// dimension mismatch.
double objective(const DecisionVariables& dv, const Scenario& sc,
                 LosModel model = LosModel::Probabilistic);

/// Expected interference at the primary node per slot [W].
Eigen::VectorXd interference_profile(const DecisionVariables& dv,
                                     const Scenario& sc,
                                     LosModel model = LosModel::Probabilistic);

/// Interference per watt per slot [W/W].
Eigen::VectorXd interference_coefficients(const DecisionVariables& dv,
                                          const Scenario& sc,
                                          LosModel model = LosModel::Probabilistic);

struct AuditEntry {
  std::string family;
  int index = -1;        // slot (or user) of the worst violation, -1 if global
  double residual = 0.0; // signed; positive means violated
};

struct AuditReport {
  std::vector<AuditEntry> entries; // one per family, worst case
  double tol = 0.0;

  bool feasible() const;
  double max_residual() const;
  /// Worst residual of one family; throws std::out_of_range if absent.
  double residual(const std::string& family) const;
  std::string describe() const;
};

/// Signed residual of every constraint family. Interference is reported
/// relative to Gamma, everything else in its own unit.
AuditReport feasibility_audit(const DecisionVariables& dv, const Scenario& sc,
                              double tol,
                              LosModel model = LosModel::Probabilistic);

/// Recomputes every angle in dv.theta_* / dv.phi_primary from the geometry.
void refresh_angles(DecisionVariables& dv, const Scenario& sc);

/// Circular start: centre at the user centroid, radius capped by the speed
/// budget and the nearest user, first waypoint nearest to sc.start, constant
/// altitude sc.start.z, uniform scheduling. Power is P_ave, lowered in slots
/// where P_ave would break the interference cap (unless `fixed_power`).
DecisionVariables init_solution(const Scenario& sc,
                                LosModel model = LosModel::Probabilistic,
                                bool fixed_power = false);

/// Radius and centre of the initial circle.
struct InitialCircle {
  Eigen::Vector2d center;
  double radius = 0.0;
};
InitialCircle initial_circle(const Scenario& sc);

} // namespace uavcrn
