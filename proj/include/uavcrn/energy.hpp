#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "uavcrn/decision_variables.hpp"

namespace uavcrn {

/// Rotary-wing propulsion constants. Defaults are the commonly used small
/// quadrotor values; none of them is pinned by the mission table.
struct RotorcraftParams {
  double P0 = 79.86;    // blade-profile hover power [W]
  double P1 = 88.63;    // induced hover power [W]
  double U_tip = 120.0; // rotor tip speed [m/s]
  double d0 = 0.6;      // fuselage drag ratio
  double rho = 1.225;   // air density [kg/m^3]
  double s = 0.05;      // rotor solidity
  double A = 0.503;     // rotor disc area [m^2]
  double v0 = 4.03;     // mean induced velocity in hover [m/s]
  double weight = 100.0; // aircraft weight [N]

  void validate() const;
};

// Horizontal power split into its three parts. Only the speed matters.
double blade_profile_power(double speed, const RotorcraftParams& rp);
double parasite_power(double speed, const RotorcraftParams& rp);
double induced_power(double speed, const RotorcraftParams& rp);

/// Normalized induced-velocity factor: the positive root of
/// 1/l^2 = l^2 + speed^2 / v0^2. Equals one at hover.
double induced_factor(double speed, double v0);

/// Level-flight propulsion power at horizontal velocity `v_xy` [W].
double horizontal_power(const Eigen::Vector2d& v_xy, const RotorcraftParams& rp);

/// Climb power W * v_z; descending costs nothing.
double vertical_power(double v_z, const RotorcraftParams& rp);

struct BudgetReport {
  double horizontal_average = 0.0; // (1/N) sum of P_hor [W]
  double vertical_average = 0.0;   // (1/N) sum of P_ver [W]
  double horizontal_margin = 0.0;  // budget - average; negative is a violation
  double vertical_margin = 0.0;
  bool ok = true;
  std::vector<std::string> violations;
};

/// Averages both propulsion powers over the horizon and compares them with
/// the budgets. Throws std::invalid_argument on an empty horizon or mismatched
/// velocity arrays.
BudgetReport budget_check(const DecisionVariables& dv,
                          const RotorcraftParams& rp, double P_hor_ave,
                          double P_ver_ave);

} // namespace uavcrn
