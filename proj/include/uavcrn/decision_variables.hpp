#pragma once

#include <Eigen/Core>

namespace uavcrn {

/// One candidate solution over a horizon of N slots and R cognitive users.
///
/// Waypoint n is where the aircraft sits during slot n. The route is closed:
/// q[N-1] == q[0] and z[N-1] == z[0]. Velocity n is the displacement to the
/// next waypoint divided by the slot length, so the last slot (already back at
/// the start) carries zero velocity.
struct DecisionVariables {
  Eigen::MatrixXd schedule;        // R x N weights in [0, 1]
  Eigen::VectorXd power;           // N, transmit power [W]
  Eigen::Matrix2Xd q;              // 2 x N horizontal waypoints [m]
  Eigen::Matrix2Xd v_xy;           // 2 x N horizontal velocity [m/s]
  Eigen::VectorXd z;               // N altitudes [m]
  Eigen::VectorXd v_z;             // N signed climb rate [m/s]
  Eigen::MatrixXd theta_users;     // R x N elevation angles [deg]
  Eigen::VectorXd theta_primary;   // N, upper angle estimate to D [deg]
  Eigen::VectorXd phi_primary;     // N, lower angle estimate to D [deg]

  DecisionVariables() = default;
  DecisionVariables(int users, int slots);

  int slots() const { return static_cast<int>(power.size()); }
  int users() const { return static_cast<int>(schedule.rows()); }

  /// Rebuilds both velocity arrays from the waypoints.
  void refresh_kinematics(double delta_t);

  /// Throws std::invalid_argument when array shapes disagree.
  void check_dimensions() const;
};

} // namespace uavcrn
