#include "uavcrn/decision_variables.hpp"

#include <stdexcept>

namespace uavcrn {

DecisionVariables::DecisionVariables(int users, int slots)
    : schedule(Eigen::MatrixXd::Zero(users, slots)),
      power(Eigen::VectorXd::Zero(slots)),
      q(Eigen::Matrix2Xd::Zero(2, slots)),
      v_xy(Eigen::Matrix2Xd::Zero(2, slots)),
      z(Eigen::VectorXd::Zero(slots)),
      v_z(Eigen::VectorXd::Zero(slots)),
      theta_users(Eigen::MatrixXd::Zero(users, slots)),
      theta_primary(Eigen::VectorXd::Zero(slots)),
      phi_primary(Eigen::VectorXd::Zero(slots)) {}

void DecisionVariables::refresh_kinematics(double delta_t) {
  const int n_slots = slots();
  v_xy.setZero(2, n_slots);
  v_z.setZero(n_slots);
  for (int n = 0; n + 1 < n_slots; ++n) {
    v_xy.col(n) = (q.col(n + 1) - q.col(n)) / delta_t;
    v_z(n) = (z(n + 1) - z(n)) / delta_t;
  }
}

void DecisionVariables::check_dimensions() const {
  const auto n = power.size();
  const auto r = schedule.rows();
  if (schedule.cols() != n || q.cols() != n || v_xy.cols() != n ||
      z.size() != n || v_z.size() != n || theta_users.rows() != r ||
      theta_users.cols() != n || theta_primary.size() != n ||
      phi_primary.size() != n) {
    throw std::invalid_argument("decision variables: dimension mismatch");
  }
}

} // namespace uavcrn
