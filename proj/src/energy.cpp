#include "uavcrn/energy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace uavcrn {

void RotorcraftParams::validate() const {
  for (double x : {P0, P1, U_tip, d0, rho, s, A, v0, weight}) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("rotorcraft: all constants must be positive");
    }
  }
}

double blade_profile_power(double speed, const RotorcraftParams& rp) {
  return rp.P0 * (1.0 + 3.0 * speed * speed / (rp.U_tip * rp.U_tip));
}

double parasite_power(double speed, const RotorcraftParams& rp) {
  return 0.5 * rp.d0 * rp.rho * rp.s * rp.A * speed * speed * speed;
}

double induced_factor(double speed, double v0) {
  const double c = speed * speed / (v0 * v0);
  // l^2 = (sqrt(c^2 + 4) - c) / 2, written without the cancellation
  return std::sqrt(2.0 / (std::sqrt(c * c + 4.0) + c));
}

double induced_power(double speed, const RotorcraftParams& rp) {
  return rp.P1 * induced_factor(speed, rp.v0);
}

double horizontal_power(const Eigen::Vector2d& v_xy,
                        const RotorcraftParams& rp) {
  const double speed = v_xy.norm();
  return blade_profile_power(speed, rp) + parasite_power(speed, rp) +
         induced_power(speed, rp);
}

double vertical_power(double v_z, const RotorcraftParams& rp) {
  return v_z > 0.0 ? rp.weight * v_z : 0.0;
}

BudgetReport budget_check(const DecisionVariables& dv,
                          const RotorcraftParams& rp, double P_hor_ave,
                          double P_ver_ave) {
  const int n = dv.slots();
  if (n == 0) {
    throw std::invalid_argument("budget_check: empty horizon");
  }
  if (dv.v_xy.cols() != n || dv.v_z.size() != n) {
    throw std::invalid_argument("budget_check: velocity length differs from N");
  }
  BudgetReport rep;
  for (int i = 0; i < n; ++i) {
    rep.horizontal_average += horizontal_power(dv.v_xy.col(i), rp);
    rep.vertical_average += vertical_power(dv.v_z(i), rp);
  }
  rep.horizontal_average /= n;
  rep.vertical_average /= n;
  rep.horizontal_margin = P_hor_ave - rep.horizontal_average;
  rep.vertical_margin = P_ver_ave - rep.vertical_average;
  if (rep.horizontal_margin < 0.0) {
    std::ostringstream os;
    os << "horizontal propulsion average " << rep.horizontal_average
       << " W exceeds budget " << P_hor_ave << " W";
    rep.violations.push_back(os.str());
  }
  if (rep.vertical_margin < 0.0) {
    std::ostringstream os;
    os << "vertical propulsion average " << rep.vertical_average
       << " W exceeds budget " << P_ver_ave << " W";
    rep.violations.push_back(os.str());
  }
  rep.ok = rep.violations.empty();
  return rep;
}

} // namespace uavcrn
