#include "uavcrn/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uavcrn {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void ChannelParams::validate() const {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("channel: a and b must be positive");
  }
  if (!(mu > 0.0) || mu > 1.0) {
    throw std::invalid_argument("channel: mu must lie in (0, 1]");
  }
  if (!(alpha_L >= 2.0) || alpha_L > alpha_N) {
    throw std::invalid_argument("channel: need 2 <= alpha_L <= alpha_N");
  }
  if (!(rho0 > 0.0) || !(sigma2 > 0.0)) {
    throw std::invalid_argument("channel: rho0 and sigma2 must be positive");
  }
}

ChannelParams ChannelParams::from_db(double a, double b, double rho0_db,
                                     double mu_db, double alpha_L,
                                     double alpha_N, double sigma2_dbm) {
  ChannelParams cp;
  cp.a = a;
  cp.b = b;
  cp.rho0 = db_to_linear(rho0_db);
  cp.mu = db_to_linear(mu_db);
  cp.alpha_L = alpha_L;
  cp.alpha_N = alpha_N;
  cp.sigma2 = dbm_to_watts(sigma2_dbm);
  return cp;
}

double elevation_angle_deg(const AirPosition& p, const GroundNode& g) {
  if (p.z < 0.0) {
    throw std::domain_error("elevation_angle_deg: negative altitude");
  }
  const double horizontal = (p.q - g.w).norm();
  if (horizontal == 0.0) {
    if (p.z == 0.0) {
      throw std::domain_error("elevation_angle_deg: aircraft on the node");
    }
    return 90.0;
  }
  return 180.0 / std::numbers::pi * std::atan(p.z / horizontal);
}

double los_probability(double theta_deg, const ChannelParams& cp) {
  return 1.0 / (1.0 + cp.a * std::exp(-cp.b * (theta_deg - cp.a)));
}

double link_los_probability(const AirPosition& p, const GroundNode& g,
                            const ChannelParams& cp, LosModel model) {
  if (model == LosModel::AlwaysLoS) {
    return 1.0;
  }
  return los_probability(elevation_angle_deg(p, g), cp);
}

double link_distance(const AirPosition& p, const GroundNode& g) {
  return std::sqrt(p.z * p.z + (p.q - g.w).squaredNorm());
}

double rate(double power_w, double distance_m, LinkState state,
            const ChannelParams& cp) {
  if (!(distance_m > 0.0)) {
    throw std::domain_error("rate: distance must be positive");
  }
  const double snr =
      state == LinkState::LoS
          ? power_w * cp.gamma() / std::pow(distance_m, cp.alpha_L)
          : power_w * cp.gamma() * cp.mu / std::pow(distance_m, cp.alpha_N);
  return std::log2(1.0 + snr);
}

double expected_rate(double power_w, const AirPosition& p, const GroundNode& g,
                     const ChannelParams& cp, LosModel model) {
  const double d = link_distance(p, g);
  const double pl = link_los_probability(p, g, cp, model);
  return pl * rate(power_w, d, LinkState::LoS, cp) +
         (1.0 - pl) * rate(power_w, d, LinkState::NLoS, cp);
}

double lower_bound_rate(double power_w, const AirPosition& p,
                        const GroundNode& g, const ChannelParams& cp,
                        LosModel model) {
  const double d = link_distance(p, g);
  return link_los_probability(p, g, cp, model) *
         rate(power_w, d, LinkState::LoS, cp);
}

double interference_coefficient(const AirPosition& p, const GroundNode& d_node,
                                const ChannelParams& cp, LosModel model) {
  const double d = link_distance(p, d_node);
  const double pl = link_los_probability(p, d_node, cp, model);
  return cp.rho0 * (pl / std::pow(d, cp.alpha_L) +
                    (1.0 - pl) * cp.mu / std::pow(d, cp.alpha_N));
}

double expected_interference(double power_w, const AirPosition& p,
                             const GroundNode& d_node, const ChannelParams& cp,
                             LosModel model) {
  return power_w * interference_coefficient(p, d_node, cp, model);
}

} // namespace uavcrn
