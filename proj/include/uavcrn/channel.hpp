#pragma once

#include <Eigen/Core>

namespace uavcrn {

/// Air-to-ground channel constants, all in linear units.
///
/// The LoS probability follows the elevation-angle sigmoid
/// P_L(theta) = 1 / (1 + a * exp(-b * (theta - a))) with theta in degrees.
struct ChannelParams {
  double a = 11.95;      // sigmoid shape
  double b = 0.14;       // sigmoid slope, per degree
  double rho0 = 1e-6;    // LoS gain at 1 m
  double mu = 1e-2;      // extra NLoS attenuation
  double alpha_L = 2.2;  // LoS path-loss exponent
  double alpha_N = 3.5;  // NLoS path-loss exponent
  double sigma2 = 1e-13; // noise power [W]

  /// Reference SNR at 1 m, rho0 / sigma2.
  double gamma() const { return rho0 / sigma2; }

  /// Throws std::invalid_argument when a constant is out of range.
  void validate() const;

  /// Builds parameters from the usual tabulated units: rho0 and mu in dB,
  /// sigma2 in dBm.
  static ChannelParams from_db(double a, double b, double rho0_db, double mu_db,
                               double alpha_L, double alpha_N,
                               double sigma2_dbm);
};

double db_to_linear(double db);
double dbm_to_watts(double dbm);

struct AirPosition {
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  double z = 0.0;
};

enum class NodeKind { CognitiveUser, PrimaryUser };

struct GroundNode {
  Eigen::Vector2d w = Eigen::Vector2d::Zero();
  NodeKind kind = NodeKind::CognitiveUser;
};

enum class LinkState { LoS, NLoS };

/// How link-state statistics are evaluated. `AlwaysLoS` pins P_L to one, which
/// is the deterministic-LoS benchmark channel.
enum class LosModel { Probabilistic, AlwaysLoS };

/// Elevation angle from the ground node up to the aircraft, in degrees.
/// Directly overhead is 90. Throws std::domain_error when the aircraft sits on
/// the node (z == 0 and zero horizontal offset).
double elevation_angle_deg(const AirPosition& p, const GroundNode& g);

/// LoS probability at elevation `theta_deg`; strictly increasing on [0, 90].
double los_probability(double theta_deg, const ChannelParams& cp);

/// P_L for the given link, honoring the LoS model.
double link_los_probability(const AirPosition& p, const GroundNode& g,
                            const ChannelParams& cp, LosModel model);

double link_distance(const AirPosition& p, const GroundNode& g);

/// Spectral efficiency of one link state [bit/s/Hz].
double rate(double power_w, double distance_m, LinkState state,
            const ChannelParams& cp);

/// Link-state average of the LoS and NLoS rates.
double expected_rate(double power_w, const AirPosition& p, const GroundNode& g,
                     const ChannelParams& cp,
                     LosModel model = LosModel::Probabilistic);

/// The LoS-only part of expected_rate, P_L * R_L. Never exceeds expected_rate.
double lower_bound_rate(double power_w, const AirPosition& p,
                        const GroundNode& g, const ChannelParams& cp,
                        LosModel model = LosModel::Probabilistic);

/// Expected received interference power at the primary node [W].
///
/// Received power is P * rho0 * d^-alpha (noise is not part of it), mixed over
/// LoS/NLoS with the link's P_L. Linear in `power_w`.
double expected_interference(double power_w, const AirPosition& p,
                             const GroundNode& d_node, const ChannelParams& cp,
                             LosModel model = LosModel::Probabilistic);

/// Interference per watt of transmit power, i.e. expected_interference(1, ...).
double interference_coefficient(const AirPosition& p, const GroundNode& d_node,
                                const ChannelParams& cp,
                                LosModel model = LosModel::Probabilistic);

} // namespace uavcrn
