#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uavcrn/channel.hpp"
#include "uavcrn/driver.hpp"

namespace uavcrn {

enum class SweepParam { Gamma, T, P_hor_ave, P_ver_ave };

std::string to_string(SweepParam p);
/// Accepts Gamma, T, P_hor_ave, P_ver_ave.
std::optional<SweepParam> parse_sweep_param(std::string_view name);

/// Copy of `base` with one parameter replaced. Gamma is given in dB relative
/// to 1 W, T in seconds (N follows), the budgets in watts.
Scenario with_param(const Scenario& base, SweepParam p, double value);

/// Lengthens a solution from `from.N` to `to.N` slots by repeating its best
/// hover waypoint, with power capped at P_ave in the new slots. Returns
/// nullopt when the solution has no hover waypoint or the result fails the
/// audit.
std::optional<DecisionVariables> extend_horizon(const DecisionVariables& dv,
                                                const Scenario& from,
                                                const Scenario& to,
                                                LosModel model);

struct SweepCell {
  SweepParam param = SweepParam::Gamma;
  double value = 0.0;
  Scheme scheme = Scheme::Proposed;
  RunReport report;                 // the better of the two runs below
  double cold_objective = 0.0;      // run from the circle
  std::optional<double> warm_objective; // run from the previous cell
  bool from_warm = false;
  std::string error;                // set when the cell threw
};

struct SweepOptions {
  DriverOptions driver;
  int workers = 1;
  /// Also start each cell from the previous cell's solution. Values are
  /// visited in the order that only relaxes the problem.
  bool continuation = true;
};

/// One cell per (value, scheme), in the order of `values` then `schemes`.
/// Each scheme is a separate chain; chains run `workers` at a time. A failing
/// cell is recorded and the sweep goes on.
std::vector<SweepCell> run_sweep(const Scenario& base, SweepParam p,
                                 const std::vector<double>& values,
                                 const std::vector<Scheme>& schemes,
                                 const SweepOptions& opt = {});

/// One sample of a fixed-altitude straight pass over a user.
struct TradeoffSample {
  int plan = 0;
  double altitude = 0.0;
  int slot = 0;
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  double theta_deg = 0.0;
  double p_los = 0.0;
  double rate_los = 0.0;      // R^L, LoS rate at the sample
  double expected_rate = 0.0; // P^L R^L + (1 - P^L) R^N
  double lower_bound = 0.0;   // P^L R^L
};

/// Straight flight from `from` to `to` in `slots` evenly spaced samples at
/// each altitude, transmitting `power_w` to `user`.
std::vector<TradeoffSample> tradeoff_demo(const std::vector<double>& altitudes,
                                          const Eigen::Vector2d& user,
                                          const Eigen::Vector2d& from,
                                          const Eigen::Vector2d& to,
                                          const ChannelParams& cp,
                                          double power_w, int slots);

} // namespace uavcrn
