#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "uavcrn/driver.hpp"
#include "uavcrn/experiments.hpp"

namespace uavcrn {

/// Headline numbers of a run, as written to summary.json.
struct RunSummary {
  std::string scheme;
  double avg_rate_bps_hz = 0.0;  // mean of the per-slot rates
  int iterations = 0;
  bool converged = false;
  double hor_energy_avg_w = 0.0;
  double ver_energy_avg_w = 0.0;
  double final_interference_max_w = 0.0;
};

RunSummary summarize(const RunReport& r);

/// Per-slot table with a `# schema=1` comment line, numbers in %.12g.
void write_trajectory_csv(std::ostream& out, const RunReport& r);
/// One row per outer iteration.
void write_convergence_csv(std::ostream& out, const RunReport& r);
/// Fixed summary keys plus the scenario layout the plots need.
std::string summary_json(const RunReport& r);

/// Writes trajectory.csv, convergence.csv and summary.json into `dir`,
/// creating it if needed. Throws std::runtime_error on I/O failure.
void write_run(const std::string& dir, const RunReport& r);

/// Schedule, power and route read back from trajectory.csv. Velocities and
/// angles are rebuilt from the waypoints. Throws std::runtime_error when a
/// column is missing or a row is malformed.
DecisionVariables read_trajectory_csv(std::istream& in, double delta_t);

/// Aggregate of a sweep: param value, scheme, average rate, converged.
void write_rates_csv(std::ostream& out, const std::vector<SweepCell>& cells);

void write_tradeoff_csv(std::ostream& out,
                        const std::vector<TradeoffSample>& samples);

} // namespace uavcrn
