#pragma once

#include <stdexcept>
#include <string>

#include "uavcrn/model.hpp"

namespace uavcrn {

/// Malformed or invalid scenario text. `line` is 1-based, 0 when unknown.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Parses the JSON scenario format. Every key carries its unit in the name
/// (start_m, V_max_mps, P_ave_w, Gamma_db, ...). Unknown keys are rejected so
/// typos do not silently fall back to defaults.
Scenario parse_scenario(const std::string& text,
                        const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);

/// Serializes with the same keys; parse_scenario(to_json(sc)) == sc.
std::string scenario_to_json(const Scenario& sc);

/// Short hex digest of the serialized scenario.
std::string scenario_digest(const Scenario& sc);

} // namespace uavcrn
