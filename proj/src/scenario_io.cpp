#include "uavcrn/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace uavcrn {

using nlohmann::json;

ScenarioError::ScenarioError(const std::string& source, int line,
                             const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : "") +
                         ": " + what),
      line_(line) {}

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  int line = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    line += text[i] == '\n' ? 1 : 0;
  }
  return line;
}

class Reader {
 public:
  Reader(const std::string& text, const std::string& source)
      : text_(text), source_(source) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    int line = 0;
    const std::size_t at = text_.find("\"" + key + "\"");
    if (at != std::string::npos) {
      line = line_of_offset(text_, at);
    }
    throw ScenarioError(source_, line, key.empty() ? what : key + ": " + what);
  }

  void only_keys(const json& obj, const std::set<std::string>& allowed,
                 const std::string& where) const {
    if (!obj.is_object()) {
      fail(where, "expected an object");
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) {
        fail(it.key(), "unknown key" + (where.empty() ? "" : " in " + where));
      }
    }
  }

  double number(const json& obj, const std::string& key) const {
    if (!obj.contains(key)) {
      fail(key, "missing");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
      fail(key, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(key, "not finite");
    }
    return d;
  }

  double number_or(const json& obj, const std::string& key, double def) const {
    return obj.contains(key) ? number(obj, key) : def;
  }

  Eigen::VectorXd vec(const json& v, const std::string& key, int n) const {
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
      fail(key, "expected an array of " + std::to_string(n) + " numbers");
    }
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
      if (!v[i].is_number()) {
        fail(key, "expected numbers");
      }
      out[i] = v[i].get<double>();
    }
    return out;
  }

  // Exactly one of the alternatives must be present; returns its index.
  int pick(const json& obj, const std::vector<std::string>& keys) const {
    int found = -1;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (obj.contains(keys[i])) {
        if (found >= 0) {
          fail(keys[i], "conflicts with " + keys[found]);
        }
        found = static_cast<int>(i);
      }
    }
    if (found < 0) {
      fail("", "one of " + keys.front() + " / " + keys.back() + " is required");
    }
    return found;
  }

 private:
  const std::string& text_;
  const std::string& source_;
};

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(source, line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0),
                        "malformed JSON");
  }
  const Reader rd(text, source);
  rd.only_keys(j,
               {"schema", "start_m", "users_m", "primary_m", "T_s", "delta_t_s",
                "H_min_m", "H_max_m", "V_max_mps", "Vhat_max_mps", "a_max_mps2",
                "ahat_max_mps2", "P_max_w", "P_ave_w", "Gamma_db", "Gamma_ref",
                "Gamma_w", "P_hor_ave_w", "P_ver_ave_w", "channel", "rotor",
                "epsilon", "max_outer_iters", "comment"},
               "");
  if (j.contains("schema") && rd.number(j, "schema") != 1.0) {
    rd.fail("schema", "only schema 1 is supported");
  }
  Scenario sc;
  if (!j.contains("start_m")) {
    rd.fail("start_m", "missing");
  }
  const Eigen::VectorXd s = rd.vec(j["start_m"], "start_m", 3);
  sc.start = {s.head<2>(), s[2]};
  if (!j.contains("users_m") || !j["users_m"].is_array()) {
    rd.fail("users_m", "expected an array of [x, y] pairs");
  }
  sc.users.clear();
  for (const auto& u : j["users_m"]) {
    sc.users.push_back({rd.vec(u, "users_m", 2), NodeKind::CognitiveUser});
  }
  if (!j.contains("primary_m")) {
    rd.fail("primary_m", "missing");
  }
  sc.primary = {rd.vec(j["primary_m"], "primary_m", 2), NodeKind::PrimaryUser};

  sc.delta_t = rd.number_or(j, "delta_t_s", sc.delta_t);
  sc.T = rd.number(j, "T_s");
  const double slots = sc.T / sc.delta_t;
  if (!(sc.delta_t > 0.0) || std::abs(slots - std::round(slots)) > 1e-9 * slots) {
    rd.fail("T_s", "must be a positive multiple of delta_t_s");
  }
  sc.N = static_cast<int>(std::lround(slots));
  sc.H_min = rd.number(j, "H_min_m");
  sc.H_max = rd.number(j, "H_max_m");
  sc.V_max = rd.number(j, "V_max_mps");
  sc.Vhat_max = rd.number(j, "Vhat_max_mps");
  sc.a_max = rd.number(j, "a_max_mps2");
  if (j.contains("ahat_max_mps2") && !j["ahat_max_mps2"].is_null()) {
    sc.ahat_max = rd.number(j, "ahat_max_mps2");
  }
  sc.P_max = rd.number(j, "P_max_w");
  sc.P_ave = rd.number(j, "P_ave_w");
  if (rd.pick(j, {"Gamma_db", "Gamma_w"}) == 0) {
    const double db = rd.number(j, "Gamma_db");
    const std::string ref = j.value("Gamma_ref", std::string("dBW"));
    if (ref == "dBW") {
      sc.Gamma = db_to_linear(db);
    } else if (ref == "dBm") {
      sc.Gamma = dbm_to_watts(db);
    } else {
      rd.fail("Gamma_ref", "expected \"dBW\" or \"dBm\"");
    }
  } else {
    sc.Gamma = rd.number(j, "Gamma_w");
  }
  sc.P_hor_ave = rd.number(j, "P_hor_ave_w");
  sc.P_ver_ave = rd.number(j, "P_ver_ave_w");
  sc.epsilon = rd.number_or(j, "epsilon", sc.epsilon);
  if (j.contains("max_outer_iters")) {
    const json& m = j["max_outer_iters"];
    if (!m.is_number_integer()) {
      rd.fail("max_outer_iters", "expected an integer");
    }
    sc.max_outer_iters = m.get<int>();
  }

  if (!j.contains("channel")) {
    rd.fail("channel", "missing");
  }
  const json& c = j["channel"];
  rd.only_keys(c,
               {"a", "b_per_deg", "rho0_db", "rho0", "mu_db", "mu", "alpha_L",
                "alpha_N", "sigma2_dbm", "sigma2_w"},
               "channel");
  sc.cp.a = rd.number(c, "a");
  sc.cp.b = rd.number(c, "b_per_deg");
  sc.cp.rho0 = rd.pick(c, {"rho0_db", "rho0"}) == 0
                   ? db_to_linear(rd.number(c, "rho0_db"))
                   : rd.number(c, "rho0");
  sc.cp.mu = rd.pick(c, {"mu_db", "mu"}) == 0 ? db_to_linear(rd.number(c, "mu_db"))
                                              : rd.number(c, "mu");
  sc.cp.alpha_L = rd.number(c, "alpha_L");
  sc.cp.alpha_N = rd.number(c, "alpha_N");
  sc.cp.sigma2 = rd.pick(c, {"sigma2_dbm", "sigma2_w"}) == 0
                     ? dbm_to_watts(rd.number(c, "sigma2_dbm"))
                     : rd.number(c, "sigma2_w");

  if (j.contains("rotor")) {
    const json& r = j["rotor"];
    rd.only_keys(r,
                 {"P0_w", "P1_w", "U_tip_mps", "d0", "rho_kgpm3", "s", "A_m2",
                  "v0_mps", "weight_n"},
                 "rotor");
    sc.rp.P0 = rd.number_or(r, "P0_w", sc.rp.P0);
    sc.rp.P1 = rd.number_or(r, "P1_w", sc.rp.P1);
    sc.rp.U_tip = rd.number_or(r, "U_tip_mps", sc.rp.U_tip);
    sc.rp.d0 = rd.number_or(r, "d0", sc.rp.d0);
    sc.rp.rho = rd.number_or(r, "rho_kgpm3", sc.rp.rho);
    sc.rp.s = rd.number_or(r, "s", sc.rp.s);
    sc.rp.A = rd.number_or(r, "A_m2", sc.rp.A);
    sc.rp.v0 = rd.number_or(r, "v0_mps", sc.rp.v0);
    sc.rp.weight = rd.number_or(r, "weight_n", sc.rp.weight);
  }
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(source, 0, e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError(path, 0, "cannot open file");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["schema"] = 1;
  j["start_m"] = {sc.start.q.x(), sc.start.q.y(), sc.start.z};
  json users = json::array();
  for (const auto& u : sc.users) {
    users.push_back({u.w.x(), u.w.y()});
  }
  j["users_m"] = users;
  j["primary_m"] = {sc.primary.w.x(), sc.primary.w.y()};
  j["T_s"] = sc.T;
  j["delta_t_s"] = sc.delta_t;
  j["H_min_m"] = sc.H_min;
  j["H_max_m"] = sc.H_max;
  j["V_max_mps"] = sc.V_max;
  j["Vhat_max_mps"] = sc.Vhat_max;
  j["a_max_mps2"] = sc.a_max;
  j["ahat_max_mps2"] = sc.ahat_max ? json(*sc.ahat_max) : json(nullptr);
  j["P_max_w"] = sc.P_max;
  j["P_ave_w"] = sc.P_ave;
  j["Gamma_w"] = sc.Gamma;
  j["P_hor_ave_w"] = sc.P_hor_ave;
  j["P_ver_ave_w"] = sc.P_ver_ave;
  j["channel"] = {{"a", sc.cp.a},           {"b_per_deg", sc.cp.b},
                  {"rho0", sc.cp.rho0},     {"mu", sc.cp.mu},
                  {"alpha_L", sc.cp.alpha_L}, {"alpha_N", sc.cp.alpha_N},
                  {"sigma2_w", sc.cp.sigma2}};
  j["rotor"] = {{"P0_w", sc.rp.P0},        {"P1_w", sc.rp.P1},
                {"U_tip_mps", sc.rp.U_tip}, {"d0", sc.rp.d0},
                {"rho_kgpm3", sc.rp.rho},  {"s", sc.rp.s},
                {"A_m2", sc.rp.A},         {"v0_mps", sc.rp.v0},
                {"weight_n", sc.rp.weight}};
  j["epsilon"] = sc.epsilon;
  j["max_outer_iters"] = sc.max_outer_iters;
  return j.dump(2) + "\n";
}

std::string scenario_digest(const Scenario& sc) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : scenario_to_json(sc)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace uavcrn
