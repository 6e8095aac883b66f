#include "uavcrn/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "uavcrn/energy.hpp"
#include "uavcrn/model.hpp"
#include "uavcrn/scenario_io.hpp"

namespace uavcrn {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int scheduled_user(const DecisionVariables& dv, int n) {
  int best = 0;
  for (int r = 1; r < dv.users(); ++r) {
    if (dv.schedule(r, n) > dv.schedule(best, n)) {
      best = r;
    }
  }
  return best;
}

Eigen::VectorXd slot_rates(const RunReport& r) {
  const LosModel model = SchemeConfig::of(r.scheme).los_model();
  const Eigen::MatrixXd rates = lower_bound_rates(r.solution, r.scenario, model);
  return r.solution.schedule.cwiseProduct(rates).colwise().sum().transpose();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) {
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == sep) {
    out.emplace_back();
  }
  return out;
}

} // namespace

RunSummary summarize(const RunReport& r) {
  RunSummary s;
  s.scheme = to_string(r.scheme);
  const Eigen::VectorXd rates = slot_rates(r);
  s.avg_rate_bps_hz = rates.size() > 0 ? rates.mean() : 0.0;
  s.iterations = static_cast<int>(r.records.size());
  s.converged = r.converged;
  const BudgetReport b = budget_check(r.solution, r.scenario.rp,
                                      r.scenario.P_hor_ave, r.scenario.P_ver_ave);
  s.hor_energy_avg_w = b.horizontal_average;
  s.ver_energy_avg_w = b.vertical_average;
  const LosModel model = SchemeConfig::of(r.scheme).los_model();
  s.final_interference_max_w =
      interference_profile(r.solution, r.scenario, model).maxCoeff();
  return s;
}

void write_trajectory_csv(std::ostream& out, const RunReport& r) {
  const DecisionVariables& dv = r.solution;
  const Scenario& sc = r.scenario;
  const LosModel model = SchemeConfig::of(r.scheme).los_model();
  const int R = dv.users();
  const Eigen::VectorXd rates = slot_rates(r);
  const Eigen::VectorXd interf = interference_profile(dv, sc, model);

  out << "# schema=1\n";
  out << "n,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps,power_w,scheduled_user";
  for (int u = 1; u <= R; ++u) {
    out << ",A_U" << u;
  }
  for (int u = 1; u <= R; ++u) {
    out << ",theta_U" << u << "_deg";
  }
  out << ",theta_D_deg";
  for (int u = 1; u <= R; ++u) {
    out << ",pL_U" << u;
  }
  out << ",pL_D,rate_bps_hz,interference_w\n";
  for (int n = 0; n < dv.slots(); ++n) {
    const AirPosition p{dv.q.col(n), dv.z(n)};
    out << n << ',' << num(dv.q(0, n)) << ',' << num(dv.q(1, n)) << ','
        << num(dv.z(n)) << ',' << num(dv.v_xy(0, n)) << ','
        << num(dv.v_xy(1, n)) << ',' << num(dv.v_z(n)) << ','
        << num(dv.power(n)) << ',' << scheduled_user(dv, n) + 1;
    for (int u = 0; u < R; ++u) {
      out << ',' << num(dv.schedule(u, n));
    }
    for (int u = 0; u < R; ++u) {
      out << ',' << num(elevation_angle_deg(p, sc.users[u]));
    }
    out << ',' << num(elevation_angle_deg(p, sc.primary));
    for (int u = 0; u < R; ++u) {
      out << ',' << num(link_los_probability(p, sc.users[u], sc.cp, model));
    }
    out << ',' << num(link_los_probability(p, sc.primary, sc.cp, model)) << ','
        << num(rates(n)) << ',' << num(interf(n)) << '\n';
  }
}

void write_convergence_csv(std::ostream& out, const RunReport& r) {
  out << "# schema=1\n";
  out << "iteration,objective,after_scheduling,after_power,after_horizontal,"
         "after_vertical,max_residual,wall_time_s\n";
  out << 0 << ',' << num(r.initial_objective) << ",,,,,,0\n";
  for (const IterationRecord& rec : r.records) {
    out << rec.index << ',' << num(rec.objective) << ','
        << num(rec.after_scheduling) << ',' << num(rec.after_power) << ','
        << num(rec.after_horizontal) << ',' << num(rec.after_vertical) << ','
        << num(rec.max_residual) << ',' << num(rec.wall_time_s) << '\n';
  }
}

std::string summary_json(const RunReport& r) {
  using nlohmann::json;
  const RunSummary s = summarize(r);
  const Scenario& sc = r.scenario;
  json j;
  j["schema"] = 1;
  j["scheme"] = s.scheme;
  j["avg_rate_bps_hz"] = s.avg_rate_bps_hz;
  j["iterations"] = s.iterations;
  j["converged"] = s.converged;
  j["hor_energy_avg_w"] = s.hor_energy_avg_w;
  j["ver_energy_avg_w"] = s.ver_energy_avg_w;
  j["final_interference_max_w"] = s.final_interference_max_w;
  j["outcome"] = to_string(r.outcome);
  j["initial_objective"] = r.initial_objective;
  j["binarized"] = r.binarized;
  j["wall_time_s"] = r.wall_time_s;
  j["scenario_digest"] = scenario_digest(sc);
  j["N"] = sc.N;
  j["T_s"] = sc.T;
  j["Gamma_w"] = sc.Gamma;
  j["start_m"] = {sc.start.q.x(), sc.start.q.y(), sc.start.z};
  json users = json::array();
  for (const auto& u : sc.users) {
    users.push_back({u.w.x(), u.w.y()});
  }
  j["users_m"] = users;
  j["primary_m"] = {sc.primary.w.x(), sc.primary.w.y()};
  if (!r.diagnostics.empty()) {
    j["diagnostics"] = r.diagnostics;
  }
  return j.dump(2) + "\n";
}

void write_run(const std::string& dir, const RunReport& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto emit = [&](const char* name, auto&& body) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream f(path);
    if (!f) {
      throw std::runtime_error("cannot write " + path.string());
    }
    body(f);
    if (!f) {
      throw std::runtime_error("write failed: " + path.string());
    }
  };
  emit("trajectory.csv", [&](std::ostream& f) { write_trajectory_csv(f, r); });
  emit("convergence.csv", [&](std::ostream& f) { write_convergence_csv(f, r); });
  emit("summary.json", [&](std::ostream& f) { f << summary_json(r); });
}

DecisionVariables read_trajectory_csv(std::istream& in, double delta_t) {
  std::string line;
  std::map<std::string, int> col;
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const std::vector<std::string> cells = split(line, ',');
    if (col.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        col[cells[i]] = static_cast<int>(i);
      }
      continue;
    }
    if (cells.size() != col.size()) {
      throw std::runtime_error("trajectory.csv:" + std::to_string(line_no) +
                               ": expected " + std::to_string(col.size()) +
                               " cells");
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      std::istringstream ss(c);
      ss.imbue(std::locale::classic());
      double v = 0.0;
      if (!(ss >> v)) {
        throw std::runtime_error("trajectory.csv:" + std::to_string(line_no) +
                                 ": not a number: " + c);
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  auto need = [&](const std::string& name) {
    const auto it = col.find(name);
    if (it == col.end()) {
      throw std::runtime_error("trajectory.csv: missing column " + name);
    }
    return it->second;
  };
  int R = 0;
  while (col.count("A_U" + std::to_string(R + 1))) {
    ++R;
  }
  if (R == 0 || rows.empty()) {
    throw std::runtime_error("trajectory.csv: no users or no rows");
  }
  const int N = static_cast<int>(rows.size());
  DecisionVariables dv(R, N);
  const int cx = need("x_m"), cy = need("y_m"), cz = need("z_m"),
            cp = need("power_w");
  for (int n = 0; n < N; ++n) {
    dv.q(0, n) = rows[n][cx];
    dv.q(1, n) = rows[n][cy];
    dv.z(n) = rows[n][cz];
    dv.power(n) = rows[n][cp];
    for (int r = 0; r < R; ++r) {
      dv.schedule(r, n) = rows[n][need("A_U" + std::to_string(r + 1))];
    }
  }
  dv.refresh_kinematics(delta_t);
  return dv;
}

void write_rates_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "# schema=1\n";
  out << "param,value,scheme,avg_rate_bps_hz,converged,outcome,from_warm,error\n";
  for (const SweepCell& c : cells) {
    std::string err = c.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') {
        ch = ' ';
      }
    }
    const bool ok = c.error.empty();
    out << to_string(c.param) << ',' << num(c.value) << ','
        << to_string(c.scheme) << ','
        << (ok ? num(summarize(c.report).avg_rate_bps_hz) : std::string("nan"))
        << ',' << (ok && c.report.converged ? 1 : 0) << ','
        << (ok ? to_string(c.report.outcome) : std::string("error")) << ','
        << (c.from_warm ? 1 : 0) << ',' << err << '\n';
  }
}

void write_tradeoff_csv(std::ostream& out,
                        const std::vector<TradeoffSample>& samples) {
  out << "# schema=1\n";
  out << "plan,altitude_m,slot,x_m,y_m,theta_deg,pL,rate_los_bps_hz,"
         "expected_rate_bps_hz,lower_bound_bps_hz\n";
  for (const TradeoffSample& s : samples) {
    out << s.plan << ',' << num(s.altitude) << ',' << s.slot << ','
        << num(s.q.x()) << ',' << num(s.q.y()) << ',' << num(s.theta_deg) << ','
        << num(s.p_los) << ',' << num(s.rate_los) << ','
        << num(s.expected_rate) << ',' << num(s.lower_bound) << '\n';
  }
}

} // namespace uavcrn
