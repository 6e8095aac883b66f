#include "uavcrn/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace uavcrn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string("scenario: ") + what);
  }
}

bool finite2(const Eigen::Vector2d& v) { return v.allFinite(); }

void check_dims(const DecisionVariables& dv, const Scenario& sc) {
  dv.check_dimensions();
  if (dv.slots() != sc.N || dv.users() != sc.R()) {
    throw std::invalid_argument("decision variables do not match scenario");
  }
}

} // namespace

void Scenario::validate() const {
  require(!users.empty(), "need at least one cognitive user");
  for (const auto& u : users) {
    require(finite2(u.w), "non-finite user position");
  }
  require(finite2(primary.w), "non-finite primary position");
  require(finite2(start.q) && std::isfinite(start.z), "non-finite start");
  require(N >= 2, "need at least two slots");
  require(delta_t > 0.0 && T > 0.0, "T and delta_t must be positive");
  require(std::abs(N * delta_t - T) <= 1e-9 * T, "N * delta_t must equal T");
  require(H_min > 0.0 && H_min <= H_max, "need 0 < H_min <= H_max");
  require(start.z >= H_min && start.z <= H_max, "start altitude outside box");
  require(V_max > 0.0 && Vhat_max > 0.0 && a_max > 0.0,
          "speed and acceleration limits must be positive");
  require(!ahat_max || *ahat_max > 0.0, "vertical acceleration must be positive");
  require(P_max > 0.0 && P_ave > 0.0 && P_ave <= P_max,
          "need 0 < P_ave <= P_max");
  require(Gamma >= 0.0, "Gamma must be nonnegative");
  require(P_hor_ave > 0.0 && P_ver_ave >= 0.0, "energy budgets out of range");
  require(epsilon > 0.0, "epsilon must be positive");
  require(max_outer_iters >= 1, "max_outer_iters must be at least 1");
  cp.validate();
  rp.validate();
}

Scenario Scenario::table2() {
  Scenario sc;
  sc.start.q = Eigen::Vector2d(336.0, 187.0);
  sc.start.z = 30.0;
  for (auto [x, y] : {std::pair{162.0, 23.0}, {112.0, 301.0}, {332.0, 50.0},
                      {298.0, 381.0}}) {
    sc.users.push_back({Eigen::Vector2d(x, y), NodeKind::CognitiveUser});
  }
  sc.primary = {Eigen::Vector2d(200.0, 360.0), NodeKind::PrimaryUser};
  sc.T = 70.0;
  sc.delta_t = 1.0;
  sc.N = 70;
  sc.Gamma = db_to_linear(-121.0);
  sc.cp = ChannelParams::from_db(11.95, 0.14, -60.0, -20.0, 2.2, 3.5, -100.0);
  return sc;
}

void Scenario::set_horizon(double T_s) {
  require(T_s > 0.0, "T must be positive");
  N = static_cast<int>(std::lround(T_s / delta_t));
  T = N * delta_t;
  require(std::abs(T - T_s) <= 1e-9 * T_s, "T must be a multiple of delta_t");
  T = T_s;
}

Eigen::MatrixXd lower_bound_rates(const DecisionVariables& dv,
                                  const Scenario& sc, LosModel model) {
  check_dims(dv, sc);
  Eigen::MatrixXd out(sc.R(), sc.N);
  for (int n = 0; n < sc.N; ++n) {
    const AirPosition p{dv.q.col(n), dv.z(n)};
    for (int r = 0; r < sc.R(); ++r) {
      out(r, n) = lower_bound_rate(dv.power(n), p, sc.users[r], sc.cp, model);
    }
  }
  return out;
}

double objective(const DecisionVariables& dv, const Scenario& sc,
                 LosModel model) {
  const Eigen::MatrixXd rates = lower_bound_rates(dv, sc, model);
  return rates.cwiseProduct(dv.schedule).sum() / sc.N;
}

Eigen::VectorXd interference_coefficients(const DecisionVariables& dv,
                                          const Scenario& sc,
                                          LosModel model) {
  check_dims(dv, sc);
  Eigen::VectorXd c(sc.N);
  for (int n = 0; n < sc.N; ++n) {
    c[n] = interference_coefficient({dv.q.col(n), dv.z(n)}, sc.primary, sc.cp,
                                    model);
  }
  return c;
}

Eigen::VectorXd interference_profile(const DecisionVariables& dv,
                                     const Scenario& sc, LosModel model) {
  return interference_coefficients(dv, sc, model).cwiseProduct(dv.power);
}

bool AuditReport::feasible() const { return max_residual() <= tol; }

double AuditReport::max_residual() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries) {
    m = std::max(m, e.residual);
  }
  return m;
}

double AuditReport::residual(const std::string& family) const {
  for (const auto& e : entries) {
    if (e.family == family) {
      return e.residual;
    }
  }
  throw std::out_of_range("audit: no family " + family);
}

std::string AuditReport::describe() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << e.family << '[' << e.index << "]=" << e.residual
       << (e.residual > tol ? " VIOLATED" : "") << '\n';
  }
  return os.str();
}

AuditReport feasibility_audit(const DecisionVariables& dv, const Scenario& sc,
                              double tol, LosModel model) {
  check_dims(dv, sc);
  AuditReport rep;
  rep.tol = tol;
  const int N = sc.N;
  const double ninf = -std::numeric_limits<double>::infinity();
  auto family = [&](const char* name) -> AuditEntry& {
    rep.entries.push_back({name, -1, ninf});
    return rep.entries.back();
  };
  auto note = [](AuditEntry& e, int idx, double r) {
    if (r > e.residual) {
      e.residual = r;
      e.index = idx;
    }
  };

  {
    auto& e = family("power_box");
    for (int n = 0; n < N; ++n) {
      note(e, n, std::max(-dv.power(n), dv.power(n) - sc.P_max));
    }
  }
  {
    auto& e = family("average_power");
    note(e, -1, std::max(dv.power.mean() - sc.P_ave, -dv.power.mean()));
  }
  {
    const BudgetReport b = budget_check(dv, sc.rp, sc.P_hor_ave, sc.P_ver_ave);
    note(family("horizontal_energy"), -1, -b.horizontal_margin);
    note(family("vertical_energy"), -1, -b.vertical_margin);
  }
  {
    auto& e = family("cyclic_boundary");
    note(e, N - 1, (dv.q.col(N - 1) - dv.q.col(0)).norm());
    note(e, N - 1, std::abs(dv.z(N - 1) - dv.z(0)));
  }
  {
    auto& e = family("kinematics");
    for (int n = 0; n < N; ++n) {
      Eigen::Vector2d v = Eigen::Vector2d::Zero();
      double vz = 0.0;
      if (n + 1 < N) {
        v = (dv.q.col(n + 1) - dv.q.col(n)) / sc.delta_t;
        vz = (dv.z(n + 1) - dv.z(n)) / sc.delta_t;
      }
      note(e, n, (dv.v_xy.col(n) - v).norm());
      note(e, n, std::abs(dv.v_z(n) - vz));
    }
  }
  {
    auto& e = family("horizontal_speed");
    for (int n = 0; n < N; ++n) {
      note(e, n, dv.v_xy.col(n).norm() - sc.V_max);
    }
  }
  {
    auto& e = family("horizontal_acceleration");
    note(e, -1, ninf);
    for (int n = 0; n + 2 < N; ++n) {
      note(e, n,
           (dv.v_xy.col(n + 1) - dv.v_xy.col(n)).norm() -
               sc.a_max * sc.delta_t);
    }
  }
  {
    auto& e = family("vertical_speed");
    for (int n = 0; n < N; ++n) {
      note(e, n, std::abs(dv.v_z(n)) - sc.Vhat_max);
    }
  }
  if (sc.ahat_max) {
    auto& e = family("vertical_acceleration");
    for (int n = 0; n + 2 < N; ++n) {
      note(e, n,
           std::abs(dv.v_z(n + 1) - dv.v_z(n)) - *sc.ahat_max * sc.delta_t);
    }
  }
  {
    auto& e = family("altitude_box");
    for (int n = 0; n < N; ++n) {
      note(e, n, std::max(sc.H_min - dv.z(n), dv.z(n) - sc.H_max));
    }
  }
  {
    auto& e = family("scheduling");
    for (int n = 0; n < N; ++n) {
      note(e, n, dv.schedule.col(n).sum() - 1.0);
      note(e, n, -dv.schedule.col(n).minCoeff());
      note(e, n, dv.schedule.col(n).maxCoeff() - 1.0);
    }
  }
  {
    auto& e = family("interference");
    const Eigen::VectorXd I = interference_profile(dv, sc, model);
    for (int n = 0; n < N; ++n) {
      const double r = sc.Gamma > 0.0 ? (I[n] - sc.Gamma) / sc.Gamma
                       : I[n] > 0.0   ? std::numeric_limits<double>::infinity()
                                      : 0.0;
      note(e, n, r);
    }
  }
  for (auto& e : rep.entries) {
    if (e.residual == ninf) {
      e.residual = 0.0;
    }
  }
  return rep;
}

void refresh_angles(DecisionVariables& dv, const Scenario& sc) {
  dv.theta_users.resize(sc.R(), sc.N);
  dv.theta_primary.resize(sc.N);
  dv.phi_primary.resize(sc.N);
  for (int n = 0; n < sc.N; ++n) {
    const AirPosition p{dv.q.col(n), dv.z(n)};
    for (int r = 0; r < sc.R(); ++r) {
      dv.theta_users(r, n) = elevation_angle_deg(p, sc.users[r]);
    }
    dv.theta_primary(n) = elevation_angle_deg(p, sc.primary);
    dv.phi_primary(n) = dv.theta_primary(n);
  }
}

InitialCircle initial_circle(const Scenario& sc) {
  if (sc.users.empty()) {
    throw std::invalid_argument("initial_circle: no users");
  }
  InitialCircle c;
  c.center.setZero();
  for (const auto& u : sc.users) {
    c.center += u.w;
  }
  c.center /= sc.R();
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& u : sc.users) {
    nearest = std::min(nearest, (c.center - u.w).norm());
  }
  c.radius = std::min(sc.V_max * sc.T / (2.0 * std::numbers::pi), nearest);
  // The closed route has N-1 moving slots, so the speed and turn-rate
  // limits can be slightly tighter than V_max T / 2 pi.
  const int legs = sc.N - 1;
  const double span = legs * sc.delta_t;
  double cap = sc.V_max * span / (2.0 * std::numbers::pi);
  if (legs >= 2) {
    const double chord = 2.0 * std::sin(std::numbers::pi / legs);
    // speed v = radius * chord / delta_t and |dv| = v * chord
    cap = std::min(cap, sc.V_max * sc.delta_t / chord);
    cap = std::min(cap, sc.a_max * sc.delta_t * sc.delta_t / (chord * chord));
  }
  if (c.radius >= cap) {
    c.radius = cap * (1.0 - 1e-6);
  }
  return c;
}

DecisionVariables init_solution(const Scenario& sc, LosModel model,
                                bool fixed_power) {
  sc.validate();
  const int N = sc.N;
  const int R = sc.R();
  DecisionVariables dv(R, N);
  const InitialCircle circle = initial_circle(sc);
  const Eigen::Vector2d off = sc.start.q - circle.center;
  const double phase = off.norm() > 0.0 ? std::atan2(off.y(), off.x()) : 0.0;
  const int legs = N - 1;
  for (int n = 0; n < legs; ++n) {
    const double ang = phase + 2.0 * std::numbers::pi * n / legs;
    dv.q.col(n) = circle.center +
                  circle.radius * Eigen::Vector2d(std::cos(ang), std::sin(ang));
  }
  dv.q.col(N - 1) = dv.q.col(0);
  dv.z.setConstant(sc.start.z);
  dv.refresh_kinematics(sc.delta_t);
  dv.schedule.setConstant(1.0 / R);
  dv.power.setConstant(sc.P_ave);
  if (!fixed_power) {
    const Eigen::VectorXd c = interference_coefficients(dv, sc, model);
    for (int n = 0; n < N; ++n) {
      if (c[n] * sc.P_ave > sc.Gamma) {
        dv.power(n) = sc.Gamma / c[n] * (1.0 - 1e-9);
      }
    }
  }
  refresh_angles(dv, sc);
  return dv;
}

} // namespace uavcrn
