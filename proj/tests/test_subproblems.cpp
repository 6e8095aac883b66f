#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracle.hpp"
#include "uavcrn/subproblems.hpp"

using namespace uavcrn;

namespace {

// Short horizon with loose kinematics and budgets so that arbitrary waypoints
// are feasible; only the block under test is constrained.
Scenario toy(int N, const std::vector<Eigen::Vector2d>& users) {
  Scenario sc = Scenario::table2();
  sc.set_horizon(N);
  sc.users.clear();
  for (const auto& u : users) {
    sc.users.push_back({u, NodeKind::CognitiveUser});
  }
  sc.V_max = 1e3;
  sc.a_max = 1e3;
  sc.Vhat_max = 1e3;
  sc.P_hor_ave = 1e9;
  sc.P_ver_ave = 1e9;
  return sc;
}

DecisionVariables place(const Scenario& sc, const std::vector<Eigen::Vector2d>& q, double z, double power) {
  DecisionVariables dv(sc.R(), sc.N);
  for (int n = 0; n < sc.N; ++n) {
    dv.q.col(n) = q[n];
  }
  dv.z.setConstant(z);
  dv.power.setConstant(power);
  dv.schedule.setConstant(1.0 / sc.R());
  dv.refresh_kinematics(sc.delta_t);
  refresh_angles(dv, sc);
  return dv;
}

Eigen::MatrixXd oracle_rates(const DecisionVariables& dv, const Scenario& sc) {
  Eigen::MatrixXd r(sc.R(), sc.N);
  for (int u = 0; u < sc.R(); ++u) {
    for (int n = 0; n < sc.N; ++n) {
      r(u, n) = static_cast<double>(oracle::lower_bound_rate(sc, dv.q.col(n), dv.z(n), sc.users[u].w, dv.power(n), false));
    }
  }
  return r;
}

} // namespace

TEST_CASE("scheduling picks the best user per slot") {
  // User 2 is under slot 0, user 1 under slot 1; the route closes at slot 2.
  const Eigen::Vector2d u1(0, 0), u2(150, 0);
  Scenario sc = toy(3, {u1, u2});
  DecisionVariables dv = place(sc, {u2, u1, u2}, 50, 0.1);
  const BlockResult res = solve_scheduling(dv, sc);
  const oracle::ScheduleResult ref = oracle::brute_force_schedule(oracle_rates(dv, sc));
  CHECK(objective(res.dv, sc) == doctest::Approx(ref.value).epsilon(1e-9));
  CHECK(res.dv.schedule(1, 0) == doctest::Approx(1.0));
  CHECK(res.dv.schedule(0, 1) == doctest::Approx(1.0));
  CHECK(is_binary(res.dv.schedule, 1e-6));

  Scenario one = toy(3, {u1});
  DecisionVariables d1 = place(one, {u2, u1, u2}, 50, 0.1);
  d1.schedule.setConstant(0.5);
  CHECK(solve_scheduling(d1, one).dv.schedule.isOnes(1e-6));
}

TEST_CASE("binarize ties to the lowest index") {
  Eigen::MatrixXd w(3, 2);
  w << 0.4, 0.2, 0.4, 0.5, 0.2, 0.3;
  const Eigen::MatrixXd b = binarize_schedule(w);
  CHECK(b(0, 0) == 1.0);
  CHECK(b(1, 1) == 1.0);
  CHECK(b.sum() == 2.0);
  CHECK(is_binary(b));
  CHECK_FALSE(is_binary(w));
}

TEST_CASE("power with the average limit binding") {
  const Eigen::Vector2d u(0, 0);
  Scenario sc = toy(2, {u});
  sc.Gamma = 1.0; // not binding
  DecisionVariables dv = place(sc, {u, u}, 50, 0.05);
  dv.schedule.setOnes();
  const BlockResult res = solve_power(dv, sc);
  CHECK(res.accepted);
  CHECK(res.dv.power.mean() == doctest::Approx(0.1).epsilon(1e-5));
}

TEST_CASE("power with the interference limit binding") {
  const Eigen::Vector2d u(0, 0);
  Scenario sc = toy(2, {u});
  sc.primary.w = {60, 0};
  DecisionVariables dv = place(sc, {u, u}, 50, 1e-9);
  dv.schedule.setOnes();
  const double c = static_cast<double>(oracle::interference(sc, u, 50, 1.0, false));
  sc.Gamma = 0.03 * c; // caps P at 0.03 W in both slots
  const BlockResult res = solve_power(dv, sc);
  CHECK(res.accepted);
  CHECK(res.dv.power(0) == doctest::Approx(0.03).epsilon(1e-4));
  CHECK(res.dv.power(1) == doctest::Approx(0.03).epsilon(1e-4));
  CHECK(feasibility_audit(res.dv, sc, 1e-6).residual("interference") <= 0.0);
}

TEST_CASE("power matches the grid") {
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> xy(0, 300), z(30, 100);
  for (int k = 0; k < 3; ++k) {
    Scenario sc = toy(3, {{xy(gen), xy(gen)}, {xy(gen), xy(gen)}});
    Eigen::Vector2d a(xy(gen), xy(gen)), b(xy(gen), xy(gen));
    DecisionVariables dv = place(sc, {a, b, a}, z(gen), 0.01);
    dv.schedule = binarize_schedule(oracle_rates(dv, sc));
    // Cap interference in the middle slot below P_ave.
    sc.Gamma = 0.06 * static_cast<double>(oracle::interference(sc, b, dv.z(1), 1.0, false));
    // Start from a feasible point: half the cap where it is below 0.01 W.
    for (int n = 0; n < sc.N; ++n) {
      const double cap = sc.Gamma / static_cast<double>(oracle::interference(sc, dv.q.col(n), dv.z(n), 1.0, false));
      dv.power(n) = std::min(dv.power(n), 0.5 * cap);
    }
    const BlockResult res = solve_power(dv, sc);
    const oracle::PowerResult ref = oracle::grid_search_power(dv, sc, 1e-3);
    CHECK((res.dv.power - ref.power).cwiseAbs().maxCoeff() <= 1e-3 + 1e-6);
    CHECK(objective(res.dv, sc) >= ref.value - 1e-9);
  }
}

TEST_CASE("horizontal step from the circle") {
  const Scenario sc = Scenario::table2();
  const DecisionVariables dv = init_solution(sc);
  BlockOptions opt;
  const BlockResult a = solve_scheduling(dv, sc, opt);
  const BlockResult p = solve_power(a.dv, sc, opt);
  const double before = objective(p.dv, sc);
  const BlockResult h = solve_horizontal(p.dv, sc, opt);
  CHECK(h.accepted);
  CHECK(objective(h.dv, sc) > before);
  CHECK(oracle::objective(h.dv, sc) > before);
  CHECK(feasibility_audit(h.dv, sc, 1e-6).feasible());
  CHECK(h.surrogate <= objective(h.dv, sc) + 1e-9);

  const BlockResult v = solve_vertical(h.dv, sc, opt);
  CHECK(objective(v.dv, sc) >= objective(h.dv, sc) - 1e-7);
  CHECK(feasibility_audit(v.dv, sc, 1e-6).feasible());
}

TEST_CASE("hover-only budget keeps the route still") {
  Scenario sc = Scenario::table2();
  sc.set_horizon(20);
  sc.P_hor_ave = sc.rp.P0 + sc.rp.P1 + 1e-3;
  DecisionVariables dv = init_solution(sc);
  // Start from a hover at the first waypoint, which meets the budget.
  for (int n = 0; n < sc.N; ++n) {
    dv.q.col(n) = dv.q.col(0);
  }
  dv.refresh_kinematics(sc.delta_t);
  refresh_angles(dv, sc);
  REQUIRE(feasibility_audit(dv, sc, 1e-6).feasible());
  const BlockResult h = solve_horizontal(dv, sc);
  CHECK(feasibility_audit(h.dv, sc, 1e-6).feasible());
  CHECK(h.dv.v_xy.colwise().norm().maxCoeff() < 1.0);
  CHECK(objective(h.dv, sc) >= objective(dv, sc) - 1e-7);
}

TEST_CASE("fixed altitude box") {
  Scenario sc = Scenario::table2();
  sc.set_horizon(20);
  sc.H_min = sc.H_max = 30;
  const DecisionVariables dv = init_solution(sc);
  const BlockResult v = solve_vertical(dv, sc);
  CHECK((v.dv.z.array() == 30.0).all());
  CHECK(objective(v.dv, sc) == objective(dv, sc));
}

TEST_CASE("altitude rises away from a lone user") {
  Scenario sc = Scenario::table2();
  sc.set_horizon(30);
  sc.users = {{Eigen::Vector2d(500, 500), NodeKind::CognitiveUser}};
  sc.primary.w = {-2000, -2000};
  sc.P_ver_ave = 1000;
  DecisionVariables dv = init_solution(sc);
  // Hover 300 m to the side, where the elevation angle is poor.
  for (int n = 0; n < sc.N; ++n) {
    dv.q.col(n) = Eigen::Vector2d(200, 500);
  }
  dv.schedule.setOnes();
  dv.power.setConstant(sc.P_ave);
  dv.refresh_kinematics(sc.delta_t);
  refresh_angles(dv, sc);
  REQUIRE(feasibility_audit(dv, sc, 1e-6).feasible());
  const double z0 = dv.z.mean();
  const BlockResult v = solve_vertical(dv, sc);
  CHECK(v.accepted);
  CHECK(v.dv.z.maxCoeff() > z0 + 1.0);
  CHECK(objective(v.dv, sc) > objective(dv, sc));
}
