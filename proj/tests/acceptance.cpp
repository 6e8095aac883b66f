// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oracle.hpp"
#include "uavcrn/driver.hpp"
#include "uavcrn/energy.hpp"
#include "uavcrn/experiments.hpp"
#include "uavcrn/report.hpp"
#include "uavcrn/sca.hpp"
#include "uavcrn/scenario_io.hpp"
#include "uavcrn/subproblems.hpp"

using namespace uavcrn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
  explicit Criterion(std::string n) : name(std::move(n)) {}

  std::string name;
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details.push_back("failed: " + what);
    }
  }
  void note(const std::string& what) { details.push_back(what); }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int g_failed = 0;
std::vector<oracle::OracleReport> g_reports;

void report(const Criterion& c) {
  std::printf("%s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str());
  for (const auto& d : c.details) {
    std::printf("    %s\n", d.c_str());
  }
  std::fflush(stdout);
  g_failed += c.pass ? 0 : 1;
}

void record(Criterion& c, const oracle::OracleReport& r) {
  g_reports.push_back(r);
  c.require(r.pass, r.case_id + fmt(" deviation %.3g", r.deviation));
}

// ---------------------------------------------------------------- hover

Criterion hover_identities() {
  Criterion c{"hover_identities"};
  std::mt19937 gen(101);
  std::uniform_real_distribution<double> scale(0.5, 2.0), down(-50.0, -1e-12);
  for (int k = 0; k < 100; ++k) {
    RotorcraftParams rp;
    if (k > 0) {
      rp.P0 *= scale(gen);
      rp.P1 *= scale(gen);
      rp.U_tip *= scale(gen);
      rp.v0 *= scale(gen);
      rp.weight *= scale(gen);
    }
    const double hover = horizontal_power(Eigen::Vector2d::Zero(), rp);
    c.require(hover == rp.P0 + rp.P1, fmt("hover power %.17g", hover));
    const double vz = down(gen);
    c.require(vertical_power(vz, rp) == 0.0, fmt("descent at %.6g m/s costs power", vz));
  }
  c.require(vertical_power(-0.0, RotorcraftParams{}) == 0.0, "descent at -0");
  c.note("P0 + P1 = " + fmt("%.2f W", RotorcraftParams{}.P0 + RotorcraftParams{}.P1));
  return c;
}

// ---------------------------------------------------------------- rate convexity

Criterion rate_convexity() {
  Criterion c{"rate_hessian_psd"};
  std::mt19937 gen(202);
  std::uniform_real_distribution<double> lx(-2, 2), ly(-3, 7), la(-3, 8);
  double worst_eig = INFINITY, worst_fd = 0.0;
  int bad_eig = 0, bad_fd = 0;
  for (int k = 0; k < 10000; ++k) {
    const double x = std::pow(10.0, lx(gen));
    const double y = std::pow(10.0, ly(gen));
    const double A = std::pow(10.0, la(gen));
    const sca::HessianCheck h = sca::lemma1_hessian_check(x, y, A);
    worst_eig = std::min(worst_eig, h.min_eigenvalue);
    bad_eig += h.min_eigenvalue >= -1e-9 ? 0 : 1;
    const auto f = [A](const Eigen::VectorXd& v) {
      return std::log2(1.0 + A / v[1]) / v[0];
    };
    const Eigen::MatrixXd fd = oracle::fd_hessian(f, Eigen::Vector2d(x, y), 1e-4);
    const Eigen::Matrix2d an = sca::lemma1_hessian(x, y, A);
    const double rel = (fd - an).cwiseAbs().maxCoeff() / an.cwiseAbs().maxCoeff();
    worst_fd = std::max(worst_fd, rel);
    bad_fd += rel <= 1e-4 ? 0 : 1;
  }
  c.require(bad_eig == 0, std::to_string(bad_eig) + " triples below -1e-9");
  c.require(bad_fd == 0, std::to_string(bad_fd) + " triples off the finite-difference Hessian");
  c.note("10000 triples, smallest eigenvalue " + fmt("%.3g", worst_eig) +
         ", worst relative Hessian gap " + fmt("%.3g", worst_fd));
  record(c, oracle::compare("rate_fd_hessian_worst", 0.0, worst_fd, 1e-4));
  return c;
}

// ---------------------------------------------------------------- surrogates

using Vec = Eigen::VectorXd;

// A first-order surrogate of `target`, expanded at the point `k` carries.
// Every case is a global lower bound except F7, which bounds from above.
struct Surrogate {
  std::string name;
  int sense; // +1: surrogate <= target, -1: surrogate >= target
  std::function<void(std::mt19937&, Vec& x, Vec& k)> sample;
  std::function<Vec(const Vec& k)> expansion; // k mapped to the variables
  std::function<double(const Vec& x, const Vec& k)> target;
  std::function<double(const Vec& x, const Vec& k)> value;
};

Criterion surrogate_suite() {
  Criterion c{"surrogate_suite"};
  const Scenario sc = Scenario::table2();
  const double b = sc.cp.b;
  const double v0 = sc.rp.v0;
  const Eigen::Vector2d wD = sc.primary.w;
  const Eigen::Vector2d wU = sc.users[2].w;
  std::uniform_real_distribution<double> deg(0.5, 89.5), xy(-300, 700), alt(30, 100);
  std::uniform_real_distribution<double> lam(0.05, 1.0), vel(-25, 25), u01(0, 1);

  auto angle = [&](std::mt19937& g, Vec& x, Vec& k) {
    x = Vec::Constant(1, deg(g));
    k = Vec::Constant(1, deg(g));
  };
  // x = q, k = (q_k, z)
  auto route = [&](std::mt19937& g, Vec& x, Vec& k) {
    x = Eigen::Vector2d(xy(g), xy(g));
    k = Eigen::Vector3d(xy(g), xy(g), alt(g));
  };
  // x = z, k = (z_k, s)
  auto height = [&](std::mt19937& g, Vec& x, Vec& k) {
    x = Vec::Constant(1, alt(g));
    k = Eigen::Vector2d(alt(g), 1.0 + 500 * u01(g));
  };
  auto head1 = [](const Vec& k) -> Vec { return k.head(1); };
  auto head2 = [](const Vec& k) -> Vec { return k.head(2); };

  std::vector<Surrogate> cases;
  cases.push_back({"F1", 1, angle, head1,
                   [=](const Vec& x, const Vec&) { return std::exp(-b * x[0]); },
                   [=](const Vec& x, const Vec& k) { return sca::F1(x[0], k[0], b); }});
  cases.push_back({"F2", 1, angle, head1,
                   [=](const Vec& x, const Vec&) { return std::exp(b * x[0]); },
                   [=](const Vec& x, const Vec& k) { return sca::F2(x[0], k[0], b); }});
  for (double alpha : {sc.cp.alpha_L, sc.cp.alpha_N}) {
    cases.push_back({"F3_alpha" + fmt("%.1f", alpha), 1, route, head2,
                     [=](const Vec& x, const Vec& k) {
                       return std::pow((x - wD).squaredNorm() + k[2] * k[2], alpha / 2);
                     },
                     [=](const Vec& x, const Vec& k) {
                       return sca::F3(x, k.head<2>(), wD, k[2], alpha);
                     }});
  }
  for (const auto& [name, w] : {std::pair{std::string("F4"), wU}, std::pair{std::string("F5"), wD}}) {
    cases.push_back({name, 1, route, head2,
                     [=](const Vec& x, const Vec& k) { return std::atan(k[2] / (x - w).norm()); },
                     [=](const Vec& x, const Vec& k) {
                       return sca::F_atan_q((x - w).norm(), (k.head<2>() - w).norm(), k[2]);
                     }});
  }
  for (double alpha : {sc.cp.alpha_L, sc.cp.alpha_N}) {
    cases.push_back({"F6_alpha" + fmt("%.1f", alpha), 1, height, head1,
                     [=](const Vec& x, const Vec& k) {
                       return std::pow(k[1] * k[1] + x[0] * x[0], alpha / 2);
                     },
                     [=](const Vec& x, const Vec& k) { return sca::F6(x[0], k[0], k[1], alpha); }});
  }
  cases.push_back({"F7", -1, height, head1,
                   [=](const Vec& x, const Vec& k) { return std::atan(x[0] / k[1]); },
                   [=](const Vec& x, const Vec& k) { return sca::F7(x[0], k[0], k[1]); }});
  cases.push_back({"lambda_bound", 1,
                   [&](std::mt19937& g, Vec& x, Vec& k) {
                     x = Eigen::Vector3d(lam(g), vel(g), vel(g));
                     k = Eigen::Vector3d(lam(g), vel(g), vel(g));
                   },
                   [](const Vec& k) -> Vec { return k; },
                   [=](const Vec& x, const Vec&) {
                     return x[0] * x[0] + x.tail<2>().squaredNorm() / (v0 * v0);
                   },
                   [=](const Vec& x, const Vec& k) {
                     return sca::lambda_lower_bound(x[0], x.tail<2>(), k[0], k.tail<2>(), v0);
                   }});
  // x = (x_L, t_L), k = (x_k, t_k, P gamma)
  cases.push_back({"rate_taylor", 1,
                   [&](std::mt19937& g, Vec& x, Vec& k) {
                     x = Eigen::Vector2d(1.0 + 40 * u01(g), std::pow(10.0, 2 + 5 * u01(g)));
                     k = Eigen::Vector3d(1.0 + 40 * u01(g), std::pow(10.0, 2 + 5 * u01(g)),
                                         std::pow(10.0, 3 + 4 * u01(g)));
                   },
                   head2,
                   [](const Vec& x, const Vec& k) { return std::log2(1.0 + k[2] / x[1]) / x[0]; },
                   [](const Vec& x, const Vec& k) {
                     return sca::rate_taylor_lb(x[0], x[1], k[2], k[0], k[1]);
                   }});

  std::mt19937 gen(303);
  for (const Surrogate& s : cases) {
    double worst_value = 0.0, worst_grad = 0.0;
    int misses = 0;
    for (int i = 0; i < 100; ++i) {
      Vec x, k;
      s.sample(gen, x, k);
      const Vec xk = s.expansion(k);
      const auto f = [&](const Vec& y) { return s.target(y, k); };
      const auto sf = [&](const Vec& y) { return s.value(y, k); };
      const double tv = f(xk);
      worst_value = std::max(worst_value, std::abs(sf(xk) - tv) / std::max(1e-300, std::abs(tv)));
      const Vec g = oracle::fd_gradient(sf, xk, 1e-5);
      worst_grad = std::max(worst_grad, oracle::finite_difference_check(f, g, xk, 1e-5));
    }
    for (int i = 0; i < 1000; ++i) {
      Vec x, k;
      s.sample(gen, x, k);
      const double tv = s.target(x, k);
      const double gap = s.sense * (tv - s.value(x, k));
      misses += gap >= -1e-12 * std::max(1.0, std::abs(tv)) ? 0 : 1;
    }
    record(c, oracle::compare(s.name + "_tangent_value", 0.0, worst_value, 1e-10));
    record(c, oracle::compare(s.name + "_tangent_gradient", 0.0, worst_grad, 1e-5));
    // The arctan surrogates are only asserted tangent; their side is logged.
    const bool arctan = s.name == "F4" || s.name == "F5" || s.name == "F7";
    if (!arctan) {
      c.require(misses == 0, s.name + ": " + std::to_string(misses) + " of 1000 samples on the wrong side");
    }
    c.note(s.name + (s.sense > 0 ? " (lower)" : " (upper)") + ": value gap " + fmt("%.2g", worst_value) +
           ", gradient gap " + fmt("%.2g", worst_grad) + ", wrong side in " + std::to_string(misses) +
           "/1000" + (arctan ? ", logged only" : ""));
  }
  return c;
}

// ---------------------------------------------------------------- tradeoff

Criterion tradeoff() {
  Criterion c{"altitude_tradeoff_demo"};
  const auto t0 = Clock::now();
  const Scenario sc = Scenario::table2();
  const int slots = 41;
  const auto s = tradeoff_demo({30.0, 100.0}, Eigen::Vector2d::Zero(), Eigen::Vector2d(-200, 0),
                               Eigen::Vector2d(200, 0), sc.cp, sc.P_ave, slots);
  const double elapsed = seconds_since(t0);
  auto get = [&](int plan, int slot) { return s[plan * slots + slot]; };
  for (int end : {0, slots - 1}) {
    c.require(get(1, end).p_los > get(0, end).p_los, "P_L at 100 m not above 30 m at sample " + std::to_string(end));
  }
  const int mid = slots / 2;
  c.require(std::abs(get(0, mid).q.x()) < 1e-12, "midpoint is not overhead");
  c.require(get(0, mid).theta_deg == 90.0 && get(1, mid).theta_deg == 90.0, "overhead angle is not 90");
  c.require(get(1, mid).rate_los < get(0, mid).rate_los, "100 m rate not below 30 m at closest approach");
  double worst_gap = 0.0;
  for (const auto& t : s) {
    worst_gap = std::max(worst_gap, (t.expected_rate - t.lower_bound) / t.expected_rate);
    const double ref = static_cast<double>(oracle::lower_bound_rate(sc, t.q, t.altitude, Eigen::Vector2d::Zero(), sc.P_ave, false));
    record(c, oracle::compare("tradeoff_lb_plan" + std::to_string(t.plan) + "_slot" + std::to_string(t.slot),
                              ref, t.lower_bound, 1e-12, true));
  }
  c.require(worst_gap <= 0.02, "expected vs lower-bound rate gap " + fmt("%.4f", worst_gap));
  c.require(elapsed <= 1.0, "runtime " + fmt("%.3f s", elapsed));
  c.note("P_L at start: 30 m " + fmt("%.4f", get(0, 0).p_los) + ", 100 m " + fmt("%.4f", get(1, 0).p_los) +
         "; overhead LoS rate: 30 m " + fmt("%.3f", get(0, mid).rate_los) + ", 100 m " +
         fmt("%.3f", get(1, mid).rate_los));
  c.note("worst pointwise gap " + fmt("%.5f", worst_gap) + ", runtime " + fmt("%.4f s", elapsed));
  return c;
}

// ---------------------------------------------------------------- oracle equivalence

Scenario toy(int N, const std::vector<Eigen::Vector2d>& users) {
  Scenario sc = Scenario::table2();
  sc.set_horizon(N);
  sc.users.clear();
  for (const auto& u : users) {
    sc.users.push_back({u, NodeKind::CognitiveUser});
  }
  // Loose kinematics and budgets: only the block under test is constrained.
  sc.V_max = sc.a_max = sc.Vhat_max = 1e4;
  sc.P_hor_ave = sc.P_ver_ave = 1e12;
  return sc;
}

Criterion oracle_equivalence() {
  Criterion c{"oracle_equivalence"};
  std::mt19937 gen(404);
  std::uniform_real_distribution<double> xy(0, 400), alt(30, 100), u01(0, 1);
  int lp_cases = 0, power_cases = 0;
  double worst_lp = 0.0, worst_p = 0.0;
  for (int R = 1; R <= 3; ++R) {
    for (int N = 2; N <= 3; ++N) {
      for (int rep = 0; rep < 4; ++rep) {
        std::vector<Eigen::Vector2d> users;
        for (int r = 0; r < R; ++r) {
          users.emplace_back(xy(gen), xy(gen));
        }
        Scenario sc = toy(N, users);
        // The cap plays no part in scheduling; keep the random powers admissible.
        sc.Gamma = 1e3;
        DecisionVariables dv(R, N);
        for (int n = 0; n < N; ++n) {
          dv.q.col(n) = Eigen::Vector2d(xy(gen), xy(gen));
          dv.z(n) = alt(gen);
          dv.power(n) = 0.02 + 0.08 * u01(gen);
        }
        dv.q.col(N - 1) = dv.q.col(0);
        dv.z(N - 1) = dv.z(0);
        dv.schedule.setConstant(1.0 / R);
        dv.refresh_kinematics(sc.delta_t);
        refresh_angles(dv, sc);
        // Scheduling.
        Eigen::MatrixXd rates(R, N);
        for (int r = 0; r < R; ++r) {
          for (int n = 0; n < N; ++n) {
            rates(r, n) = static_cast<double>(oracle::lower_bound_rate(sc, dv.q.col(n), dv.z(n), sc.users[r].w, dv.power(n), false));
          }
        }
        const oracle::ScheduleResult bf = oracle::brute_force_schedule(rates);
        const BlockResult a = solve_scheduling(dv, sc);
        const std::string id = "R" + std::to_string(R) + "N" + std::to_string(N) + "_" + std::to_string(rep);
        const oracle::OracleReport lr = oracle::compare("schedule_" + id, bf.value, objective(a.dv, sc), 1e-9);
        worst_lp = std::max(worst_lp, lr.deviation);
        record(c, lr);
        ++lp_cases;

        // Power on the optimal schedule, with the cap binding in one slot.
        DecisionVariables pd = a.dv;
        const int tight = static_cast<int>(gen() % N);
        sc.Gamma = (0.02 + 0.1 * u01(gen)) *
                   static_cast<double>(oracle::interference(sc, pd.q.col(tight), pd.z(tight), 1.0, false));
        for (int n = 0; n < N; ++n) {
          const double cap = sc.Gamma / static_cast<double>(oracle::interference(sc, pd.q.col(n), pd.z(n), 1.0, false));
          pd.power(n) = std::min(0.5 * sc.P_ave, 0.5 * cap);
        }
        const oracle::PowerResult grid = oracle::grid_search_power(pd, sc, 1e-3);
        refresh_angles(pd, sc);
        const BlockResult p = solve_power(pd, sc);
        const double gap = (p.dv.power - grid.power).cwiseAbs().maxCoeff();
        worst_p = std::max(worst_p, gap);
        record(c, oracle::compare("power_" + id, 0.0, gap, 1e-3 + 1e-9));
        // The solver keeps a 1e-6 relative margin below each cap.
        c.require(objective(p.dv, sc) >= grid.value * (1.0 - 1e-6),
                  "power_" + id + fmt(" objective below the grid by %.3g", grid.value - objective(p.dv, sc)));
        ++power_cases;
      }
    }
  }
  c.note(std::to_string(lp_cases) + " scheduling cases, worst objective gap " + fmt("%.3g", worst_lp));
  c.note(std::to_string(power_cases) + " power cases, worst power gap to the 1e-3 W grid " + fmt("%.3g W", worst_p));
  return c;
}

// ---------------------------------------------------------------- full runs

struct SchemeRuns {
  std::vector<RunReport> reports;
};

Criterion monotone(const SchemeRuns& runs) {
  Criterion c{"monotone_convergence"};
  for (const RunReport& r : runs.reports) {
    const std::string name = to_string(r.scheme);
    double prev = r.initial_objective;
    double worst_drop = 0.0;
    for (const auto& rec : r.records) {
      worst_drop = std::max(worst_drop, prev - rec.objective);
      prev = rec.objective;
    }
    const double last_gain = r.records.size() >= 1
                                 ? r.records.back().objective -
                                       (r.records.size() >= 2 ? r.records[r.records.size() - 2].objective
                                                              : r.initial_objective)
                                 : INFINITY;
    c.require(r.converged, name + ": outcome " + to_string(r.outcome));
    c.require(worst_drop <= 1e-7, name + fmt(": objective dropped by %.3g", worst_drop));
    c.require(r.records.size() <= 50, name + ": more than 50 iterations");
    c.require(last_gain <= 1e-4, name + fmt(": last gain %.3g", last_gain));
    c.require(r.wall_time_s <= 300.0, name + fmt(": runtime %.1f s", r.wall_time_s));
    c.note(name + ": " + std::to_string(r.records.size()) + " iterations, rate " +
           fmt("%.4f", r.final_objective) + ", last gain " + fmt("%.2e", last_gain) + ", largest drop " +
           fmt("%.1e", worst_drop) + ", " + fmt("%.1f s", r.wall_time_s));
  }
  return c;
}

Criterion feasibility(const SchemeRuns& runs) {
  Criterion c{"feasibility_audit"};
  for (const RunReport& r : runs.reports) {
    const std::string name = to_string(r.scheme);
    const LosModel model = SchemeConfig::of(r.scheme).los_model();
    const AuditReport a = feasibility_audit(r.solution, r.scenario, 1e-6, model);
    c.require(a.feasible(), name + ": " + a.describe());
    const Scenario& sc = r.scenario;
    double worst = -INFINITY;
    for (int n = 0; n < sc.N; ++n) {
      for (bool los : {false, model == LosModel::AlwaysLoS}) {
        const double i = static_cast<double>(oracle::interference(sc, r.solution.q.col(n), r.solution.z(n), r.solution.power(n), los));
        worst = std::max(worst, i / sc.Gamma);
      }
    }
    c.require(worst <= 1.0 + 1e-12, name + fmt(": interference reaches %.9g Gamma", worst));
    c.note(name + ": largest residual " + fmt("%.2e", a.max_residual()) + ", peak interference " +
           fmt("%.3g", worst) + " Gamma");
  }
  return c;
}

Criterion ordering(const SchemeRuns& runs) {
  Criterion c{"scheme_ordering"};
  auto rate = [&](Scheme s) {
    for (const auto& r : runs.reports) {
      if (r.scheme == s) {
        return r.final_objective;
      }
    }
    return static_cast<double>(NAN);
  };
  const double p = rate(Scheme::Proposed), n = rate(Scheme::NPC);
  const double l = rate(Scheme::TwoDLoS), pl = rate(Scheme::TwoDPLoS);
  // a >= b after a 1% slack band
  auto ge = [](double a, double b) { return a >= 0.99 * b; };
  c.require(ge(l, p), fmt("2d-los %.4f", l) + fmt(" below proposed %.4f", p));
  c.require(ge(p, pl), fmt("proposed %.4f", p) + fmt(" below 2d-plos %.4f", pl));
  c.require(ge(p, n), fmt("proposed %.4f", p) + fmt(" below npc %.4f", n));
  c.note(fmt("2d-los %.4f >= ", l) + fmt("proposed %.4f >= ", p) + fmt("2d-plos %.4f; ", pl) +
         fmt("npc %.4f", n));
  return c;
}

Criterion sweeps(const Scenario& base, std::ofstream& csv) {
  Criterion c{"sweep_monotonicity"};
  SweepOptions opt;
  auto check = [&](SweepParam param, const std::vector<double>& values) {
    const auto t0 = Clock::now();
    const auto cells = run_sweep(base, param, values, {Scheme::Proposed}, opt);
    write_rates_csv(csv, cells);
    std::vector<double> rates;
    std::string line = to_string(param) + ":";
    for (const auto& cell : cells) {
      c.require(cell.error.empty(), to_string(param) + fmt("=%g: ", cell.value) + cell.error);
      const double r = cell.error.empty() ? cell.report.final_objective : NAN;
      c.require(cell.error.empty() && cell.report.outcome != RunOutcome::Infeasible,
                to_string(param) + fmt("=%g infeasible", cell.value));
      rates.push_back(r);
      line += fmt(" %g", cell.value) + fmt(" -> %.4f", r) + (cell.from_warm ? "w" : "c");
    }
    for (std::size_t i = 1; i < rates.size(); ++i) {
      c.require(rates[i] >= 0.99 * rates[i - 1],
                to_string(param) + fmt(" drops at %g", values[i]) + fmt(" (%.4f", rates[i - 1]) +
                    fmt(" -> %.4f)", rates[i]));
    }
    c.note(line + fmt(" (%.0f s)", seconds_since(t0)));
    return rates;
  };
  check(SweepParam::T, {60.0, 70.0, 80.0});
  const std::vector<double> gamma = check(SweepParam::Gamma, {-128.0, -121.0, -110.0, -90.0, -80.0});
  const double top = gamma.back(), below = gamma[gamma.size() - 2];
  c.require(std::abs(top - below) <= 0.01 * top, fmt("no saturation: %.4f", below) + fmt(" vs %.4f", top));
  return c;
}

} // namespace

int main() {
  report(hover_identities());
  report(rate_convexity());
  report(surrogate_suite());
  report(tradeoff());
  report(oracle_equivalence());

  Scenario sc;
  try {
    sc = load_scenario(std::string(UAVCRN_DATA_DIR) + "/table2.json");
  } catch (const std::exception& e) {
    std::printf("FAIL loading table2.json: %s\n", e.what());
    return 1;
  }
  SchemeRuns runs;
  for (Scheme s : all_schemes()) {
    runs.reports.push_back(optimize(sc, s));
  }
  report(monotone(runs));
  report(feasibility(runs));
  report(ordering(runs));

  std::ofstream rates("acceptance_rates.csv");
  report(sweeps(sc, rates));

  std::ofstream orc("oracle_report.csv");
  oracle::write_csv(orc, g_reports);
  std::printf("%d criteria failed\n", g_failed);
  return g_failed;
}
