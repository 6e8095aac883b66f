#include "uavcrn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "uavcrn/model.hpp"

namespace uavcrn {

std::string to_string(SweepParam p) {
  switch (p) {
  case SweepParam::Gamma:
    return "Gamma";
  case SweepParam::T:
    return "T";
  case SweepParam::P_hor_ave:
    return "P_hor_ave";
  case SweepParam::P_ver_ave:
    return "P_ver_ave";
  }
  return "?";
}

std::optional<SweepParam> parse_sweep_param(std::string_view name) {
  for (SweepParam p : {SweepParam::Gamma, SweepParam::T, SweepParam::P_hor_ave,
                       SweepParam::P_ver_ave}) {
    if (name == to_string(p)) {
      return p;
    }
  }
  return std::nullopt;
}

Scenario with_param(const Scenario& base, SweepParam p, double value) {
  Scenario sc = base;
  switch (p) {
  case SweepParam::Gamma:
    sc.Gamma = db_to_linear(value);
    break;
  case SweepParam::T:
    sc.set_horizon(value);
    break;
  case SweepParam::P_hor_ave:
    sc.P_hor_ave = value;
    break;
  case SweepParam::P_ver_ave:
    sc.P_ver_ave = value;
    break;
  }
  sc.validate();
  return sc;
}

std::optional<DecisionVariables> extend_horizon(const DecisionVariables& dv,
                                                const Scenario& from,
                                                const Scenario& to,
                                                LosModel model) {
  const int N = from.N;
  const int k = to.N - from.N;
  if (k < 0 || dv.slots() != N || from.delta_t != to.delta_t) {
    return std::nullopt;
  }
  if (k == 0) {
    return dv;
  }
  // A waypoint can be held for extra slots when stopping there keeps the
  // acceleration limits.
  const double amax = to.a_max * to.delta_t;
  int best = -1;
  int best_user = 0;
  double best_rate = -1.0;
  double best_power = 0.0;
  for (int n = 1; n + 1 < N - 1; ++n) {
    if (dv.v_xy.col(n - 1).norm() > amax || dv.v_xy.col(n).norm() > amax) {
      continue;
    }
    if (to.ahat_max && (std::abs(dv.v_z(n - 1)) > *to.ahat_max * to.delta_t ||
                        std::abs(dv.v_z(n)) > *to.ahat_max * to.delta_t)) {
      continue;
    }
    const double P = std::min(dv.power(n), to.P_ave);
    const AirPosition pos{dv.q.col(n), dv.z(n)};
    for (int r = 0; r < to.R(); ++r) {
      const double v = lower_bound_rate(P, pos, to.users[r], to.cp, model);
      if (v > best_rate) {
        best = n;
        best_user = r;
        best_rate = v;
        best_power = P;
      }
    }
  }
  if (best < 0) {
    return std::nullopt;
  }
  DecisionVariables out(to.R(), to.N);
  auto src = [&](int m) { return m <= best ? m : (m <= best + k ? -1 : m - k); };
  for (int m = 0; m < to.N; ++m) {
    const int s = src(m);
    if (s >= 0) {
      out.schedule.col(m) = dv.schedule.col(s);
      out.power(m) = dv.power(s);
      out.q.col(m) = dv.q.col(s);
      out.z(m) = dv.z(s);
    } else {
      out.schedule.col(m).setZero();
      out.schedule(best_user, m) = 1.0;
      out.power(m) = best_power;
      out.q.col(m) = dv.q.col(best);
      out.z(m) = dv.z(best);
    }
  }
  out.refresh_kinematics(to.delta_t);
  refresh_angles(out, to);
  const AuditReport a = feasibility_audit(out, to, 1e-6, model);
  if (!a.feasible() || a.residual("interference") > 0.0) {
    return std::nullopt;
  }
  return out;
}

namespace {

bool better(const RunReport& a, const RunReport& b) {
  const bool fa = a.outcome != RunOutcome::Infeasible;
  const bool fb = b.outcome != RunOutcome::Infeasible;
  if (fa != fb) {
    return fa;
  }
  if (a.converged != b.converged) {
    return a.converged;
  }
  return a.final_objective > b.final_objective;
}

void run_chain(const Scenario& base, SweepParam p,
               const std::vector<double>& values, Scheme scheme,
               const SweepOptions& opt, std::vector<SweepCell*>& cells) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  // Budgets, Gamma and T all relax the problem as they grow.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const LosModel model = SchemeConfig::of(scheme).los_model();
  std::optional<RunReport> prev;
  for (std::size_t i : order) {
    SweepCell& cell = *cells[i];
    cell.param = p;
    cell.value = values[i];
    cell.scheme = scheme;
    try {
      const Scenario sc = with_param(base, p, values[i]);
      RunReport cold = optimize(sc, scheme, opt.driver);
      cell.cold_objective = cold.final_objective;
      cell.report = std::move(cold);
      if (opt.continuation && prev &&
          prev->outcome != RunOutcome::Infeasible) {
        std::optional<DecisionVariables> start;
        if (prev->scenario.N == sc.N) {
          start = prev->solution;
        } else {
          start = extend_horizon(prev->solution, prev->scenario, sc, model);
        }
        if (start &&
            feasibility_audit(*start, sc, 1e-6, model).feasible()) {
          DriverOptions d = opt.driver;
          d.warm_start = *start;
          RunReport warm = optimize(sc, scheme, d);
          cell.warm_objective = warm.final_objective;
          if (better(warm, cell.report)) {
            cell.report = std::move(warm);
            cell.from_warm = true;
          }
        }
      }
      prev = cell.report;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  }
}

} // namespace

std::vector<SweepCell> run_sweep(const Scenario& base, SweepParam p,
                                 const std::vector<double>& values,
                                 const std::vector<Scheme>& schemes,
                                 const SweepOptions& opt) {
  if (values.empty() || schemes.empty()) {
    throw std::invalid_argument("sweep needs at least one value and scheme");
  }
  std::vector<SweepCell> cells(values.size() * schemes.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t s = next++; s < schemes.size(); s = next++) {
      std::vector<SweepCell*> chain;
      for (std::size_t v = 0; v < values.size(); ++v) {
        chain.push_back(&cells[v * schemes.size() + s]);
      }
      run_chain(base, p, values, schemes[s], opt, chain);
    }
  };
  const int n = std::clamp(opt.workers, 1, static_cast<int>(schemes.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) {
    pool.emplace_back(work);
  }
  work();
  for (auto& t : pool) {
    t.join();
  }
  return cells;
}

std::vector<TradeoffSample> tradeoff_demo(const std::vector<double>& altitudes,
                                          const Eigen::Vector2d& user,
                                          const Eigen::Vector2d& from,
                                          const Eigen::Vector2d& to,
                                          const ChannelParams& cp,
                                          double power_w, int slots) {
  if (altitudes.size() < 2) {
    throw std::invalid_argument("tradeoff needs at least two altitude plans");
  }
  if (slots < 2) {
    throw std::invalid_argument("tradeoff needs at least two samples");
  }
  const GroundNode g{user, NodeKind::CognitiveUser};
  std::vector<TradeoffSample> out;
  for (std::size_t i = 0; i < altitudes.size(); ++i) {
    if (!(altitudes[i] > 0.0)) {
      throw std::invalid_argument("altitudes must be positive");
    }
    for (int s = 0; s < slots; ++s) {
      TradeoffSample t;
      t.plan = static_cast<int>(i);
      t.altitude = altitudes[i];
      t.slot = s;
      t.q = from + (to - from) * (static_cast<double>(s) / (slots - 1));
      const AirPosition p{t.q, t.altitude};
      t.theta_deg = elevation_angle_deg(p, g);
      t.p_los = los_probability(t.theta_deg, cp);
      t.rate_los = rate(power_w, link_distance(p, g), LinkState::LoS, cp);
      t.expected_rate = expected_rate(power_w, p, g, cp);
      t.lower_bound = lower_bound_rate(power_w, p, g, cp);
      out.push_back(t);
    }
  }
  return out;
}

} // namespace uavcrn
