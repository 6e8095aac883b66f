#include "uavcrn/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "uavcrn/subproblems.hpp"

namespace uavcrn {

namespace {

constexpr double kDecreaseTol = 1e-7;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

} // namespace

SchemeConfig SchemeConfig::of(Scheme s) {
  SchemeConfig c;
  c.scheme = s;
  switch (s) {
  case Scheme::Proposed:
    break;
  case Scheme::NPC:
    c.optimize_power = false;
    break;
  case Scheme::TwoDLoS:
    c.optimize_vertical = false;
    c.force_los = true;
    break;
  case Scheme::TwoDPLoS:
    c.optimize_vertical = false;
    break;
  }
  return c;
}

std::string to_string(Scheme s) {
  switch (s) {
  case Scheme::Proposed:
    return "proposed";
  case Scheme::NPC:
    return "npc";
  case Scheme::TwoDLoS:
    return "2d-los";
  case Scheme::TwoDPLoS:
    return "2d-plos";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  const std::string n = lower(name);
  for (Scheme s : all_schemes()) {
    if (n == to_string(s)) {
      return s;
    }
  }
  return std::nullopt;
}

std::vector<Scheme> all_schemes() {
  return {Scheme::Proposed, Scheme::NPC, Scheme::TwoDLoS, Scheme::TwoDPLoS};
}

std::vector<std::string> scheme_names() {
  std::vector<std::string> out;
  for (Scheme s : all_schemes()) {
    out.push_back(to_string(s));
  }
  return out;
}

std::string to_string(RunOutcome o) {
  switch (o) {
  case RunOutcome::Converged:
    return "converged";
  case RunOutcome::MaxIterations:
    return "max-iterations";
  case RunOutcome::Stalled:
    return "stalled";
  case RunOutcome::Decreased:
    return "decreased";
  case RunOutcome::Infeasible:
    return "infeasible";
  }
  return "?";
}

int exit_code(const RunReport& r) {
  switch (r.outcome) {
  case RunOutcome::Converged:
    return 0;
  case RunOutcome::Infeasible:
    return 3;
  default:
    return 2;
  }
}

RunReport optimize(const Scenario& sc, Scheme scheme, const DriverOptions& opt) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };
  sc.validate();
  const SchemeConfig cfg = SchemeConfig::of(scheme);
  const LosModel model = cfg.los_model();
  BlockOptions bo;
  bo.los_model = model;
  bo.inner_iters = opt.inner_iters;

  RunReport rep;
  rep.scheme = scheme;
  rep.scenario = sc;
  // Every scheme starts from the same point: the circle at P_ave, moved away
  // from D where needed. Schemes with power control may instead lower the
  // power when no such route is found.
  DecisionVariables dv;
  if (opt.warm_start) {
    dv = *opt.warm_start;
    if (dv.slots() != sc.N || dv.users() != sc.R()) {
      throw std::invalid_argument("warm start does not match the scenario");
    }
    if (!cfg.optimize_power) {
      dv.power.setConstant(sc.P_ave);
    }
    if (!cfg.optimize_vertical) {
      dv.z.setConstant(sc.start.z);
    }
    dv.refresh_kinematics(sc.delta_t);
    refresh_angles(dv, sc);
  } else {
    dv = init_solution(sc, model, true);
    if (!restore_interference(dv, sc, bo) && cfg.optimize_power) {
      dv = init_solution(sc, model, false);
    }
  }
  if (!cfg.optimize_power &&
      feasibility_audit(dv, sc, bo.audit_tol, model).residual("interference") >
          0.0) {
    rep.solution = dv;
    rep.initial_objective = rep.final_objective = objective(dv, sc, model);
    rep.outcome = RunOutcome::Infeasible;
    rep.diagnostics =
        "no route keeps the interference cap at fixed power:\n" +
        feasibility_audit(dv, sc, bo.audit_tol, model).describe();
    rep.wall_time_s = elapsed();
    return rep;
  }
  {
    const AuditReport a = feasibility_audit(dv, sc, bo.audit_tol, model);
    if (!a.feasible()) {
      rep.solution = dv;
      rep.outcome = RunOutcome::Infeasible;
      rep.diagnostics = "initial point infeasible:\n" + a.describe();
      rep.wall_time_s = elapsed();
      return rep;
    }
  }

  double prev = objective(dv, sc, model);
  rep.initial_objective = prev;
  rep.outcome = RunOutcome::MaxIterations;
  for (int k = 1; k <= sc.max_outer_iters; ++k) {
    IterationRecord rec;
    rec.index = k;
    bool any_accepted = false;
    bool any_stalled = false;
    std::string notes;
    auto apply = [&](const BlockResult& b, const char* name) {
      dv = b.dv;
      any_accepted = any_accepted || b.accepted;
      any_stalled = any_stalled || b.stalled;
      if (b.stalled) {
        notes += std::string(name) + ": " + b.note + "\n";
      }
      return b.objective_after;
    };
    rec.after_scheduling = apply(solve_scheduling(dv, sc, bo), "scheduling");
    rec.after_power = cfg.optimize_power
                          ? apply(solve_power(dv, sc, bo), "power")
                          : rec.after_scheduling;
    rec.after_horizontal = apply(solve_horizontal(dv, sc, bo), "horizontal");
    rec.after_vertical = cfg.optimize_vertical
                             ? apply(solve_vertical(dv, sc, bo), "vertical")
                             : rec.after_horizontal;
    rec.objective = objective(dv, sc, model);
    rec.max_residual =
        feasibility_audit(dv, sc, bo.audit_tol, model).max_residual();
    rec.wall_time_s = elapsed();
    rep.records.push_back(rec);
    if (opt.log != nullptr) {
      char line[160];
      std::snprintf(line, sizeof line, "%s iter %d objective %.10f gain %.3e\n",
                    to_string(scheme).c_str(), k, rec.objective,
                    rec.objective - prev);
      *opt.log << line << std::flush;
    }
    if (rec.objective < prev - kDecreaseTol) {
      rep.outcome = RunOutcome::Decreased;
      rep.diagnostics = "objective decreased in iteration " +
                        std::to_string(k) + "; a surrogate is not a bound";
      break;
    }
    const double gain = rec.objective - prev;
    prev = rec.objective;
    if (!any_accepted && any_stalled) {
      rep.outcome = RunOutcome::Stalled;
      rep.diagnostics = "no block improved:\n" + notes +
                        feasibility_audit(dv, sc, bo.audit_tol, model)
                            .describe();
      break;
    }
    if (gain <= sc.epsilon) {
      rep.outcome = RunOutcome::Converged;
      break;
    }
  }

  if (!is_binary(dv.schedule)) {
    // Round to a per-slot argmax, then one more pass with the schedule fixed.
    dv.schedule = binarize_schedule(dv.schedule);
    rep.binarized = true;
    if (cfg.optimize_power) {
      dv = solve_power(dv, sc, bo).dv;
    }
    dv = solve_horizontal(dv, sc, bo).dv;
    if (cfg.optimize_vertical) {
      dv = solve_vertical(dv, sc, bo).dv;
    }
  }
  const AuditReport fin = feasibility_audit(dv, sc, bo.audit_tol, model);
  if (!fin.feasible() || fin.residual("interference") > 0.0) {
    rep.outcome = RunOutcome::Infeasible;
    rep.diagnostics += "final audit failed:\n" + fin.describe();
  }
  rep.converged = rep.outcome == RunOutcome::Converged;
  rep.solution = dv;
  rep.final_objective = objective(dv, sc, model);
  rep.wall_time_s = elapsed();
  return rep;
}

std::vector<RunReport> compare_schemes(const Scenario& sc,
                                       const std::vector<Scheme>& schemes,
                                       const DriverOptions& opt, int workers) {
  std::vector<RunReport> out(schemes.size());
  std::vector<std::exception_ptr> errors(schemes.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < schemes.size(); i = next++) {
      try {
        out[i] = optimize(sc, schemes[i], opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(workers, 1, std::max(1, static_cast<int>(schemes.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) {
    pool.emplace_back(work);
  }
  work();
  for (auto& t : pool) {
    t.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return out;
}

} // namespace uavcrn
