#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavcrn/driver.hpp"
#include "uavcrn/experiments.hpp"
#include "uavcrn/report.hpp"
#include "uavcrn/scenario_io.hpp"

namespace {

using namespace uavcrn;

constexpr int kBadInput = 1;

struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out += (i ? sep : "") + v[i];
  }
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  std::istringstream ss(s);
  ss.imbue(std::locale::classic());
  double v = 0.0;
  if (!(ss >> v) || !(ss >> std::ws).eof()) {
    throw BadInput(what + ": not a number: '" + s + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_number(item, what));
  }
  if (out.empty()) {
    throw BadInput(what + ": empty list");
  }
  return out;
}

Eigen::Vector2d parse_point(const std::string& s, const std::string& what) {
  const std::vector<double> v = parse_list(s, what);
  if (v.size() != 2) {
    throw BadInput(what + ": expected X,Y but got '" + s + "'");
  }
  return {v[0], v[1]};
}

Scheme parse_scheme_or_throw(const std::string& name) {
  const auto s = parse_scheme(name);
  if (!s) {
    throw BadInput("unknown scheme '" + name + "'; valid schemes: " +
                   join(scheme_names(), ", "));
  }
  return *s;
}

Scenario load(const std::string& path) {
  return path.empty() ? Scenario::table2() : load_scenario(path);
}

struct RunArgs {
  std::string scenario;
  std::string scheme = "proposed";
  std::string out = "out";
  std::optional<double> epsilon;
  std::optional<int> max_iters;
  int inner_iters = DriverOptions{}.inner_iters;
  bool quiet = false;
};

void apply_overrides(Scenario& sc, const RunArgs& a) {
  if (a.epsilon) {
    sc.epsilon = *a.epsilon;
  }
  if (a.max_iters) {
    sc.max_outer_iters = *a.max_iters;
  }
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw BadInput(e.what());
  }
  if (a.inner_iters < 1) {
    throw BadInput("--inner-iters must be at least 1");
  }
}

int cmd_run(const RunArgs& a) {
  const Scheme scheme = parse_scheme_or_throw(a.scheme);
  Scenario sc = load(a.scenario);
  apply_overrides(sc, a);
  DriverOptions opt;
  opt.inner_iters = a.inner_iters;
  opt.log = a.quiet ? nullptr : &std::cerr;
  const RunReport rep = optimize(sc, scheme, opt);
  write_run(a.out, rep);
  const RunSummary s = summarize(rep);
  std::printf("%s: %s after %d iterations, average rate %.6f bit/s/Hz\n",
              s.scheme.c_str(), to_string(rep.outcome).c_str(), s.iterations,
              s.avg_rate_bps_hz);
  if (!rep.diagnostics.empty()) {
    std::fprintf(stderr, "%s\n", rep.diagnostics.c_str());
  }
  return exit_code(rep);
}

struct TradeoffArgs {
  std::string scenario;
  std::string altitudes = "30,100";
  std::string user = "0,0";
  std::string path = "-200,0:200,0";
  double power = 0.1;
  int samples = 41;
  std::string out = "out";
};

int cmd_tradeoff(const TradeoffArgs& a) {
  const std::vector<double> alt = parse_list(a.altitudes, "--altitudes");
  const std::size_t colon = a.path.find(':');
  if (colon == std::string::npos) {
    throw BadInput("--path: expected X1,Y1:X2,Y2 but got '" + a.path + "'");
  }
  const Eigen::Vector2d from = parse_point(a.path.substr(0, colon), "--path");
  const Eigen::Vector2d to = parse_point(a.path.substr(colon + 1), "--path");
  const Eigen::Vector2d user = parse_point(a.user, "--user");
  const Scenario sc = load(a.scenario);
  std::vector<TradeoffSample> samples;
  try {
    samples = tradeoff_demo(alt, user, from, to, sc.cp, a.power, a.samples);
  } catch (const std::invalid_argument& e) {
    throw BadInput(e.what());
  }
  std::filesystem::create_directories(a.out);
  const std::string file = (std::filesystem::path(a.out) / "tradeoff.csv").string();
  std::ofstream f(file);
  write_tradeoff_csv(f, samples);
  if (!f) {
    throw std::runtime_error("cannot write " + file);
  }
  std::printf("wrote %zu samples to %s\n", samples.size(), file.c_str());
  return 0;
}

struct SweepArgs {
  RunArgs run;
  std::string param;
  std::string values;
  std::string schemes = "proposed";
  int workers = 1;
  bool no_continuation = false;
};

int cmd_sweep(const SweepArgs& a) {
  const auto param = parse_sweep_param(a.param);
  if (!param) {
    throw BadInput("unknown --param '" + a.param +
                   "'; valid: Gamma, T, P_hor_ave, P_ver_ave");
  }
  const std::vector<double> values = parse_list(a.values, "--values");
  std::vector<Scheme> schemes;
  {
    std::stringstream ss(a.schemes);
    std::string item;
    while (std::getline(ss, item, ',')) {
      schemes.push_back(parse_scheme_or_throw(item));
    }
    if (schemes.empty()) {
      throw BadInput("--schemes: empty list");
    }
  }
  Scenario sc = load(a.run.scenario);
  apply_overrides(sc, a.run);
  for (double v : values) {
    try {
      with_param(sc, *param, v);
    } catch (const std::invalid_argument& e) {
      throw BadInput("--values: " + std::to_string(v) + ": " + e.what());
    }
  }
  SweepOptions opt;
  opt.driver.inner_iters = a.run.inner_iters;
  opt.workers = a.workers;
  opt.continuation = !a.no_continuation;
  const std::vector<SweepCell> cells = run_sweep(sc, *param, values, schemes, opt);

  namespace fs = std::filesystem;
  fs::create_directories(a.run.out);
  int code = 0;
  for (const SweepCell& c : cells) {
    char dir[64];
    std::snprintf(dir, sizeof dir, "%s=%.12g", to_string(c.param).c_str(), c.value);
    const fs::path cell_dir = fs::path(a.run.out) / dir / to_string(c.scheme);
    if (c.error.empty()) {
      write_run(cell_dir.string(), c.report);
      if (!c.report.converged) {
        code = 2;
      }
      if (!a.run.quiet) {
        std::fprintf(stderr, "%s %s: %s rate %.6f%s\n", dir,
                     to_string(c.scheme).c_str(),
                     to_string(c.report.outcome).c_str(),
                     summarize(c.report).avg_rate_bps_hz,
                     c.from_warm ? " (warm)" : "");
      }
    } else {
      code = 2;
      std::fprintf(stderr, "%s %s: error: %s\n", dir, to_string(c.scheme).c_str(),
                   c.error.c_str());
    }
  }
  const std::string file = (fs::path(a.run.out) / "rates.csv").string();
  std::ofstream f(file);
  write_rates_csv(f, cells);
  if (!f) {
    throw std::runtime_error("cannot write " + file);
  }
  std::printf("wrote %zu cells to %s\n", cells.size(), file.c_str());
  return code;
}

void add_common(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--scenario", a.scenario,
                  "Scenario JSON (default: built-in mission table)");
  cmd->add_option("--out", a.out, "Output directory")->envname("UAVCRN_OUT_DIR");
  cmd->add_option("--epsilon", a.epsilon, "Stop when an iteration gains at most this");
  cmd->add_option("--max-iters", a.max_iters, "Outer iteration cap");
  cmd->add_option("--inner-iters", a.inner_iters, "SCA steps per trajectory block");
  cmd->add_flag("--quiet", a.quiet, "No per-iteration log on stderr");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory, power and scheduling optimizer for a cognitive UAV relay"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Optimize one scheme");
  add_common(run_cmd, run);
  run_cmd->add_option("--scheme", run.scheme, "proposed, npc, 2d-los or 2d-plos");

  TradeoffArgs trade;
  CLI::App* trade_cmd =
      app.add_subcommand("tradeoff", "Altitude tradeoff along a straight pass");
  trade_cmd->add_option("--scenario", trade.scenario, "Scenario JSON for the channel");
  trade_cmd->add_option("--altitudes", trade.altitudes, "Comma separated altitudes [m]");
  trade_cmd->add_option("--user", trade.user, "User position X,Y [m]");
  trade_cmd->add_option("--path", trade.path, "Straight path X1,Y1:X2,Y2 [m]");
  trade_cmd->add_option("--power", trade.power, "Transmit power [W]");
  trade_cmd->add_option("--samples", trade.samples, "Samples per plan");
  trade_cmd->add_option("--out", trade.out, "Output directory")
      ->envname("UAVCRN_OUT_DIR");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Rate versus one parameter");
  add_common(sweep_cmd, sweep.run);
  sweep_cmd->add_option("--param", sweep.param, "Gamma [dB], T [s], P_hor_ave or P_ver_ave [W]")
      ->required();
  sweep_cmd->add_option("--values", sweep.values, "Comma separated values")->required();
  sweep_cmd->add_option("--schemes", sweep.schemes, "Comma separated schemes");
  sweep_cmd->add_option("--workers", sweep.workers, "Scheme chains run in parallel");
  sweep_cmd->add_flag("--no-continuation", sweep.no_continuation,
                      "Only cold starts, no warm start from the previous value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kBadInput;
  }
  try {
    if (run_cmd->parsed()) {
      return cmd_run(run);
    }
    if (trade_cmd->parsed()) {
      return cmd_tradeoff(trade);
    }
    return cmd_sweep(sweep);
  } catch (const BadInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}
