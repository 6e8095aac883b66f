#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace uavcrn::oracle {

namespace {

constexpr long double kPi = 3.141592653589793238462643383279502884L;

long double ldist(const Eigen::Vector2d& q, const Eigen::Vector2d& w) {
  const long double dx = static_cast<long double>(q.x()) - w.x();
  const long double dy = static_cast<long double>(q.y()) - w.y();
  return std::sqrt(dx * dx + dy * dy);
}

// Relative steps, so that coordinates of any magnitude are resolved.
double scale(double v) { return v != 0.0 ? std::abs(v) : 1.0; }

} // namespace

OracleReport compare(const std::string& case_id, double oracle_value,
                     double artifact_value, double tolerance, bool relative) {
  OracleReport r;
  r.case_id = case_id;
  r.oracle_value = oracle_value;
  r.artifact_value = artifact_value;
  r.tolerance = tolerance;
  r.deviation = std::abs(oracle_value - artifact_value);
  if (relative) {
    r.deviation /= std::max(1e-300, std::abs(oracle_value));
  }
  r.pass = r.deviation <= tolerance;
  return r;
}

void write_csv(std::ostream& out, const std::vector<OracleReport>& reports) {
  out << "# schema=1\ncase_id,oracle,artifact,deviation,tolerance,pass\n";
  char buf[160];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, ",%.12g,%.12g,%.6g,%.6g,%d\n", r.oracle_value,
                  r.artifact_value, r.deviation, r.tolerance, r.pass ? 1 : 0);
    out << r.case_id << buf;
  }
}

long double elevation_deg(long double dx, long double dy, long double z) {
  const long double s = std::hypot(dx, dy);
  if (s == 0.0L) {
    return 90.0L;
  }
  return std::atan2(z, s) * 180.0L / kPi;
}

long double los_probability(long double theta_deg, long double a, long double b) {
  return 1.0L / (1.0L + a * std::exp(-b * (theta_deg - a)));
}

long double lower_bound_rate(const Scenario& sc, const Eigen::Vector2d& q,
                             double z, const Eigen::Vector2d& w, double power,
                             bool always_los) {
  const long double s = ldist(q, w);
  const long double d2 = s * s + static_cast<long double>(z) * z;
  const long double pl =
      always_los ? 1.0L
                 : los_probability(elevation_deg(q.x() - w.x(), q.y() - w.y(), z),
                                   sc.cp.a, sc.cp.b);
  const long double gamma = static_cast<long double>(sc.cp.rho0) / sc.cp.sigma2;
  const long double snr = power * gamma / std::pow(d2, sc.cp.alpha_L / 2.0L);
  return pl * std::log1p(snr) / std::log(2.0L);
}

long double interference(const Scenario& sc, const Eigen::Vector2d& q, double z,
                         double power, bool always_los) {
  const Eigen::Vector2d& w = sc.primary.w;
  const long double s = ldist(q, w);
  const long double d2 = s * s + static_cast<long double>(z) * z;
  const long double pl =
      always_los ? 1.0L
                 : los_probability(elevation_deg(q.x() - w.x(), q.y() - w.y(), z),
                                   sc.cp.a, sc.cp.b);
  const long double los = sc.cp.rho0 / std::pow(d2, sc.cp.alpha_L / 2.0L);
  const long double nlos =
      static_cast<long double>(sc.cp.rho0) * sc.cp.mu /
      std::pow(d2, sc.cp.alpha_N / 2.0L);
  return power * (pl * los + (1.0L - pl) * nlos);
}

double objective(const DecisionVariables& dv, const Scenario& sc,
                 bool always_los) {
  long double sum = 0.0L;
  for (int n = 0; n < sc.N; ++n) {
    for (int r = 0; r < sc.R(); ++r) {
      sum += dv.schedule(r, n) *
             lower_bound_rate(sc, dv.q.col(n), dv.z(n), sc.users[r].w,
                              dv.power(n), always_los);
    }
  }
  return static_cast<double>(sum / sc.N);
}

ScheduleResult brute_force_schedule(const Eigen::MatrixXd& rates) {
  const int R = static_cast<int>(rates.rows());
  const int N = static_cast<int>(rates.cols());
  if (R < 1 || N < 1 || N * std::log(R + 1.0) > std::log(1e6) + 1e-12) {
    throw std::invalid_argument("brute_force_schedule: instance too large");
  }
  // Choice per slot: 0 means idle, r + 1 means user r.
  std::vector<int> choice(N, 0);
  ScheduleResult best;
  best.value = -1.0;
  while (true) {
    double v = 0.0;
    for (int n = 0; n < N; ++n) {
      v += choice[n] > 0 ? rates(choice[n] - 1, n) : 0.0;
    }
    v /= N;
    if (v > best.value) {
      best.value = v;
      best.schedule = Eigen::MatrixXd::Zero(R, N);
      for (int n = 0; n < N; ++n) {
        if (choice[n] > 0) {
          best.schedule(choice[n] - 1, n) = 1.0;
        }
      }
    }
    int n = 0;
    while (n < N && ++choice[n] > R) {
      choice[n] = 0;
      ++n;
    }
    if (n == N) {
      break;
    }
  }
  return best;
}

PowerResult grid_search_power(const DecisionVariables& dv, const Scenario& sc,
                              double step, bool always_los) {
  const int N = sc.N;
  if (N > 3 || N < 1) {
    throw std::invalid_argument("grid_search_power: N must be 1..3");
  }
  const int K = static_cast<int>(std::floor(sc.P_max / step + 1e-9));
  // Per-slot value and interference cap on the grid.
  std::vector<std::vector<double>> value(N, std::vector<double>(K + 1, 0.0));
  std::vector<int> cap(N, K);
  for (int n = 0; n < N; ++n) {
    const long double c = interference(sc, dv.q.col(n), dv.z(n), 1.0, always_los);
    for (int k = 0; k <= K; ++k) {
      const double P = k * step;
      if (c * P > sc.Gamma) {
        cap[n] = std::min(cap[n], k - 1);
      }
      long double v = 0.0L;
      for (int r = 0; r < sc.R(); ++r) {
        v += dv.schedule(r, n) * lower_bound_rate(sc, dv.q.col(n), dv.z(n),
                                                  sc.users[r].w, P, always_los);
      }
      value[n][k] = static_cast<double>(v / N);
    }
  }
  const int total = static_cast<int>(std::floor(N * sc.P_ave / step + 1e-9));
  PowerResult best;
  best.value = -1.0;
  std::vector<int> k(N, 0);
  std::function<void(int, int, double)> rec = [&](int n, int used, double acc) {
    if (n == N) {
      if (acc > best.value) {
        best.value = acc;
        best.power.resize(N);
        for (int m = 0; m < N; ++m) {
          best.power(m) = k[m] * step;
        }
      }
      return;
    }
    for (k[n] = 0; k[n] <= cap[n] && used + k[n] <= total; ++k[n]) {
      rec(n + 1, used + k[n], acc + value[n][k[n]]);
    }
  };
  rec(0, 0, 0.0);
  return best;
}

Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x,
                            double h) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double hi = h * scale(x[i]);
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += hi;
    xm[i] -= hi;
    g[i] = (f(xp) - f(xm)) / (2.0 * hi);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& x,
                           double h) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double hi = h * scale(x[i]);
      const double hj = h * scale(x[j]);
      auto at = [&](double si, double sj) {
        Eigen::VectorXd y = x;
        y[i] += si * hi;
        y[j] += sj * hj;
        return f(y);
      };
      H(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
    }
  }
  return 0.5 * (H + H.transpose());
}

double finite_difference_check(const ScalarFn& f, const Eigen::VectorXd& grad,
                               const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd fd = fd_gradient(f, x, h);
  const double norm = std::max(1e-12, fd.cwiseAbs().maxCoeff());
  return (grad - fd).cwiseAbs().maxCoeff() / norm;
}

double horizontal_power(double speed, const RotorcraftParams& rp) {
  const double v2 = speed * speed;
  const double v04 = std::pow(rp.v0, 4);
  const double blade = rp.P0 * (1.0 + 3.0 * v2 / (rp.U_tip * rp.U_tip));
  const double parasite = 0.5 * rp.d0 * rp.rho * rp.s * rp.A * v2 * speed;
  const double induced =
      rp.P1 * std::sqrt(std::sqrt(1.0 + v2 * v2 / (4.0 * v04)) -
                        v2 / (2.0 * rp.v0 * rp.v0));
  return blade + parasite + induced;
}

} // namespace uavcrn::oracle
