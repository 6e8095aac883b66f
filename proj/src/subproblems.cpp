#include "uavcrn/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace uavcrn {

namespace {

using solver::LinearRow;
using solver::LocalEval;
using solver::Oracle;
using solver::SmoothConstraint;
using solver::SmoothProgram;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kNudge = 1e-7;       // relative start margin on slacks
constexpr double kAngleNudge = 1e-7;  // start margin on angle slacks [deg]
constexpr double kSmoothDist = 1e-3;  // smoothing of horizontal distances [m]
constexpr double kSmoothSpeed = 1e-9; // smoothing of the parasite-power norm
constexpr double kActive = 1e-12;     // schedule weight treated as zero
constexpr double kCapBackoff = 1e-6;  // power stays this far below the cap
constexpr double kTightNudge = 1e-9;  // start margin on the slacks of D

struct VarTable {
  std::vector<double> lo, hi, x0;

  int add(double l, double h, double start) {
    lo.push_back(l);
    hi.push_back(h);
    x0.push_back(start);
    return static_cast<int>(x0.size()) - 1;
  }

  SmoothProgram program() const {
    const int n = static_cast<int>(x0.size());
    SmoothProgram p(n);
    Eigen::VectorXd s(n);
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(lo[j]) || std::isfinite(hi[j])) {
        p.set_bounds(j, lo[j], hi[j]);
      }
      s[j] = x0[j];
    }
    p.set_start(s);
    return p;
  }
};

void add_smooth(SmoothProgram& p, std::vector<int> support, Oracle o,
                const char* family) {
  p.add_smooth_inequality({std::move(support), std::move(o), family});
}

void add_row(SmoothProgram& p, std::vector<int> idx, std::vector<double> coef,
             double rhs, const char* family) {
  p.add_linear_inequality({std::move(idx), std::move(coef), rhs, family});
}

// ||sum_k coef_k q_k||^2 / scale^2 - 1 over local pairs (x_k, y_k).
Oracle norm_sq_oracle(std::vector<double> coef, double scale) {
  const double s2 = scale * scale;
  return [coef = std::move(coef), s2](const Eigen::VectorXd& xl, bool want_h,
                                      LocalEval& out) {
    const int k = static_cast<int>(coef.size());
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    for (int i = 0; i < k; ++i) {
      v += coef[i] * Eigen::Vector2d(xl[2 * i], xl[2 * i + 1]);
    }
    out.value = v.squaredNorm() / s2 - 1.0;
    out.grad.resize(2 * k);
    for (int i = 0; i < k; ++i) {
      out.grad[2 * i] = 2.0 * coef[i] * v.x() / s2;
      out.grad[2 * i + 1] = 2.0 * coef[i] * v.y() / s2;
    }
    if (want_h) {
      out.hess.setZero(2 * k, 2 * k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          const double h = 2.0 * coef[i] * coef[j] / s2;
          out.hess(2 * i, 2 * j) = h;
          out.hess(2 * i + 1, 2 * j + 1) = h;
        }
      }
    }
    return true;
  };
}

// 1/lambda^2 - [tangent of lambda^2 + ||v||^2/v0^2], v = (q_b - q_a)/dt.
// Local layout [lambda, qa_x, qa_y, qb_x, qb_y], or [lambda] when the slot
// cannot move.
Oracle lambda_oracle(double lambda_k, Eigen::Vector2d v_k, double v0,
                     double dt, bool moving) {
  return [=](const Eigen::VectorXd& xl, bool want_h, LocalEval& out) {
    const double lam = xl[0];
    if (!(lam > 0.0)) {
      return false;
    }
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    if (moving) {
      v = (xl.segment<2>(3) - xl.segment<2>(1)) / dt;
    }
    out.value = 1.0 / (lam * lam) -
                sca::lambda_lower_bound(lam, v, lambda_k, v_k, v0);
    const int k = moving ? 5 : 1;
    out.grad.resize(k);
    out.grad[0] = -2.0 / (lam * lam * lam) - 2.0 * lambda_k;
    if (moving) {
      const Eigen::Vector2d gv = -2.0 * v_k / (v0 * v0 * dt);
      out.grad.segment<2>(1) = -gv;
      out.grad.segment<2>(3) = gv;
    }
    if (want_h) {
      out.hess.setZero(k, k);
      out.hess(0, 0) = 6.0 / (lam * lam * lam * lam);
    }
    return true;
  };
}

// Average horizontal propulsion power over the horizon, relative to budget.
// Local layout: all route points (x, y) pairs, then all lambda values.
Oracle energy_oracle(const Scenario& sc, int L) {
  const RotorcraftParams rp = sc.rp;
  const int N = sc.N;
  const double dt = sc.delta_t;
  const double budget = sc.P_hor_ave;
  return [=](const Eigen::VectorXd& xl, bool want_h, LocalEval& out) {
    const double kpar = 0.5 * rp.d0 * rp.rho * rp.s * rp.A;
    const double u2 = rp.U_tip * rp.U_tip;
    const double eps2 = kSmoothSpeed * kSmoothSpeed;
    const double scale = 1.0 / (N * budget);
    out.grad.setZero(3 * L);
    if (want_h) {
      out.hess.setZero(3 * L, 3 * L);
    }
    double total = (N - L) * (rp.P0 + rp.P1);
    for (int n = 0; n < L; ++n) {
      const int a = n;
      const int b = (n + 1) % L;
      const double lam = xl[2 * L + n];
      total += rp.P1 * lam;
      out.grad[2 * L + n] = rp.P1 * scale;
      if (a == b) {
        total += rp.P0 + kpar * std::pow(eps2, 1.5);
        continue;
      }
      const Eigen::Vector2d v =
          (xl.segment<2>(2 * b) - xl.segment<2>(2 * a)) / dt;
      const double w2 = v.squaredNorm() + eps2;
      const double w = std::sqrt(w2);
      total += rp.P0 * (1.0 + 3.0 * v.squaredNorm() / u2) + kpar * w2 * w;
      const Eigen::Vector2d gphi = (6.0 * rp.P0 / u2 + 3.0 * kpar * w) * v;
      out.grad.segment<2>(2 * b) += scale * gphi / dt;
      out.grad.segment<2>(2 * a) -= scale * gphi / dt;
      if (want_h) {
        const Eigen::Matrix2d hphi =
            (6.0 * rp.P0 / u2 + 3.0 * kpar * w) *
                Eigen::Matrix2d::Identity() +
            3.0 * kpar / w * v * v.transpose();
        const Eigen::Matrix2d hs = scale * hphi / (dt * dt);
        out.hess.block<2, 2>(2 * b, 2 * b) += hs;
        out.hess.block<2, 2>(2 * a, 2 * a) += hs;
        out.hess.block<2, 2>(2 * a, 2 * b) -= hs;
        out.hess.block<2, 2>(2 * b, 2 * a) -= hs;
      }
    }
    out.value = total * scale - 1.0;
    return true;
  };
}

// theta >= 90 - deg * h(u.(q - w)/z), h = atan on [0, inf), identity below.
// A convex restriction of theta >= deg * atan(z / ||q - w||), exact where
// u points from w to the expansion point. Local layout [q_x, q_y, theta].
Oracle angle_restriction_oracle(Eigen::Vector2d u, Eigen::Vector2d w,
                                double z) {
  return [=](const Eigen::VectorXd& xl, bool want_h, LocalEval& out) {
    const double y = u.dot(xl.head<2>() - w) / z;
    double h = y;
    double h1 = 1.0;
    double h2 = 0.0;
    if (y >= 0.0) {
      h = std::atan(y);
      h1 = 1.0 / (1.0 + y * y);
      h2 = -2.0 * y * h1 * h1;
    }
    out.value = 90.0 - kDeg * h - xl[2];
    out.grad.resize(3);
    out.grad.head<2>() = -kDeg * h1 * u / z;
    out.grad[2] = -1.0;
    if (want_h) {
      out.hess.setZero(3, 3);
      out.hess.topLeftCorner<2, 2>() = -kDeg * h2 * u * u.transpose() / (z * z);
    }
    return true;
  };
}

// angle <= deg * [atan(z/s_k) - z (s(q) - s_k) / (s_k^2 + z^2)], s smoothed.
// Local layout [q_x, q_y, angle].
Oracle atan_linear_oracle(Eigen::Vector2d w, double z, double s_k) {
  return [=](const Eigen::VectorXd& xl, bool want_h, LocalEval& out) {
    const Eigen::Vector2d d = xl.head<2>() - w;
    const double s = std::sqrt(d.squaredNorm() + kSmoothDist * kSmoothDist);
    const double slope = z / (s_k * s_k + z * z);
    out.value = xl[2] - kDeg * sca::F_atan_q(s, s_k, z);
    out.grad.resize(3);
    out.grad.head<2>() = kDeg * slope * d / s;
    out.grad[2] = 1.0;
    if (want_h) {
      out.hess.setZero(3, 3);
      out.hess.topLeftCorner<2, 2>() =
          kDeg * slope *
          (Eigen::Matrix2d::Identity() - d * d.transpose() / (s * s)) / s;
    }
    return true;
  };
}

// cL / (pL tL) + cN / (pN tN) - 1, local [pL, tL, pN, tN]; or cL / tL - 1 with
// local [tL] when the link is always LoS.
Oracle interference_oracle(double cL, double cN, bool plos) {
  return [=](const Eigen::VectorXd& xl, bool want_h, LocalEval& out) {
    if (!plos) {
      const double t = xl[0];
      if (!(t > 0.0)) {
        return false;
      }
      out.value = cL / t - 1.0;
      out.grad.resize(1);
      out.grad[0] = -cL / (t * t);
      if (want_h) {
        out.hess.resize(1, 1);
        out.hess(0, 0) = 2.0 * cL / (t * t * t);
      }
      return true;
    }
    const double pl = xl[0], tl = xl[1], pn = xl[2], tn = xl[3];
    if (!(pl > 0.0 && tl > 0.0 && pn > 0.0 && tn > 0.0)) {
      return false;
    }
    out.value = cL / (pl * tl) + cN / (pn * tn) - 1.0;
    out.grad.resize(4);
    out.grad << -cL / (pl * pl * tl), -cL / (pl * tl * tl),
        -cN / (pn * pn * tn), -cN / (pn * tn * tn);
    if (want_h) {
      out.hess.setZero(4, 4);
      out.hess(0, 0) = 2.0 * cL / (pl * pl * pl * tl);
      out.hess(1, 1) = 2.0 * cL / (pl * tl * tl * tl);
      out.hess(0, 1) = out.hess(1, 0) = cL / (pl * pl * tl * tl);
      out.hess(2, 2) = 2.0 * cN / (pn * pn * pn * tn);
      out.hess(3, 3) = 2.0 * cN / (pn * tn * tn * tn);
      out.hess(2, 3) = out.hess(3, 2) = cN / (pn * pn * tn * tn);
    }
    return true;
  };
}

// (1 + K exp(-b theta)) / x_k - x, local [theta, x].
Oracle los_slack_oracle(double K, double b, double x_k) {
  return [=](const Eigen::VectorXd& xl, bool want_h, LocalEval& out) {
    const double e = K * std::exp(-b * xl[0]) / x_k;
    out.value = 1.0 / x_k + e - xl[1];
    out.grad.resize(2);
    out.grad << -b * e, -1.0;
    if (want_h) {
      out.hess.setZero(2, 2);
      out.hess(0, 0) = b * b * e;
    }
    return true;
  };
}

// (||q - w||^2 + z^2)^(alpha/2) / t_k - t, local [q_x, q_y, t].
Oracle distance_power_q_oracle(Eigen::Vector2d w, double z, double alpha,
                               double t_k) {
  return [=](const Eigen::VectorXd& xl, bool want_h, LocalEval& out) {
    const Eigen::Vector2d d = xl.head<2>() - w;
    const double D2 = d.squaredNorm() + z * z;
    const double p1 = std::pow(D2, 0.5 * alpha - 1.0);
    out.value = D2 * p1 / t_k - xl[2];
    out.grad.resize(3);
    out.grad.head<2>() = alpha * p1 * d / t_k;
    out.grad[2] = -1.0;
    if (want_h) {
      out.hess.setZero(3, 3);
      out.hess.topLeftCorner<2, 2>() =
          (alpha * p1 * Eigen::Matrix2d::Identity() +
           alpha * (alpha - 2.0) * p1 / D2 * d * d.transpose()) /
          t_k;
    }
    return true;
  };
}

// (s^2 + z^2)^(alpha/2) / t_k - t, local [z, t].
Oracle distance_power_z_oracle(double s, double alpha, double t_k) {
  return [=](const Eigen::VectorXd& xl, bool want_h, LocalEval& out) {
    const double z = xl[0];
    const double D2 = s * s + z * z;
    const double p1 = std::pow(D2, 0.5 * alpha - 1.0);
    out.value = D2 * p1 / t_k - xl[1];
    out.grad.resize(2);
    out.grad << alpha * p1 * z / t_k, -1.0;
    if (want_h) {
      out.hess.setZero(2, 2);
      out.hess(0, 0) =
          (alpha * p1 + alpha * (alpha - 2.0) * p1 / D2 * z * z) / t_k;
    }
    return true;
  };
}

// angle - deg * atan(z / s), local [z, angle]; convex for z > 0.
Oracle atan_z_oracle(double s) {
  return [=](const Eigen::VectorXd& xl, bool want_h, LocalEval& out) {
    const double z = xl[0];
    if (!(z > 0.0)) {
      return false;
    }
    const double den = s * s + z * z;
    out.value = xl[1] - kDeg * std::atan(z / s);
    out.grad.resize(2);
    out.grad << -kDeg * s / den, 1.0;
    if (want_h) {
      out.hess.setZero(2, 2);
      out.hess(0, 0) = kDeg * 2.0 * z * s / (den * den);
    }
    return true;
  };
}

// y - sum_r w_r log2(1 + k_r P), local [P, y].
Oracle log_rate_oracle(std::vector<double> w, std::vector<double> k) {
  return [w = std::move(w), k = std::move(k)](const Eigen::VectorXd& xl,
                                               bool want_h, LocalEval& out) {
    const double P = xl[0];
    double f = 0.0, g = 0.0, h = 0.0;
    for (std::size_t r = 0; r < w.size(); ++r) {
      const double arg = 1.0 + k[r] * P;
      if (!(arg > 0.0)) {
        return false;
      }
      f += w[r] * std::log2(arg);
      g += w[r] * k[r] / (arg * std::numbers::ln2);
      h -= w[r] * k[r] * k[r] / (arg * arg * std::numbers::ln2);
    }
    out.value = xl[1] - f;
    out.grad.resize(2);
    out.grad << -g, 1.0;
    if (want_h) {
      out.hess.setZero(2, 2);
      out.hess(0, 0) = -h;
    }
    return true;
  };
}

double los_inverse(double theta_deg, const ChannelParams& cp) {
  return 1.0 + cp.a * std::exp(cp.a * cp.b) * std::exp(-cp.b * theta_deg);
}

double nlos_inverse(double theta_deg, const ChannelParams& cp) {
  return 1.0 + std::exp(-cp.a * cp.b) / cp.a * std::exp(cp.b * theta_deg);
}

// Shared pieces of the two trajectory programs: slack variables for the
// interference link to D and for every scheduled user link.
struct DBlock {
  int n = 0;
  int th = -1, ph = -1, pl = -1, pn = -1, tl = -1, tn = -1;
  double th_k = 0.0, ph_k = 0.0, pl_k = 1.0, pn_k = 1.0, tl_k = 1.0, tn_k = 1.0;
};

struct UBlock {
  int r = 0, n = 0;
  int th = -1, x = -1, t = -1;
  double x_k = 1.0, t_k = 1.0;
  sca::RateTaylor rt;
};

// p_L <= 1 + K1 F1(theta) and p_N <= 1 + K2 F2(phi), both divided by the
// expansion value of the slack.
void add_los_rows(SmoothProgram& p, const DBlock& b, const ChannelParams& cp) {
  const double K1 = cp.a * std::exp(cp.a * cp.b);
  const double K2 = std::exp(-cp.a * cp.b) / cp.a;
  const double d1 = sca::dF1(b.th_k, cp.b);
  const double e1 = std::exp(-cp.b * b.th_k);
  add_row(p, {b.pl, b.th}, {1.0, -K1 * d1 / b.pl_k},
          (1.0 + K1 * (e1 - d1 * b.th_k)) / b.pl_k, "los_slack_D");
  const double d2 = sca::dF2(b.ph_k, cp.b);
  const double e2 = std::exp(cp.b * b.ph_k);
  add_row(p, {b.pn, b.ph}, {1.0, -K2 * d2 / b.pn_k},
          (1.0 + K2 * (e2 - d2 * b.ph_k)) / b.pn_k, "nlos_slack_D");
}

void add_interference(SmoothProgram& p, const DBlock& b, const Scenario& sc,
                      double power, bool plos) {
  const double base = power * sc.cp.rho0 / sc.Gamma;
  if (plos) {
    const double cL = base / (b.pl_k * b.tl_k);
    const double cN = base * sc.cp.mu / (b.pn_k * b.tn_k);
    add_smooth(p, {b.pl, b.tl, b.pn, b.tn}, interference_oracle(cL, cN, true),
               "interference");
  } else {
    add_smooth(p, {b.tl}, interference_oracle(base / b.tl_k, 0.0, false),
               "interference");
  }
}

void add_rate_objective(SmoothProgram& p, const std::vector<UBlock>& ub,
                        const DecisionVariables& dv, int N, bool plos) {
  double offset = 0.0;
  for (const auto& u : ub) {
    const double w = dv.schedule(u.r, u.n) / N;
    p.add_objective(u.t, w * u.rt.B * u.t_k);
    offset += w * (u.rt.A - u.rt.B * u.t_k);
    if (plos) {
      p.add_objective(u.x, w * u.rt.C * u.x_k);
      offset -= w * u.rt.C * u.x_k;
    }
  }
  p.set_objective_offset(offset);
}

bool slot_active(const DecisionVariables& dv, int r, int n) {
  return dv.schedule(r, n) > kActive && dv.power(n) > 0.0;
}

} // namespace

// --------------------------------------------------------------------------

Eigen::MatrixXd binarize_schedule(const Eigen::MatrixXd& weights) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(weights.rows(), weights.cols());
  for (int n = 0; n < weights.cols(); ++n) {
    int best = 0;
    for (int r = 1; r < weights.rows(); ++r) {
      if (weights(r, n) > weights(best, n) + 1e-9) {
        best = r;
      }
    }
    if (weights.rows() > 0) {
      out(best, n) = 1.0;
    }
  }
  return out;
}

bool is_binary(const Eigen::MatrixXd& schedule, double tol) {
  for (int i = 0; i < schedule.size(); ++i) {
    const double a = schedule.data()[i];
    if (std::min(std::abs(a), std::abs(a - 1.0)) > tol) {
      return false;
    }
  }
  return true;
}

BuiltProgram build_scheduling(const DecisionVariables& dv, const Scenario& sc,
                              LosModel model) {
  const int R = sc.R();
  const int N = sc.N;
  const Eigen::MatrixXd rates = lower_bound_rates(dv, sc, model);
  VarTable vt;
  for (int n = 0; n < N; ++n) {
    for (int r = 0; r < R; ++r) {
      vt.add(0.0, 1.0, 1.0 / (R + 1));
    }
  }
  BuiltProgram bp;
  bp.program = vt.program();
  for (int n = 0; n < N; ++n) {
    std::vector<int> idx;
    for (int r = 0; r < R; ++r) {
      bp.program.set_objective(r + R * n, rates(r, n) / N);
      idx.push_back(r + R * n);
    }
    add_row(bp.program, idx, std::vector<double>(R, 1.0), 1.0, "scheduling");
  }
  bp.num_rows = N;
  bp.decode = [base = dv, R, N](const Eigen::VectorXd& x) {
    DecisionVariables out = base;
    for (int n = 0; n < N; ++n) {
      for (int r = 0; r < R; ++r) {
        out.schedule(r, n) = std::clamp(x[r + R * n], 0.0, 1.0);
      }
    }
    return out;
  };
  return bp;
}

BuiltProgram build_power(const DecisionVariables& dv, const Scenario& sc,
                         LosModel model) {
  const int R = sc.R();
  const int N = sc.N;
  const Eigen::VectorXd c = interference_coefficients(dv, sc, model);
  VarTable vt;
  std::vector<int> pv(N, -1), yv(N, -1);
  std::vector<std::vector<double>> W(N), K(N);
  for (int n = 0; n < N; ++n) {
    const AirPosition p{dv.q.col(n), dv.z(n)};
    const double ub =
        std::min(sc.P_max,
                 c[n] > 0.0 ? (1.0 - kCapBackoff) * sc.Gamma / c[n] : kInf);
    if (!(ub > 0.0)) {
      continue;
    }
    const double p0 = 0.5 * std::min(ub, sc.P_ave);
    pv[n] = vt.add(0.0, ub, p0);
    double f0 = 0.0;
    for (int r = 0; r < R; ++r) {
      const double w =
          dv.schedule(r, n) * link_los_probability(p, sc.users[r], sc.cp, model);
      if (w > kActive) {
        const double k =
            sc.cp.gamma() / std::pow(link_distance(p, sc.users[r]), sc.cp.alpha_L);
        W[n].push_back(w);
        K[n].push_back(k);
        f0 += w * std::log2(1.0 + k * p0);
      }
    }
    if (!W[n].empty()) {
      yv[n] = vt.add(-kInf, kInf, f0 - 1.0);
    }
  }
  BuiltProgram bp;
  bp.program = vt.program();
  std::vector<int> all;
  for (int n = 0; n < N; ++n) {
    if (pv[n] >= 0) {
      all.push_back(pv[n]);
    }
    if (yv[n] >= 0) {
      bp.program.set_objective(yv[n], 1.0 / N);
      add_smooth(bp.program, {pv[n], yv[n]}, log_rate_oracle(W[n], K[n]),
                 "rate_epigraph");
      ++bp.num_smooth;
    }
  }
  if (!all.empty()) {
    add_row(bp.program, all,
            std::vector<double>(all.size(), 1.0 / (N * sc.P_ave)), 1.0,
            "average_power");
    bp.num_rows = 1;
  }
  bp.decode = [base = dv, pv, N](const Eigen::VectorXd& x) {
    DecisionVariables out = base;
    for (int n = 0; n < N; ++n) {
      out.power(n) = pv[n] >= 0 ? std::max(0.0, x[pv[n]]) : 0.0;
    }
    return out;
  };
  return bp;
}

BuiltProgram build_horizontal(const DecisionVariables& dv, const Scenario& sc,
                              const sca::ExpansionPoint& ep, LosModel model) {
  const int N = sc.N;
  const int R = sc.R();
  const int L = N - 1;
  const bool plos = model == LosModel::Probabilistic;
  const ChannelParams& cp = sc.cp;
  const double K1 = cp.a * std::exp(cp.a * cp.b);
  auto pos = [L](int n) { return n % L; };

  VarTable vt;
  std::vector<int> qv(L);
  for (int m = 0; m < L; ++m) {
    qv[m] = vt.add(-kInf, kInf, ep.q(0, m));
    vt.add(-kInf, kInf, ep.q(1, m));
  }
  std::vector<int> lam(L);
  for (int n = 0; n < L; ++n) {
    lam[n] = vt.add(0.0, kInf, ep.lambda(n) * (1.0 + kNudge));
  }

  std::vector<DBlock> dblocks;
  for (int n = 0; n < N; ++n) {
    if (!(dv.power(n) > 0.0)) {
      continue;
    }
    DBlock b;
    b.n = n;
    const double z = ep.z(n);
    const double s_k = ep.s_D(n);
    b.tl_k = std::pow(ep.d_D(n), cp.alpha_L);
    b.tl = vt.add(0.0, kInf, 1.0 - kTightNudge);
    if (plos) {
      b.th_k = ep.theta_D(n);
      b.ph_k = ep.phi_D(n);
      b.pl_k = los_inverse(b.th_k, cp);
      b.pn_k = nlos_inverse(b.ph_k, cp);
      b.tn_k = std::pow(ep.d_D(n), cp.alpha_N);
      const double th0 = b.th_k + kAngleNudge;
      const double se = std::hypot(s_k, kSmoothDist);
      const double ph0 = kDeg * std::atan(z / se) - kAngleNudge;
      b.th = vt.add(0.0, 180.0, th0);
      b.ph = vt.add(-90.0, 90.0, ph0);
      b.pl = vt.add(0.0, kInf,
                    (1.0 + K1 * sca::F1(th0, b.th_k, cp.b)) / b.pl_k *
                        (1.0 - kTightNudge));
      b.pn = vt.add(0.0, kInf,
                    (1.0 + std::exp(-cp.a * cp.b) / cp.a *
                               sca::F2(ph0, b.ph_k, cp.b)) /
                        b.pn_k * (1.0 - kTightNudge));
      b.tn = vt.add(0.0, kInf, 1.0 - kTightNudge);
    }
    dblocks.push_back(b);
  }

  std::vector<UBlock> ublocks;
  for (int n = 0; n < N; ++n) {
    for (int r = 0; r < R; ++r) {
      if (!slot_active(dv, r, n)) {
        continue;
      }
      UBlock u;
      u.r = r;
      u.n = n;
      u.t_k = ep.t_L(r, n);
      u.x_k = plos ? ep.x_L(r, n) : 1.0;
      u.rt = sca::rate_taylor(dv.power(n) * cp.gamma(), u.x_k, u.t_k);
      if (plos) {
        const double se = std::hypot(ep.s_U(r, n), kSmoothDist);
        const double th0 = kDeg * std::atan(ep.z(n) / se) - kAngleNudge;
        u.th = vt.add(-90.0, 90.0, th0);
        u.x = vt.add(0.0, kInf,
                     (1.0 + K1 * std::exp(-cp.b * th0)) / u.x_k * (1.0 + kNudge));
      }
      u.t = vt.add(0.0, kInf, 1.0 + kNudge);
      ublocks.push_back(u);
    }
  }

  BuiltProgram bp;
  SmoothProgram& p = bp.program;
  p = vt.program();
  add_rate_objective(p, ublocks, dv, N, plos);

  auto qsupport = [&](const std::map<int, double>& combo,
                      std::vector<int>& sup, std::vector<double>& coef) {
    for (const auto& [m, c] : combo) {
      if (c != 0.0) {
        sup.push_back(qv[m]);
        sup.push_back(qv[m] + 1);
        coef.push_back(c);
      }
    }
  };
  // Speed and acceleration.
  for (int n = 0; n < L; ++n) {
    std::map<int, double> combo;
    combo[pos(n + 1)] += 1.0;
    combo[pos(n)] -= 1.0;
    std::vector<int> sup;
    std::vector<double> coef;
    qsupport(combo, sup, coef);
    if (!sup.empty()) {
      add_smooth(p, sup, norm_sq_oracle(coef, sc.V_max * sc.delta_t),
                 "horizontal_speed");
    }
  }
  for (int n = 0; n + 1 < L; ++n) {
    std::map<int, double> combo;
    combo[pos(n + 2)] += 1.0;
    combo[pos(n + 1)] -= 2.0;
    combo[pos(n)] += 1.0;
    std::vector<int> sup;
    std::vector<double> coef;
    qsupport(combo, sup, coef);
    if (!sup.empty()) {
      add_smooth(p, sup,
                 norm_sq_oracle(coef, sc.a_max * sc.delta_t * sc.delta_t),
                 "horizontal_acceleration");
    }
  }
  // Induced-velocity slack and the propulsion budget.
  for (int n = 0; n < L; ++n) {
    const int a = pos(n);
    const int b = pos(n + 1);
    const bool moving = a != b;
    std::vector<int> sup{lam[n]};
    if (moving) {
      sup.insert(sup.end(), {qv[a], qv[a] + 1, qv[b], qv[b] + 1});
    }
    add_smooth(p, sup,
               lambda_oracle(ep.lambda(n), ep.v_xy.col(n), sc.rp.v0,
                             sc.delta_t, moving),
               "induced_slack");
  }
  {
    std::vector<int> sup;
    for (int m = 0; m < L; ++m) {
      sup.push_back(qv[m]);
      sup.push_back(qv[m] + 1);
    }
    for (int n = 0; n < L; ++n) {
      sup.push_back(lam[n]);
    }
    add_smooth(p, sup, energy_oracle(sc, L), "horizontal_energy");
  }
  // Interference at D.
  const Eigen::Vector2d wD = sc.primary.w;
  for (const auto& b : dblocks) {
    const int m = pos(b.n);
    const Eigen::Vector2d qk = ep.q.col(b.n);
    const double z = ep.z(b.n);
    const double s_k = ep.s_D(b.n);
    auto add_dist_row = [&](int var, double alpha, double t_k,
                            const char* fam) {
      const Eigen::Vector2d g = sca::dF3(qk, wD, z, alpha);
      const double f0 = std::pow((qk - wD).squaredNorm() + z * z,
                                 0.5 * alpha);
      add_row(p, {var, qv[m], qv[m] + 1}, {1.0, -g.x() / t_k, -g.y() / t_k},
              (f0 - g.dot(qk)) / t_k, fam);
    };
    add_dist_row(b.tl, cp.alpha_L, b.tl_k, "distance_slack_D");
    if (plos) {
      add_dist_row(b.tn, cp.alpha_N, b.tn_k, "distance_slack_D");
      const Eigen::Vector2d u =
          s_k > 1e-9 ? Eigen::Vector2d((qk - wD) / s_k) : Eigen::Vector2d(1.0, 0.0);
      add_smooth(p, {qv[m], qv[m] + 1, b.th},
                 angle_restriction_oracle(u, wD, z), "angle_upper_D");
      add_smooth(p, {qv[m], qv[m] + 1, b.ph},
                 atan_linear_oracle(wD, z, std::hypot(s_k, kSmoothDist)),
                 "angle_lower_D");
      add_los_rows(p, b, cp);
    }
    add_interference(p, b, sc, dv.power(b.n), plos);
  }
  // Rate slacks of scheduled users.
  for (const auto& u : ublocks) {
    const int m = pos(u.n);
    const Eigen::Vector2d w = sc.users[u.r].w;
    const double z = ep.z(u.n);
    add_smooth(p, {qv[m], qv[m] + 1, u.t},
               distance_power_q_oracle(w, z, cp.alpha_L, u.t_k),
               "distance_slack_U");
    if (plos) {
      add_smooth(p, {qv[m], qv[m] + 1, u.th},
                 atan_linear_oracle(w, z, std::hypot(ep.s_U(u.r, u.n), kSmoothDist)),
                 "angle_U");
      add_smooth(p, {u.th, u.x}, los_slack_oracle(K1, cp.b, u.x_k),
                 "los_slack_U");
    }
  }
  bp.num_smooth = static_cast<int>(p.smooth().size());
  bp.num_rows = static_cast<int>(p.linear_rows().size());
  bp.decode = [base = dv, sc, qv, L, N](const Eigen::VectorXd& x) {
    DecisionVariables out = base;
    for (int m = 0; m < L; ++m) {
      out.q(0, m) = x[qv[m]];
      out.q(1, m) = x[qv[m] + 1];
    }
    out.q.col(N - 1) = out.q.col(0);
    out.refresh_kinematics(sc.delta_t);
    refresh_angles(out, sc);
    return out;
  };
  return bp;
}

BuiltProgram build_vertical(const DecisionVariables& dv, const Scenario& sc,
                            const sca::ExpansionPoint& ep, LosModel model) {
  const int N = sc.N;
  const int R = sc.R();
  const int L = N - 1;
  const bool plos = model == LosModel::Probabilistic;
  const ChannelParams& cp = sc.cp;
  const double K1 = cp.a * std::exp(cp.a * cp.b);
  const double W = sc.rp.weight;
  auto pos = [L](int n) { return n % L; };

  VarTable vt;
  std::vector<int> zv(L), ev(L, -1);
  for (int m = 0; m < L; ++m) {
    zv[m] = vt.add(sc.H_min, sc.H_max, ep.z(m));
  }
  for (int n = 0; n < L; ++n) {
    if (pos(n + 1) == pos(n)) {
      continue;
    }
    const double climb = W * (ep.z(pos(n + 1)) - ep.z(pos(n))) / sc.delta_t;
    ev[n] = vt.add(0.0, kInf,
                   std::max(climb, 0.0) + kNudge * std::max(1.0, sc.P_ver_ave));
  }

  std::vector<DBlock> dblocks;
  for (int n = 0; n < N; ++n) {
    if (!(dv.power(n) > 0.0)) {
      continue;
    }
    DBlock b;
    b.n = n;
    b.tl_k = std::pow(ep.d_D(n), cp.alpha_L);
    b.tl = vt.add(0.0, kInf, 1.0 - kTightNudge);
    if (plos) {
      b.th_k = ep.theta_D(n);
      b.ph_k = ep.phi_D(n);
      b.pl_k = los_inverse(b.th_k, cp);
      b.pn_k = nlos_inverse(b.ph_k, cp);
      b.tn_k = std::pow(ep.d_D(n), cp.alpha_N);
      const double th0 = b.th_k + kAngleNudge;
      const double ph0 = b.ph_k - kAngleNudge;
      b.th = vt.add(0.0, 180.0, th0);
      b.ph = vt.add(-90.0, 90.0, ph0);
      b.pl = vt.add(0.0, kInf,
                    (1.0 + K1 * sca::F1(th0, b.th_k, cp.b)) / b.pl_k *
                        (1.0 - kTightNudge));
      b.pn = vt.add(0.0, kInf,
                    (1.0 + std::exp(-cp.a * cp.b) / cp.a *
                               sca::F2(ph0, b.ph_k, cp.b)) /
                        b.pn_k * (1.0 - kTightNudge));
      b.tn = vt.add(0.0, kInf, 1.0 - kTightNudge);
    }
    dblocks.push_back(b);
  }

  std::vector<UBlock> ublocks;
  for (int n = 0; n < N; ++n) {
    for (int r = 0; r < R; ++r) {
      if (!slot_active(dv, r, n)) {
        continue;
      }
      UBlock u;
      u.r = r;
      u.n = n;
      u.t_k = ep.t_L(r, n);
      u.x_k = plos ? ep.x_L(r, n) : 1.0;
      u.rt = sca::rate_taylor(dv.power(n) * cp.gamma(), u.x_k, u.t_k);
      if (plos) {
        const double th0 = ep.theta_U(r, n) - kAngleNudge;
        u.th = vt.add(-90.0, 90.0, th0);
        u.x = vt.add(0.0, kInf,
                     (1.0 + K1 * std::exp(-cp.b * th0)) / u.x_k * (1.0 + kNudge));
      }
      u.t = vt.add(0.0, kInf, 1.0 + kNudge);
      ublocks.push_back(u);
    }
  }

  BuiltProgram bp;
  SmoothProgram& p = bp.program;
  p = vt.program();
  add_rate_objective(p, ublocks, dv, N, plos);

  const double step = sc.Vhat_max * sc.delta_t;
  std::vector<int> climbs;
  for (int n = 0; n < L; ++n) {
    const int a = pos(n);
    const int b = pos(n + 1);
    if (a == b) {
      continue;
    }
    add_row(p, {zv[b], zv[a]}, {1.0, -1.0}, step, "vertical_speed");
    add_row(p, {zv[b], zv[a]}, {-1.0, 1.0}, step, "vertical_speed");
    add_row(p, {zv[b], zv[a], ev[n]},
            {W / sc.delta_t, -W / sc.delta_t, -1.0}, 0.0, "ascent_epigraph");
    climbs.push_back(ev[n]);
  }
  if (!climbs.empty()) {
    add_row(p, climbs,
            std::vector<double>(climbs.size(), 1.0 / (N * sc.P_ver_ave)), 1.0,
            "vertical_energy");
  }
  if (sc.ahat_max) {
    const double lim = *sc.ahat_max * sc.delta_t * sc.delta_t;
    for (int n = 0; n + 1 < L; ++n) {
      std::map<int, double> combo;
      combo[pos(n + 2)] += 1.0;
      combo[pos(n + 1)] -= 2.0;
      combo[pos(n)] += 1.0;
      std::vector<int> idx;
      std::vector<double> coef;
      for (const auto& [m, c] : combo) {
        if (c != 0.0) {
          idx.push_back(zv[m]);
          coef.push_back(c);
        }
      }
      if (idx.empty()) {
        continue;
      }
      std::vector<double> neg(coef.size());
      std::transform(coef.begin(), coef.end(), neg.begin(),
                     [](double c) { return -c; });
      add_row(p, idx, coef, lim, "vertical_acceleration");
      add_row(p, idx, neg, lim, "vertical_acceleration");
    }
  }

  for (const auto& b : dblocks) {
    const int m = pos(b.n);
    const double s = ep.s_D(b.n);
    const double zk = ep.z(b.n);
    auto add_dist_row = [&](int var, double alpha, double t_k) {
      const double g = sca::dF6(zk, s, alpha);
      const double f0 = std::pow(s * s + zk * zk, 0.5 * alpha);
      add_row(p, {var, zv[m]}, {1.0, -g / t_k}, (f0 - g * zk) / t_k,
              "distance_slack_D");
    };
    add_dist_row(b.tl, cp.alpha_L, b.tl_k);
    if (plos) {
      add_dist_row(b.tn, cp.alpha_N, b.tn_k);
      if (s > 0.0) {
        const double g = kDeg * sca::dF7(zk, s);
        add_row(p, {zv[m], b.th}, {g, -1.0},
                g * zk - kDeg * std::atan(zk / s), "angle_upper_D");
        add_smooth(p, {zv[m], b.ph}, atan_z_oracle(s), "angle_lower_D");
      } else {
        add_row(p, {b.th}, {-1.0}, -90.0, "angle_upper_D");
        add_row(p, {b.ph}, {1.0}, 90.0, "angle_lower_D");
      }
      add_los_rows(p, b, cp);
    }
    add_interference(p, b, sc, dv.power(b.n), plos);
  }
  for (const auto& u : ublocks) {
    const int m = pos(u.n);
    const double s = ep.s_U(u.r, u.n);
    add_smooth(p, {zv[m], u.t}, distance_power_z_oracle(s, cp.alpha_L, u.t_k),
               "distance_slack_U");
    if (plos) {
      if (s > 0.0) {
        add_smooth(p, {zv[m], u.th}, atan_z_oracle(s), "angle_U");
      } else {
        add_row(p, {u.th}, {1.0}, 90.0, "angle_U");
      }
      add_smooth(p, {u.th, u.x}, los_slack_oracle(K1, cp.b, u.x_k),
                 "los_slack_U");
    }
  }
  bp.num_smooth = static_cast<int>(p.smooth().size());
  bp.num_rows = static_cast<int>(p.linear_rows().size());
  bp.decode = [base = dv, sc, zv, L, N](const Eigen::VectorXd& x) {
    DecisionVariables out = base;
    for (int m = 0; m < L; ++m) {
      out.z(m) = std::clamp(x[zv[m]], sc.H_min, sc.H_max);
    }
    out.z(N - 1) = out.z(0);
    out.refresh_kinematics(sc.delta_t);
    refresh_angles(out, sc);
    return out;
  };
  return bp;
}

// --------------------------------------------------------------------------

namespace {

solver::SolverOptions solver_options(const BlockOptions& opt) {
  solver::SolverOptions so;
  so.tol = opt.solver_tol;
  so.max_newton = opt.max_newton;
  so.trace = opt.trace;
  return so;
}

bool admissible(const DecisionVariables& dv, const Scenario& sc,
                const BlockOptions& opt, std::string& why) {
  const AuditReport audit =
      feasibility_audit(dv, sc, opt.audit_tol, opt.los_model);
  if (!audit.feasible()) {
    why = "audit failed:\n" + audit.describe();
    return false;
  }
  if (audit.residual("interference") > 0.0) {
    why = "interference above threshold";
    return false;
  }
  return true;
}

BlockResult run_block(const DecisionVariables& dv, const Scenario& sc,
                      const BlockOptions& opt, const BuiltProgram& bp) {
  BlockResult res;
  res.dv = dv;
  res.objective_before = objective(dv, sc, opt.los_model);
  res.objective_after = res.objective_before;
  const solver::SolveResult sr = solver::solve(bp.program, solver_options(opt));
  res.status = sr.status;
  res.surrogate = bp.program.objective(sr.x);
  const bool failed = sr.status.status == solver::Status::Infeasible;
  if (failed) {
    res.stalled = true;
    res.note = "solver: " + solver::to_string(sr.status.status);
    return res;
  }
  DecisionVariables cand = bp.decode(sr.x);
  const double obj = objective(cand, sc, opt.los_model);
  std::string why;
  if (obj >= res.objective_before && admissible(cand, sc, opt, why)) {
    res.dv = std::move(cand);
    res.objective_after = obj;
    res.accepted = true;
  } else {
    res.note = why.empty() ? "no improvement" : why;
    res.stalled = sr.status.status == solver::Status::NumericalFailure;
  }
  return res;
}

} // namespace

BlockResult solve_scheduling(const DecisionVariables& dv, const Scenario& sc,
                             const BlockOptions& opt) {
  const BuiltProgram bp = build_scheduling(dv, sc, opt.los_model);
  BlockResult res;
  res.dv = dv;
  res.objective_before = objective(dv, sc, opt.los_model);
  res.objective_after = res.objective_before;
  const solver::SolveResult sr = solver::solve(bp.program, solver_options(opt));
  res.status = sr.status;
  res.surrogate = bp.program.objective(sr.x);
  if (sr.status.status == solver::Status::Infeasible) {
    res.stalled = true;
    res.note = "solver: infeasible";
    return res;
  }
  DecisionVariables relaxed = bp.decode(sr.x);
  DecisionVariables vertex = relaxed;
  vertex.schedule = binarize_schedule(relaxed.schedule);
  const double f_relaxed = objective(relaxed, sc, opt.los_model);
  const double f_vertex = objective(vertex, sc, opt.los_model);
  DecisionVariables& best = f_vertex >= f_relaxed ? vertex : relaxed;
  const double f_best = std::max(f_vertex, f_relaxed);
  std::string why;
  if (f_best >= res.objective_before && admissible(best, sc, opt, why)) {
    res.dv = std::move(best);
    res.objective_after = f_best;
    res.accepted = true;
  } else {
    res.note = why.empty() ? "no improvement" : why;
  }
  return res;
}

BlockResult solve_power(const DecisionVariables& dv, const Scenario& sc,
                        const BlockOptions& opt) {
  return run_block(dv, sc, opt, build_power(dv, sc, opt.los_model));
}

namespace {

template <class Builder>
BlockResult sca_block(const DecisionVariables& dv, const Scenario& sc,
                      const BlockOptions& opt, Builder build) {
  BlockResult total;
  DecisionVariables cur = dv;
  for (int it = 0; it < std::max(1, opt.inner_iters); ++it) {
    const sca::ExpansionPoint ep =
        sca::ExpansionPoint::from(cur, sc, opt.los_model);
    BlockResult step = run_block(cur, sc, opt, build(cur, sc, ep, opt.los_model));
    if (it == 0) {
      total = step;
    } else {
      total.dv = step.dv;
      total.objective_after = step.objective_after;
      total.status = step.status;
      total.surrogate = step.surrogate;
      total.note = step.note;
      total.stalled = total.stalled && step.stalled;
    }
    total.accepted = total.accepted || step.accepted;
    if (!step.accepted) {
      break;
    }
    cur = step.dv;
  }
  return total;
}

} // namespace

BlockResult solve_horizontal(const DecisionVariables& dv, const Scenario& sc,
                             const BlockOptions& opt) {
  return sca_block(dv, sc, opt, build_horizontal);
}

BlockResult solve_vertical(const DecisionVariables& dv, const Scenario& sc,
                           const BlockOptions& opt) {
  if (!(sc.H_min < sc.H_max) || !(sc.P_ver_ave > 0.0)) {
    BlockResult res;
    res.dv = dv;
    res.objective_before = res.objective_after =
        objective(dv, sc, opt.los_model);
    res.note = "altitude fixed";
    return res;
  }
  return sca_block(dv, sc, opt, build_vertical);
}

bool restore_interference(DecisionVariables& dv, const Scenario& sc,
                          const BlockOptions& opt, int max_steps) {
  auto worst = [&](const DecisionVariables& d) {
    return feasibility_audit(d, sc, opt.audit_tol, opt.los_model)
        .residual("interference");
  };
  for (int step = 0; step < max_steps; ++step) {
    const double before = worst(dv);
    if (before <= 0.0) {
      return true;
    }
    const sca::ExpansionPoint ep =
        sca::ExpansionPoint::from(dv, sc, opt.los_model);
    const BuiltProgram bp = build_horizontal(dv, sc, ep, opt.los_model);
    const solver::SolveResult sr =
        solver::solve(bp.program, solver_options(opt));
    DecisionVariables cand = bp.decode(sr.x);
    const double after = worst(cand);
    if (!(after < before)) {
      return false;
    }
    dv = std::move(cand);
  }
  return worst(dv) <= 0.0;
}

} // namespace uavcrn
