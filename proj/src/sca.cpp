#include "uavcrn/sca.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "uavcrn/model.hpp"

namespace uavcrn::sca {

ExpansionPoint ExpansionPoint::from(const DecisionVariables& dv,
                                    const Scenario& sc, LosModel model) {
  const int N = sc.N;
  const int R = sc.R();
  ExpansionPoint ep;
  ep.q = dv.q;
  ep.z = dv.z;
  ep.v_xy = dv.v_xy;
  ep.lambda.resize(N);
  ep.theta_D.resize(N);
  ep.phi_D.resize(N);
  ep.s_D.resize(N);
  ep.d_D.resize(N);
  ep.theta_U.resize(R, N);
  ep.s_U.resize(R, N);
  ep.x_L.resize(R, N);
  ep.t_L.resize(R, N);
  for (int n = 0; n < N; ++n) {
    const AirPosition p{dv.q.col(n), dv.z(n)};
    ep.lambda(n) = induced_factor(dv.v_xy.col(n).norm(), sc.rp.v0);
    ep.theta_D(n) = elevation_angle_deg(p, sc.primary);
    ep.phi_D(n) = ep.theta_D(n);
    ep.s_D(n) = (dv.q.col(n) - sc.primary.w).norm();
    ep.d_D(n) = link_distance(p, sc.primary);
    for (int r = 0; r < R; ++r) {
      const auto& u = sc.users[r];
      ep.theta_U(r, n) = elevation_angle_deg(p, u);
      ep.s_U(r, n) = (dv.q.col(n) - u.w).norm();
      ep.x_L(r, n) = 1.0 / link_los_probability(p, u, sc.cp, model);
      ep.t_L(r, n) = std::pow(link_distance(p, u), sc.cp.alpha_L);
    }
  }
  return ep;
}

double F1(double theta, double theta_k, double b) {
  const double e = std::exp(-b * theta_k);
  return e - b * e * (theta - theta_k);
}

double dF1(double theta_k, double b) { return -b * std::exp(-b * theta_k); }

double F2(double phi, double phi_k, double b) {
  const double e = std::exp(b * phi_k);
  return e + b * e * (phi - phi_k);
}

double dF2(double phi_k, double b) { return b * std::exp(b * phi_k); }

double F3(const Eigen::Vector2d& q, const Eigen::Vector2d& q_k,
          const Eigen::Vector2d& w, double z, double alpha) {
  const double d2 = (q_k - w).squaredNorm() + z * z;
  return std::pow(d2, 0.5 * alpha) + dF3(q_k, w, z, alpha).dot(q - q_k);
}

Eigen::Vector2d dF3(const Eigen::Vector2d& q_k, const Eigen::Vector2d& w,
                    double z, double alpha) {
  const double d2 = (q_k - w).squaredNorm() + z * z;
  return alpha * std::pow(d2, 0.5 * alpha - 1.0) * (q_k - w);
}

double F_atan_q(double s, double s_k, double z) {
  if (!(s_k > 0.0)) {
    throw std::domain_error("F_atan_q: zero horizontal distance at expansion");
  }
  return std::atan(z / s_k) - z * (s - s_k) / (s_k * s_k + z * z);
}

Eigen::Vector2d dF_atan_q(const Eigen::Vector2d& q, const Eigen::Vector2d& w,
                          double s_k, double z) {
  if (!(s_k > 0.0)) {
    throw std::domain_error("dF_atan_q: zero horizontal distance at expansion");
  }
  const Eigen::Vector2d diff = q - w;
  const double s = diff.norm();
  if (!(s > 0.0)) {
    throw std::domain_error("dF_atan_q: gradient undefined on the node");
  }
  return -z / (s_k * s_k + z * z) * diff / s;
}

double F6(double z, double z_k, double s, double alpha) {
  const double d2 = s * s + z_k * z_k;
  return std::pow(d2, 0.5 * alpha) + dF6(z_k, s, alpha) * (z - z_k);
}

double dF6(double z_k, double s, double alpha) {
  const double d2 = s * s + z_k * z_k;
  return alpha * std::pow(d2, 0.5 * alpha - 1.0) * z_k;
}

double F7(double z, double z_k, double s) {
  if (!(s > 0.0)) {
    throw std::domain_error("F7: zero horizontal distance");
  }
  return std::atan(z_k / s) + dF7(z_k, s) * (z - z_k);
}

double dF7(double z_k, double s) {
  if (!(s > 0.0)) {
    throw std::domain_error("dF7: zero horizontal distance");
  }
  return s / (s * s + z_k * z_k);
}

double lambda_lower_bound(double lambda, const Eigen::Vector2d& v,
                          double lambda_k, const Eigen::Vector2d& v_k,
                          double v0) {
  const double v02 = v0 * v0;
  return lambda_k * lambda_k + 2.0 * lambda_k * (lambda - lambda_k) +
         v_k.squaredNorm() / v02 + 2.0 / v02 * v_k.dot(v - v_k);
}

RateTaylor rate_taylor(double p_gamma, double x_k, double t_k) {
  if (!(x_k > 0.0) || !(t_k > 0.0)) {
    throw std::domain_error("rate_taylor: slacks must be positive");
  }
  RateTaylor rt;
  rt.x_k = x_k;
  rt.t_k = t_k;
  const double ratio = p_gamma / t_k;
  const double l = std::log2(1.0 + ratio);
  rt.A = l / x_k;
  rt.B = -p_gamma / (std::numbers::ln2 * x_k * t_k * t_k * (1.0 + ratio));
  rt.C = -l / (x_k * x_k);
  return rt;
}

double rate_taylor_lb(double x, double t, double p_gamma, double x_k,
                      double t_k) {
  return rate_taylor(p_gamma, x_k, t_k)(x, t);
}

double lemma1_f(double x, double y, double A) {
  return std::log2(1.0 + A / y) / x;
}

Eigen::Matrix2d lemma1_hessian(double x, double y, double A) {
  const double g = 1.0 + A / y;
  const double l = std::log2(g);
  const double ln2 = std::numbers::ln2;
  Eigen::Matrix2d H;
  H(0, 0) = 2.0 * l / (x * x * x);
  H(0, 1) = A / (ln2 * x * x * y * y * g);
  H(1, 0) = H(0, 1);
  H(1, 1) = A * (2.0 * y + A) / (ln2 * x * y * y * (y + A) * (y + A));
  return H;
}

HessianCheck lemma1_hessian_check(double x, double y, double A) {
  const Eigen::Matrix2d H = lemma1_hessian(x, y, A);
  // Closed-form 2x2 eigenvalues. The determinant is taken in factored form,
  // A / (x^4 ln2^2 y (y+A)^2) * (2 (2+u) ln(1+u) - u) with u = A/y, so that a
  // near-singular Hessian does not lose its sign to cancellation.
  const double u = A / y;
  const double ln2 = std::numbers::ln2;
  const double det = A / (std::pow(x, 4) * ln2 * ln2 * y * (y + A) * (y + A)) *
                     (2.0 * (2.0 + u) * std::log1p(u) - u);
  const double half_tr = 0.5 * (H(0, 0) + H(1, 1));
  const double half_diff = 0.5 * (H(0, 0) - H(1, 1));
  const double lmax = half_tr + std::hypot(half_diff, H(0, 1));
  HessianCheck hc;
  hc.min_eigenvalue = lmax > 0.0 ? det / lmax : 0.0;
  hc.psd = hc.min_eigenvalue >= -1e-9;
  return hc;
}

} // namespace uavcrn::sca
