#pragma once

#include <Eigen/Core>

#include "uavcrn/channel.hpp"
#include "uavcrn/decision_variables.hpp"

namespace uavcrn {

struct Scenario;

namespace sca {

/// Snapshot of the current iterate around which every surrogate is expanded.
/// Slack values are the tight ones: x_L = 1/P_L, t_L = d^alpha_L, and so on.
struct ExpansionPoint {
  Eigen::Matrix2Xd q;           // 2 x N
  Eigen::VectorXd z;            // N
  Eigen::Matrix2Xd v_xy;        // 2 x N
  Eigen::VectorXd lambda;       // N, induced-velocity factor
  Eigen::VectorXd theta_D;      // N [deg]
  Eigen::VectorXd phi_D;        // N [deg]
  Eigen::VectorXd s_D;          // N, horizontal distance to D [m]
  Eigen::VectorXd d_D;          // N, 3D distance to D [m]
  Eigen::MatrixXd theta_U;      // R x N [deg]
  Eigen::MatrixXd s_U;          // R x N, horizontal distance [m]
  Eigen::MatrixXd x_L;          // R x N, 1 / P_L
  Eigen::MatrixXd t_L;          // R x N, d^alpha_L

  static ExpansionPoint from(const DecisionVariables& dv, const Scenario& sc,
                             LosModel model = LosModel::Probabilistic);
};

/// Tangent of exp(-b theta) at theta_k; a global under-estimator.
double F1(double theta, double theta_k, double b);
double dF1(double theta_k, double b);

/// Tangent of exp(b phi) at phi_k; a global under-estimator.
double F2(double phi, double phi_k, double b);
double dF2(double phi_k, double b);

/// Tangent in q of (||q - w||^2 + z^2)^(alpha/2) at q_k.
double F3(const Eigen::Vector2d& q, const Eigen::Vector2d& q_k,
          const Eigen::Vector2d& w, double z, double alpha);
Eigen::Vector2d dF3(const Eigen::Vector2d& q_k, const Eigen::Vector2d& w,
                    double z, double alpha);

/// Linearization of atan(z / s) in the horizontal distance s = ||q - w||,
/// expanded at s_k, in radians. Used both for cognitive users and for D.
/// Throws std::domain_error when s_k == 0.
double F_atan_q(double s, double s_k, double z);
/// Gradient in q of F_atan_q(||q - w||, ...) at q.
Eigen::Vector2d dF_atan_q(const Eigen::Vector2d& q, const Eigen::Vector2d& w,
                          double s_k, double z);

inline double F4(const Eigen::Vector2d& q, const Eigen::Vector2d& q_k,
                 const Eigen::Vector2d& w_user, double z) {
  return F_atan_q((q - w_user).norm(), (q_k - w_user).norm(), z);
}
inline double F5(const Eigen::Vector2d& q, const Eigen::Vector2d& q_k,
                 const Eigen::Vector2d& w_D, double z) {
  return F_atan_q((q - w_D).norm(), (q_k - w_D).norm(), z);
}

/// Tangent in z of (s^2 + z^2)^(alpha/2) at z_k.
double F6(double z, double z_k, double s, double alpha);
double dF6(double z_k, double s, double alpha);

/// Tangent in z of atan(z / s) at z_k, in radians; an over-estimator for
/// z >= 0. Throws std::domain_error when s == 0.
double F7(double z, double z_k, double s);
double dF7(double z_k, double s);

/// Affine under-estimator of lambda^2 + ||v||^2 / v0^2 around (lambda_k, v_k).
double lambda_lower_bound(double lambda, const Eigen::Vector2d& v,
                          double lambda_k, const Eigen::Vector2d& v_k,
                          double v0);

/// Coefficients of the first-order expansion of (1/x) log2(1 + Pgamma / t).
struct RateTaylor {
  double A = 0.0; // value at the expansion point
  double B = 0.0; // d/dt, never positive
  double C = 0.0; // d/dx, never positive
  double x_k = 1.0;
  double t_k = 1.0;

  double operator()(double x, double t) const {
    return A + B * (t - t_k) + C * (x - x_k);
  }
};

/// Throws std::domain_error unless x_k > 0 and t_k > 0.
RateTaylor rate_taylor(double p_gamma, double x_k, double t_k);

/// Convenience: rate_taylor(...)(x, t).
double rate_taylor_lb(double x, double t, double p_gamma, double x_k,
                      double t_k);

/// f(x, y) = (1/x) log2(1 + A/y).
double lemma1_f(double x, double y, double A);
Eigen::Matrix2d lemma1_hessian(double x, double y, double A);

struct HessianCheck {
  bool psd = false;
  double min_eigenvalue = 0.0;
};

/// Minimum eigenvalue of the analytic Hessian; psd when it is >= -1e-9
/// relative to the largest entry.
HessianCheck lemma1_hessian_check(double x, double y, double A);

} // namespace sca
} // namespace uavcrn
