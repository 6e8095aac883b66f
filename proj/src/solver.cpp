#include "uavcrn/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace uavcrn::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinearRow merged(LinearRow row) {
  std::map<int, double> acc;
  for (std::size_t k = 0; k < row.idx.size(); ++k) {
    acc[row.idx[k]] += row.coef[k];
  }
  row.idx.clear();
  row.coef.clear();
  for (const auto& [i, v] : acc) {
    row.idx.push_back(i);
    row.coef.push_back(v);
  }
  return row;
}

double row_dot(const LinearRow& r, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < r.idx.size(); ++k) {
    s += r.coef[k] * x[r.idx[k]];
  }
  return s;
}

} // namespace

std::string to_string(Status s) {
  switch (s) {
  case Status::Optimal:
    return "optimal";
  case Status::MaxIterations:
    return "max-iterations";
  case Status::Infeasible:
    return "infeasible";
  case Status::NumericalFailure:
    return "numerical-failure";
  }
  return "unknown";
}

// --------------------------------------------------------------------------
// SmoothProgram

SmoothProgram::SmoothProgram(int num_vars) : n_(num_vars) {
  if (num_vars < 0) {
    throw std::invalid_argument("SmoothProgram: negative variable count");
  }
  c_ = Eigen::VectorXd::Zero(n_);
  lo_ = Eigen::VectorXd::Constant(n_, -kInf);
  hi_ = Eigen::VectorXd::Constant(n_, kInf);
  x0_ = Eigen::VectorXd::Zero(n_);
}

void SmoothProgram::check_var(int var) const {
  if (var < 0 || var >= n_) {
    throw std::out_of_range("SmoothProgram: variable index out of range");
  }
}

void SmoothProgram::check_row(const LinearRow& row) const {
  if (row.idx.size() != row.coef.size()) {
    throw std::invalid_argument("SmoothProgram: row index/coef size mismatch");
  }
  for (int i : row.idx) {
    check_var(i);
  }
  if (!std::isfinite(row.rhs)) {
    throw std::invalid_argument("SmoothProgram: non-finite row bound");
  }
}

void SmoothProgram::set_objective(int var, double coeff) {
  check_var(var);
  c_[var] = coeff;
}

void SmoothProgram::add_objective(int var, double coeff) {
  check_var(var);
  c_[var] += coeff;
}

void SmoothProgram::set_bounds(int var, double lo, double hi) {
  check_var(var);
  if (!(lo < hi)) {
    throw std::invalid_argument("SmoothProgram: bounds need lo < hi");
  }
  lo_[var] = lo;
  hi_[var] = hi;
}

int SmoothProgram::add_linear_inequality(LinearRow row) {
  check_row(row);
  rows_.push_back(merged(std::move(row)));
  return static_cast<int>(rows_.size()) - 1;
}

int SmoothProgram::add_equality(LinearRow row) {
  check_row(row);
  eqs_.push_back(merged(std::move(row)));
  return static_cast<int>(eqs_.size()) - 1;
}

int SmoothProgram::add_smooth_inequality(SmoothConstraint c) {
  if (!c.oracle) {
    throw std::invalid_argument("SmoothProgram: constraint without oracle");
  }
  std::vector<int> sorted = c.support;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("SmoothProgram: repeated support index");
  }
  for (int i : c.support) {
    check_var(i);
  }
  smooth_.push_back(std::move(c));
  return static_cast<int>(smooth_.size()) - 1;
}

void SmoothProgram::set_start(Eigen::VectorXd x0) {
  if (x0.size() != n_) {
    throw std::invalid_argument("SmoothProgram: start has wrong length");
  }
  x0_ = std::move(x0);
}

double SmoothProgram::objective(const Eigen::VectorXd& x) const {
  return c_.dot(x) + offset_;
}

bool SmoothProgram::eval_smooth(int k, const Eigen::VectorXd& x,
                                bool want_hessian, LocalEval& out) const {
  const auto& sc = smooth_[k];
  Eigen::VectorXd xl(sc.support.size());
  for (std::size_t i = 0; i < sc.support.size(); ++i) {
    xl[i] = x[sc.support[i]];
  }
  return sc.oracle(xl, want_hessian, out) && std::isfinite(out.value);
}

double SmoothProgram::max_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (int j = 0; j < n_; ++j) {
    worst = std::max({worst, lo_[j] - x[j], x[j] - hi_[j]});
  }
  for (const auto& r : rows_) {
    worst = std::max(worst, row_dot(r, x) - r.rhs);
  }
  for (const auto& r : eqs_) {
    worst = std::max(worst, std::abs(row_dot(r, x) - r.rhs));
  }
  LocalEval ev;
  for (int k = 0; k < static_cast<int>(smooth_.size()); ++k) {
    if (!eval_smooth(k, x, false, ev)) {
      return kInf;
    }
    worst = std::max(worst, ev.value);
  }
  return worst;
}

// --------------------------------------------------------------------------
// Barrier engine

namespace {

enum class CenterOutcome { Centered, EarlyStop, Budget, Failed };

class Barrier {
 public:
  Barrier(const SmoothProgram& p, const SolverOptions& o, int phase,
          std::function<bool(const Eigen::VectorXd&)> early_stop)
      : p_(p), o_(o), phase_(phase), early_stop_(std::move(early_stop)),
        n_(p.num_vars()), nrows_(static_cast<int>(p.linear_rows().size())),
        nsm_(static_cast<int>(p.smooth().size())) {
    m_ = nrows_ + nsm_;
    for (int j = 0; j < n_; ++j) {
      m_ += std::isfinite(p_.lower()[j]) ? 1 : 0;
      m_ += std::isfinite(p_.upper()[j]) ? 1 : 0;
    }
    const int neq = static_cast<int>(p_.equalities().size());
    E_ = Eigen::MatrixXd::Zero(neq, n_);
    for (int i = 0; i < neq; ++i) {
      const auto& r = p_.equalities()[i];
      for (std::size_t k = 0; k < r.idx.size(); ++k) {
        E_(i, r.idx[k]) = r.coef[k];
      }
    }
    xloc_.resize(nsm_);
    ev_.resize(nsm_);
    gval_.resize(nsm_);
    for (int k = 0; k < nsm_; ++k) {
      xloc_[k].resize(p_.smooth()[k].support.size());
    }
    slack_.resize(nrows_);
    grad_sm_.resize(nsm_);
    gneg_.resize(nsm_);
    build_pattern();
  }

  int barrier_terms() const { return m_; }
  int iterations() const { return iters_; }
  double last_t() const { return t_; }

  /// Runs the barrier schedule from a strictly feasible x.
  Status run(Eigen::VectorXd& x, bool& early, double& kkt) {
    early = false;
    kkt = kInf;
    if (m_ == 0) {
      kkt = p_.objective_coefficients().norm();
      return kkt == 0.0 ? Status::Optimal : Status::NumericalFailure;
    }
    t_ = o_.t0;
    for (;;) {
      const CenterOutcome co = center(x);
      if (co == CenterOutcome::EarlyStop) {
        early = true;
        return Status::Optimal;
      }
      if (co == CenterOutcome::Failed) {
        kkt = residual_;
        return Status::NumericalFailure;
      }
      kkt = residual_;
      if (co == CenterOutcome::Budget) {
        return Status::MaxIterations;
      }
      const double gap = m_ / t_;
      trace(x, gap);
      if (gap <= o_.tol && residual_ <= o_.tol) {
        return Status::Optimal;
      }
      if (gap <= o_.tol * 1e-6) {
        return Status::MaxIterations;
      }
      t_ *= o_.mu_factor;
    }
  }

  Eigen::VectorXd multipliers(const Eigen::VectorXd& x) {
    Eigen::VectorXd lam(nrows_ + nsm_);
    for (int i = 0; i < nrows_; ++i) {
      lam[i] = 1.0 / (t_ * (p_.linear_rows()[i].rhs -
                            row_dot(p_.linear_rows()[i], x)));
    }
    for (int k = 0; k < nsm_; ++k) {
      lam[nrows_ + k] = p_.eval_smooth(k, x, false, ev_[k])
                            ? 1.0 / (t_ * -ev_[k].value)
                            : 0.0;
    }
    return lam;
  }

 private:
  void build_pattern() {
    std::vector<Eigen::Triplet<double>> trips;
    for (int j = 0; j < n_; ++j) {
      trips.emplace_back(j, j, 0.0);
    }
    auto clique = [&](const std::vector<int>& s) {
      for (int a : s) {
        for (int b : s) {
          if (a >= b) {
            trips.emplace_back(a, b, 0.0);
          }
        }
      }
    };
    for (const auto& r : p_.linear_rows()) {
      clique(r.idx);
    }
    for (const auto& s : p_.smooth()) {
      clique(s.support);
    }
    H_.resize(n_, n_);
    H_.setFromTriplets(trips.begin(), trips.end());
    H_.makeCompressed();
    auto pos = [&](int i, int j) {
      const int* inner = H_.innerIndexPtr();
      const int b = H_.outerIndexPtr()[j];
      const int e = H_.outerIndexPtr()[j + 1];
      const int* it = std::lower_bound(inner + b, inner + e, i);
      return static_cast<int>(it - inner);
    };
    diag_pos_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      diag_pos_[j] = pos(j, j);
    }
    auto local = [&](const std::vector<int>& s) {
      const int k = static_cast<int>(s.size());
      std::vector<int> out(static_cast<std::size_t>(k) * k, -1);
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          if (s[a] >= s[b]) {
            out[a * k + b] = pos(s[a], s[b]);
          }
        }
      }
      return out;
    };
    for (const auto& r : p_.linear_rows()) {
      row_pos_.push_back(local(r.idx));
    }
    for (const auto& s : p_.smooth()) {
      sm_pos_.push_back(local(s.support));
    }
  }

  bool eval_smooth_all(const Eigen::VectorXd& x, bool with_hess,
                       Eigen::VectorXd& vals) {
    for (int k = 0; k < nsm_; ++k) {
      const auto& sup = p_.smooth()[k].support;
      for (std::size_t i = 0; i < sup.size(); ++i) {
        xloc_[k][i] = x[sup[i]];
      }
      if (!p_.smooth()[k].oracle(xloc_[k], with_hess, ev_[k]) ||
          !std::isfinite(ev_[k].value) || !(ev_[k].value < 0.0)) {
        return false;
      }
      vals[k] = ev_[k].value;
    }
    return true;
  }

  // Gradient and Hessian of t*(-c'x) + barrier at x.
  bool assemble(const Eigen::VectorXd& x) {
    if (!eval_smooth_all(x, true, gval_)) {
      return false;
    }
    grad_ = -t_ * p_.objective_coefficients();
    double* hv = H_.valuePtr();
    std::fill(hv, hv + H_.nonZeros(), 0.0);
    const auto& lo = p_.lower();
    const auto& hi = p_.upper();
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo[j])) {
        const double d = x[j] - lo[j];
        grad_[j] -= 1.0 / d;
        hv[diag_pos_[j]] += 1.0 / (d * d);
      }
      if (std::isfinite(hi[j])) {
        const double d = hi[j] - x[j];
        grad_[j] += 1.0 / d;
        hv[diag_pos_[j]] += 1.0 / (d * d);
      }
    }
    for (int i = 0; i < nrows_; ++i) {
      const auto& r = p_.linear_rows()[i];
      const double s = r.rhs - row_dot(r, x);
      slack_[i] = s;
      const int k = static_cast<int>(r.idx.size());
      const auto& P = row_pos_[i];
      for (int a = 0; a < k; ++a) {
        grad_[r.idx[a]] += r.coef[a] / s;
        for (int b = 0; b < k; ++b) {
          if (P[a * k + b] >= 0) {
            hv[P[a * k + b]] += r.coef[a] * r.coef[b] / (s * s);
          }
        }
      }
    }
    for (int q = 0; q < nsm_; ++q) {
      const auto& sup = p_.smooth()[q].support;
      const int k = static_cast<int>(sup.size());
      const double g = -ev_[q].value;
      const auto& gr = ev_[q].grad;
      const auto& he = ev_[q].hess;
      const auto& P = sm_pos_[q];
      grad_sm_[q] = gr;
      gneg_[q] = g;
      for (int a = 0; a < k; ++a) {
        grad_[sup[a]] += gr[a] / g;
        for (int b = 0; b < k; ++b) {
          if (P[a * k + b] >= 0) {
            hv[P[a * k + b]] += he(a, b) / g + gr[a] * gr[b] / (g * g);
          }
        }
      }
    }
    return true;
  }

  bool factor_and_solve(Eigen::VectorXd& dx) {
    if (!analyzed_) {
      ldlt_.analyzePattern(H_);
      analyzed_ = true;
    }
    double maxdiag = 0.0;
    for (int j = 0; j < n_; ++j) {
      maxdiag = std::max(maxdiag, H_.valuePtr()[diag_pos_[j]]);
    }
    double reg = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (reg > 0.0) {
        for (int j = 0; j < n_; ++j) {
          H_.valuePtr()[diag_pos_[j]] += reg;
        }
      }
      ldlt_.factorize(H_);
      const bool ok = ldlt_.info() == Eigen::Success &&
                      (n_ == 0 || ldlt_.vectorD().minCoeff() > 0.0);
      if (ok) {
        if (E_.rows() == 0) {
          dx = ldlt_.solve(-grad_);
        } else {
          const Eigen::MatrixXd Y = ldlt_.solve(E_.transpose());
          const Eigen::VectorXd z0 = ldlt_.solve(-grad_);
          const Eigen::MatrixXd S = E_ * Y;
          const Eigen::VectorXd nu = S.ldlt().solve(E_ * z0);
          dx = z0 - Y * nu;
        }
        if (dx.allFinite()) {
          return true;
        }
      }
      if (reg > 0.0) {
        for (int j = 0; j < n_; ++j) {
          H_.valuePtr()[diag_pos_[j]] -= reg;
        }
      }
      reg = reg == 0.0 ? 1e-12 * std::max(1.0, maxdiag) : reg * 100.0;
    }
    return false;
  }

  // Residual with primal-dual multiplier estimates lambda_i (1 + dg_i/(-g_i))
  // taken from the Newton step dx at x. Using the step cancels the rounding
  // in the slacks that a plain 1/(t*(-g)) estimate suffers near the boundary.
  double kkt_estimate(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
    Eigen::VectorXd r = p_.objective_coefficients();
    double comp2 = 0.0;
    auto add = [&](double minus_g, double dir) {
      const double lam = std::max(0.0, (1.0 + dir / minus_g) / (t_ * minus_g));
      comp2 += (lam * minus_g) * (lam * minus_g);
      return lam;
    };
    const auto& lo = p_.lower();
    const auto& hi = p_.upper();
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo[j])) {
        r[j] += add(x[j] - lo[j], -dx[j]);
      }
      if (std::isfinite(hi[j])) {
        r[j] -= add(hi[j] - x[j], dx[j]);
      }
    }
    for (int i = 0; i < nrows_; ++i) {
      const auto& row = p_.linear_rows()[i];
      const double lam = add(slack_[i], row_dot(row, dx));
      for (std::size_t k = 0; k < row.idx.size(); ++k) {
        r[row.idx[k]] -= lam * row.coef[k];
      }
    }
    for (int q = 0; q < nsm_; ++q) {
      const auto& sup = p_.smooth()[q].support;
      double dir = 0.0;
      for (std::size_t a = 0; a < sup.size(); ++a) {
        dir += grad_sm_[q][a] * dx[sup[a]];
      }
      const double lam = add(gneg_[q], dir);
      for (std::size_t a = 0; a < sup.size(); ++a) {
        r[sup[a]] -= lam * grad_sm_[q][a];
      }
    }
    if (E_.rows() > 0) {
      const Eigen::VectorXd nu =
          (E_ * E_.transpose()).ldlt().solve(E_ * r);
      r -= E_.transpose() * nu;
    }
    return std::sqrt(r.squaredNorm() + comp2);
  }

  // Barrier-function change from x to x + alpha*dx, or +inf when infeasible.
  double delta_f(const Eigen::VectorXd& x, const Eigen::VectorXd& dx,
                 double alpha, Eigen::VectorXd& xn) {
    xn = x + alpha * dx;
    const auto& lo = p_.lower();
    const auto& hi = p_.upper();
    double df = -t_ * alpha * p_.objective_coefficients().dot(dx);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo[j])) {
        if (!(xn[j] - lo[j] > 0.0)) {
          return kInf;
        }
        df -= std::log1p(alpha * dx[j] / (x[j] - lo[j]));
      }
      if (std::isfinite(hi[j])) {
        if (!(hi[j] - xn[j] > 0.0)) {
          return kInf;
        }
        df -= std::log1p(-alpha * dx[j] / (hi[j] - x[j]));
      }
    }
    for (int i = 0; i < nrows_; ++i) {
      const auto& r = p_.linear_rows()[i];
      if (!(r.rhs - row_dot(r, xn) > 0.0)) {
        return kInf;
      }
      const double ratio = alpha * row_dot(r, dx) / slack_[i];
      if (!(ratio < 1.0)) {
        return kInf;
      }
      df -= std::log1p(-ratio);
    }
    Eigen::VectorXd vals(nsm_);
    if (!eval_smooth_all(xn, false, vals)) {
      return kInf;
    }
    for (int k = 0; k < nsm_; ++k) {
      df -= std::log(vals[k] / gval_[k]);
    }
    return df;
  }

  // Largest step in (0, 1] keeping bounds and linear rows strictly feasible.
  double max_linear_step(const Eigen::VectorXd& x,
                         const Eigen::VectorXd& dx) const {
    double a = 1.0;
    const auto& lo = p_.lower();
    const auto& hi = p_.upper();
    for (int j = 0; j < n_; ++j) {
      if (dx[j] < 0.0 && std::isfinite(lo[j])) {
        a = std::min(a, 0.99 * (x[j] - lo[j]) / -dx[j]);
      }
      if (dx[j] > 0.0 && std::isfinite(hi[j])) {
        a = std::min(a, 0.99 * (hi[j] - x[j]) / dx[j]);
      }
    }
    for (int i = 0; i < nrows_; ++i) {
      const double d = row_dot(p_.linear_rows()[i], dx);
      if (d > 0.0) {
        a = std::min(a, 0.99 * slack_[i] / d);
      }
    }
    return a;
  }

  CenterOutcome center(Eigen::VectorXd& x) {
    Eigen::VectorXd dx(n_);
    Eigen::VectorXd xn(n_);
    for (int it = 0; it < o_.max_centering; ++it) {
      if (iters_ >= o_.max_newton) {
        return CenterOutcome::Budget;
      }
      if (!assemble(x)) {
        return CenterOutcome::Failed;
      }
      if (!factor_and_solve(dx)) {
        return CenterOutcome::Failed;
      }
      residual_ = kkt_estimate(x, dx);
      const double slope = grad_.dot(dx);
      const double dec2 = -slope;
      if (dec2 * 0.5 <= 1e-10) {
        return CenterOutcome::Centered;
      }
      double alpha = max_linear_step(x, dx);
      bool accepted = false;
      while (alpha > 1e-14) {
        const double df = delta_f(x, dx, alpha, xn);
        if (df <= 0.01 * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      ++iters_;
      if (!accepted) {
        // Rounding floor: the decrement is already negligible.
        return dec2 < 1e-8 ? CenterOutcome::Centered : CenterOutcome::Failed;
      }
      x.swap(xn);
      if (early_stop_ && early_stop_(x)) {
        return CenterOutcome::EarlyStop;
      }
    }
    return CenterOutcome::Centered;
  }

  void trace(const Eigen::VectorXd& x, double gap) const {
    if (o_.trace == nullptr) {
      return;
    }
    (void)gap;
    *o_.trace << phase_ << ',' << iters_ << ',' << 1.0 / t_ << ','
              << p_.objective(x) << ',' << residual_ << '\n';
  }

  const SmoothProgram& p_;
  const SolverOptions& o_;
  int phase_;
  std::function<bool(const Eigen::VectorXd&)> early_stop_;
  int n_;
  int nrows_;
  int nsm_;
  int m_ = 0;
  Eigen::MatrixXd E_;
  Eigen::SparseMatrix<double> H_;
  std::vector<int> diag_pos_;
  std::vector<std::vector<int>> row_pos_;
  std::vector<std::vector<int>> sm_pos_;
  std::vector<Eigen::VectorXd> xloc_;
  std::vector<LocalEval> ev_;
  Eigen::VectorXd gval_;
  Eigen::VectorXd slack_;
  std::vector<Eigen::VectorXd> grad_sm_;
  Eigen::VectorXd gneg_;
  Eigen::VectorXd grad_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                        Eigen::AMDOrdering<int>>
      ldlt_;
  bool analyzed_ = false;
  double t_ = 1.0;
  double residual_ = kInf;
  int iters_ = 0;
};

constexpr double kPhase1Reach = 1e3;

// Moves the start strictly inside the box and onto the equalities.
Eigen::VectorXd prepare_start(const SmoothProgram& p) {
  Eigen::VectorXd x = p.start();
  const auto& lo = p.lower();
  const auto& hi = p.upper();
  for (int j = 0; j < p.num_vars(); ++j) {
    const double width = hi[j] - lo[j];
    const double pad_lo =
        std::min(1e-8 * std::max(1.0, std::abs(lo[j])), 0.25 * width);
    const double pad_hi =
        std::min(1e-8 * std::max(1.0, std::abs(hi[j])), 0.25 * width);
    if (std::isfinite(lo[j]) && !(x[j] - lo[j] >= pad_lo)) {
      x[j] = lo[j] + pad_lo;
    }
    if (std::isfinite(hi[j]) && !(hi[j] - x[j] >= pad_hi)) {
      x[j] = hi[j] - pad_hi;
    }
  }
  const auto& eqs = p.equalities();
  if (!eqs.empty()) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(eqs.size(), p.num_vars());
    Eigen::VectorXd f(eqs.size());
    for (std::size_t i = 0; i < eqs.size(); ++i) {
      for (std::size_t k = 0; k < eqs[i].idx.size(); ++k) {
        E(i, eqs[i].idx[k]) = eqs[i].coef[k];
      }
      f[i] = eqs[i].rhs;
    }
    const Eigen::VectorXd r = E * x - f;
    x -= E.transpose() * (E * E.transpose()).ldlt().solve(r);
  }
  return x;
}

// Phase-1 program: every constraint that is not strictly satisfied at x gets
// an elastic "- s" term, and s is minimized. Variables are also boxed around
// x; with a zero objective a one-sided barrier would otherwise push them off
// to infinity.
SmoothProgram elastic_program(const SmoothProgram& p, const Eigen::VectorXd& x,
                              double& s0, bool& domain_ok) {
  const int n = p.num_vars();
  SmoothProgram q(n + 1);
  for (int j = 0; j < n; ++j) {
    const double reach = kPhase1Reach * std::max(1.0, std::abs(x[j]));
    q.set_bounds(j, std::max(p.lower()[j], x[j] - reach),
                 std::min(p.upper()[j], x[j] + reach));
  }
  q.set_objective(n, -1.0);
  double worst = -kInf;
  domain_ok = true;
  for (const auto& r : p.linear_rows()) {
    LinearRow rr = r;
    const double v = row_dot(r, x) - r.rhs;
    if (!(v < 0.0)) {
      rr.idx.push_back(n);
      rr.coef.push_back(-1.0);
      worst = std::max(worst, v);
    }
    q.add_linear_inequality(std::move(rr));
  }
  for (const auto& r : p.equalities()) {
    q.add_equality(r);
  }
  LocalEval ev;
  for (int k = 0; k < static_cast<int>(p.smooth().size()); ++k) {
    const auto& sc = p.smooth()[k];
    if (!p.eval_smooth(k, x, false, ev)) {
      domain_ok = false;
      return q;
    }
    if (ev.value < 0.0) {
      q.add_smooth_inequality(sc);
      continue;
    }
    worst = std::max(worst, ev.value);
    SmoothConstraint el;
    el.support = sc.support;
    el.support.push_back(n);
    el.family = sc.family;
    const Oracle inner = sc.oracle;
    const int k_in = static_cast<int>(sc.support.size());
    el.oracle = [inner, k_in](const Eigen::VectorXd& xl, bool want_h,
                              LocalEval& out) {
      LocalEval in;
      if (!inner(xl.head(k_in), want_h, in)) {
        return false;
      }
      out.value = in.value - xl[k_in];
      out.grad.resize(k_in + 1);
      out.grad.head(k_in) = in.grad;
      out.grad[k_in] = -1.0;
      if (want_h) {
        out.hess = Eigen::MatrixXd::Zero(k_in + 1, k_in + 1);
        out.hess.topLeftCorner(k_in, k_in) = in.hess;
      }
      return true;
    };
    q.add_smooth_inequality(std::move(el));
  }
  s0 = worst + std::max(1.0, std::abs(worst));
  q.set_bounds(n, -1.0, kInf);
  Eigen::VectorXd start(n + 1);
  start.head(n) = x;
  start[n] = s0;
  q.set_start(start);
  return q;
}

bool strictly_feasible(const SmoothProgram& p, const Eigen::VectorXd& x,
                       bool& domain_ok) {
  domain_ok = true;
  bool ok = true;
  for (const auto& r : p.linear_rows()) {
    ok = ok && row_dot(r, x) < r.rhs;
  }
  LocalEval ev;
  for (int k = 0; k < static_cast<int>(p.smooth().size()); ++k) {
    if (!p.eval_smooth(k, x, false, ev)) {
      domain_ok = false;
      return false;
    }
    ok = ok && ev.value < 0.0;
  }
  return ok;
}

} // namespace

SolveResult solve(const SmoothProgram& prog, const SolverOptions& opts) {
  SolveResult res;
  Eigen::VectorXd x = prepare_start(prog);
  res.x = x;
  bool domain_ok = true;
  const bool feasible = strictly_feasible(prog, x, domain_ok);
  int used = 0;
  if (!feasible) {
    res.status.used_phase1 = true;
    double s0 = 0.0;
    SmoothProgram ph1 = elastic_program(prog, x, s0, domain_ok);
    if (!domain_ok) {
      res.status.status = Status::NumericalFailure;
      res.status.objective = prog.objective(x);
      return res;
    }
    const int n = prog.num_vars();
    const double margin = opts.phase1_margin;
    Barrier b1(ph1, opts, 1,
               [n, margin](const Eigen::VectorXd& y) { return y[n] < -margin; });
    Eigen::VectorXd y = ph1.start();
    bool early = false;
    double kkt = 0.0;
    b1.run(y, early, kkt);
    used = b1.iterations();
    x = y.head(n);
    res.x = x;
    if (!(y[n] < 0.0) || !strictly_feasible(prog, x, domain_ok)) {
      res.status.status = Status::Infeasible;
      res.status.iterations = used;
      res.status.objective = prog.objective(x);
      res.status.max_violation = prog.max_violation(x);
      return res;
    }
  }
  SolverOptions o2 = opts;
  o2.max_newton = std::max(1, opts.max_newton - used);
  Barrier b2(prog, o2, 2, nullptr);
  bool early = false;
  double kkt = kInf;
  const Status st = b2.run(x, early, kkt);
  res.x = x;
  res.status.status = st;
  res.status.kkt_residual = kkt;
  res.status.iterations = used + b2.iterations();
  res.status.objective = prog.objective(x);
  res.status.max_violation = prog.max_violation(x);
  res.multipliers = b2.multipliers(x);
  return res;
}

// --------------------------------------------------------------------------
// Independent KKT residual

namespace {

// Lawson-Hanson: min ||M z - b|| subject to z >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(M.cols());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-14 * std::max(1.0, M.norm() * b.norm());
  for (int outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd w = M.transpose() * (b - M * z);
    int jmax = -1;
    double wmax = tol;
    for (int j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        jmax = j;
      }
    }
    if (jmax < 0) {
      break;
    }
    passive[jmax] = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      std::vector<int> P;
      for (int j = 0; j < n; ++j) {
        if (passive[j]) {
          P.push_back(j);
        }
      }
      Eigen::MatrixXd MP(M.rows(), P.size());
      for (std::size_t k = 0; k < P.size(); ++k) {
        MP.col(k) = M.col(P[k]);
      }
      const Eigen::VectorXd zp = MP.colPivHouseholderQr().solve(b);
      bool all_pos = true;
      for (std::size_t k = 0; k < P.size(); ++k) {
        all_pos = all_pos && zp[k] > 0.0;
      }
      if (all_pos) {
        z.setZero();
        for (std::size_t k = 0; k < P.size(); ++k) {
          z[P[k]] = zp[k];
        }
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < P.size(); ++k) {
        if (zp[k] <= 0.0) {
          alpha = std::min(alpha, z[P[k]] / (z[P[k]] - zp[k]));
        }
      }
      for (std::size_t k = 0; k < P.size(); ++k) {
        z[P[k]] += alpha * (zp[k] - z[P[k]]);
        if (z[P[k]] <= 1e-300) {
          z[P[k]] = 0.0;
          passive[P[k]] = false;
        }
      }
    }
  }
  return z;
}

} // namespace

double kkt_residual(const SmoothProgram& prog, const Eigen::VectorXd& x) {
  const int n = prog.num_vars();
  std::vector<Eigen::VectorXd> grads;
  std::vector<double> vals;
  const auto& lo = prog.lower();
  const auto& hi = prog.upper();
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lo[j])) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      g[j] = -1.0;
      grads.push_back(g);
      vals.push_back(lo[j] - x[j]);
    }
    if (std::isfinite(hi[j])) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      g[j] = 1.0;
      grads.push_back(g);
      vals.push_back(x[j] - hi[j]);
    }
  }
  for (const auto& r : prog.linear_rows()) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < r.idx.size(); ++k) {
      g[r.idx[k]] += r.coef[k];
    }
    grads.push_back(g);
    vals.push_back(row_dot(r, x) - r.rhs);
  }
  LocalEval ev;
  for (int k = 0; k < static_cast<int>(prog.smooth().size()); ++k) {
    if (!prog.eval_smooth(k, x, false, ev)) {
      return kInf;
    }
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    const auto& sup = prog.smooth()[k].support;
    for (std::size_t i = 0; i < sup.size(); ++i) {
      g[sup[i]] = ev.grad[i];
    }
    grads.push_back(g);
    vals.push_back(ev.value);
  }
  const int mi = static_cast<int>(grads.size());
  const int ne = static_cast<int>(prog.equalities().size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + mi, mi + 2 * ne);
  for (int i = 0; i < mi; ++i) {
    M.col(i).head(n) = grads[i];
    M(n + i, i) = vals[i];
  }
  for (int e = 0; e < ne; ++e) {
    const auto& r = prog.equalities()[e];
    for (std::size_t k = 0; k < r.idx.size(); ++k) {
      M(r.idx[k], mi + 2 * e) += r.coef[k];
      M(r.idx[k], mi + 2 * e + 1) -= r.coef[k];
    }
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + mi);
  b.head(n) = prog.objective_coefficients();
  double res = 0.0;
  if (M.cols() == 0) {
    res = b.norm();
  } else {
    const Eigen::VectorXd z = nnls(M, b);
    res = (M * z - b).norm();
  }
  return res + prog.max_violation(x);
}

} // namespace uavcrn::solver
