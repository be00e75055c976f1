#include "kelvin/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kelvin {

namespace {

void check_bounds_ordered(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size() || (lo.array() > hi.array()).any()) {
    throw std::invalid_argument("control bounds are not ordered lower <= upper");
  }
}

// beta*kappa/theta with the configured theta_* = 1e-10 in mind: evaluate the
// reciprocal in extended precision once theta drops below 1e-8.
double safe_reciprocal(double theta) {
  if (theta < 1e-8) {
    return static_cast<double>(1.0L / static_cast<long double>(theta));
  }
  return 1.0 / theta;
}

}  // namespace

void Problem1Spec::validate() const {
  if (N < 1 || T <= 0.0) throw std::invalid_argument("Problem 1 needs N >= 1 and T > 0");
  if (lambda <= 0.0) throw std::invalid_argument("Problem 1 needs lambda > 0");
  check_bounds_ordered(alpha_lower, alpha_upper);
  if (alpha0.size() != dipoles.count()) {
    throw std::invalid_argument("alpha0 size does not match dipole count");
  }
  if ((alpha0.array() < alpha_lower.array()).any() ||
      (alpha0.array() > alpha_upper.array()).any()) {
    throw std::invalid_argument("alpha0 violates the box bounds");
  }
}

void Problem2Spec::validate() const {
  if (M < 1 || s_F <= 0.0) throw std::invalid_argument("Problem 2 needs M >= 1 and s_F > 0");
  if (lambda <= 0.0 || eta <= 0.0 || beta < 0.0) {
    throw std::invalid_argument("Problem 2 needs positive lambda, eta and nonnegative beta");
  }
  check_bounds_ordered(alpha_lower, alpha_upper);
  if (theta_lower <= 0.0 || theta_lower > theta_upper) {
    throw std::invalid_argument("speed bounds must satisfy 0 < theta_* <= theta^*");
  }
  if (theta0 < theta_lower || theta0 > theta_upper) {
    throw std::invalid_argument("theta0 violates the speed bounds");
  }
  law.check_unit_speed();
}

// ---------------------------------------------------------------------------
// Problem 1

Problem1Objective::Problem1Objective(const Problem1Spec& spec) : spec_(spec) {
  spec_.validate();
  np_ = spec_.dipoles.count();
  const double tau = spec_.tau();
  Phat_.resize(spec_.N);
  fhat_.resize(spec_.N);
  for (int n = 1; n <= spec_.N; ++n) {
    Phat_[n - 1] = pullback_P(spec_.dipoles, spec_.law, n * tau, spec_.quad);
    fhat_[n - 1] = time_averaged_target(spec_.target, spec_.law, n, tau, spec_.quad);
  }
}

void Problem1Objective::check_feasible(const ControlPath& path) const {
  if (path.values.rows() != spec_.N + 1 || path.values.cols() != np_) {
    throw std::invalid_argument("control path has wrong shape");
  }
  if (!(path.values.row(0).transpose().array() == spec_.alpha0.array()).all()) {
    throw std::invalid_argument("node 0 of the control path is not pinned at alpha0");
  }
  for (int n = 0; n <= spec_.N; ++n) {
    if ((path.values.row(n).transpose().array() < spec_.alpha_lower.array()).any() ||
        (path.values.row(n).transpose().array() > spec_.alpha_upper.array()).any()) {
      throw std::invalid_argument("control path violates box bounds at node " +
                                  std::to_string(n));
    }
  }
}

CostParts Problem1Objective::eval(const ControlPath& path) const {
  check_feasible(path);
  const double tau = spec_.tau();
  const int d = spec_.dipoles.dim;
  const int Q = spec_.quad.size();

  CostParts parts;
  for (int n = 1; n <= spec_.N; ++n) {
    const Eigen::VectorXd alpha = path.values.row(n).transpose();
    double track = 0.0;
    for (int q = 0; q < Q; ++q) {
      const double w = spec_.quad.weights(q);
      for (int i = 0; i < d; ++i) {
        const double r = alpha.dot(Phat_[n - 1][q][i] * alpha) - fhat_[n - 1](i, q);
        track += w * r * r;
      }
    }
    parts.tracking += 0.5 * tau * track;
    const Eigen::VectorXd inc =
        (path.values.row(n) - path.values.row(n - 1)).transpose();
    parts.alpha_penalty += 0.5 * spec_.lambda / tau * inc.squaredNorm();
  }
  return parts;
}

Eigen::MatrixXd Problem1Objective::grad(const ControlPath& path) const {
  check_feasible(path);
  const double tau = spec_.tau();
  const int d = spec_.dipoles.dim;
  const int Q = spec_.quad.size();

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(spec_.N, np_);
  for (int n = 1; n <= spec_.N; ++n) {
    const Eigen::VectorXd alpha = path.values.row(n).transpose();
    Eigen::VectorXd gn = Eigen::VectorXd::Zero(np_);
    for (int q = 0; q < Q; ++q) {
      const double w = spec_.quad.weights(q);
      for (int i = 0; i < d; ++i) {
        const Eigen::VectorXd pa = Phat_[n - 1][q][i] * alpha;
        const double r = alpha.dot(pa) - fhat_[n - 1](i, q);
        gn += (2.0 * tau * w * r) * pa;
      }
    }
    // Derivative energy: (lambda/tau)(2 a^m - a^(m-1) - a^(m+1)), last term
    // dropped at m = N.
    gn += spec_.lambda / tau *
          (path.values.row(n) - path.values.row(n - 1)).transpose();
    if (n < spec_.N) {
      gn -= spec_.lambda / tau *
            (path.values.row(n + 1) - path.values.row(n)).transpose();
    }
    g.row(n - 1) = gn.transpose();
  }
  return g;
}

Eigen::VectorXd Problem1Objective::pack(const ControlPath& path) const {
  Eigen::VectorXd x(num_free());
  for (int n = 1; n <= spec_.N; ++n) {
    x.segment((n - 1) * np_, np_) = path.values.row(n).transpose();
  }
  return x;
}

ControlPath Problem1Objective::unpack(const Eigen::VectorXd& x) const {
  ControlPath path;
  path.values.resize(spec_.N + 1, np_);
  path.values.row(0) = spec_.alpha0.transpose();
  for (int n = 1; n <= spec_.N; ++n) {
    path.values.row(n) = x.segment((n - 1) * np_, np_).transpose();
  }
  return path;
}

Eigen::VectorXd Problem1Objective::lower_bounds() const {
  return spec_.alpha_lower.replicate(spec_.N, 1);
}

Eigen::VectorXd Problem1Objective::upper_bounds() const {
  return spec_.alpha_upper.replicate(spec_.N, 1);
}

double Problem1Objective::value_and_grad(const Eigen::VectorXd& x,
                                         Eigen::VectorXd* grad_out) const {
  const ControlPath path = unpack(x);
  if (grad_out != nullptr) {
    const Eigen::MatrixXd g = grad(path);
    grad_out->resize(num_free());
    for (int n = 1; n <= spec_.N; ++n) {
      grad_out->segment((n - 1) * np_, np_) = g.row(n - 1).transpose();
    }
  }
  return eval(path).total();
}

double Problem1Objective::step_value_and_grad(int n, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& xprev,
                                              Eigen::VectorXd* grad_out) const {
  const double tau = spec_.tau();
  const int d = spec_.dipoles.dim;
  const int Q = spec_.quad.size();

  double value = 0.0;
  if (grad_out != nullptr) grad_out->setZero(np_);
  for (int q = 0; q < Q; ++q) {
    const double w = spec_.quad.weights(q);
    for (int i = 0; i < d; ++i) {
      const Eigen::VectorXd pa = Phat_[n - 1][q][i] * x;
      const double r = x.dot(pa) - fhat_[n - 1](i, q);
      value += 0.5 * w * r * r;
      if (grad_out != nullptr) *grad_out += (2.0 * w * r) * pa;
    }
  }
  const Eigen::VectorXd inc = x - xprev;
  value += 0.5 * spec_.lambda / (tau * tau) * inc.squaredNorm();
  if (grad_out != nullptr) *grad_out += spec_.lambda / (tau * tau) * inc;
  return value;
}

// ---------------------------------------------------------------------------
// Problem 2

Problem2Objective::Problem2Objective(const Problem2Spec& spec) : spec_(spec) {
  spec_.validate();
  np_ = spec_.dipoles.count();
  const double kappa = spec_.kappa();
  const int d = spec_.dipoles.dim;
  Ptilde_.resize(spec_.M);
  rho_prime_.resize(d, spec_.M);
  psi_half_.resize(spec_.M);
  for (int m = 1; m <= spec_.M; ++m) {
    const double s = m * kappa;
    Ptilde_[m - 1] = pullback_P(spec_.dipoles, spec_.law, s, spec_.quad);
    rho_prime_.col(m - 1) = spec_.law.tangent(s);
    psi_half_(m - 1) = std::pow(spec_.law.scale(s), d / 2.0);
  }
}

void Problem2Objective::check_feasible(const ControlPath& path) const {
  if (path.values.rows() != spec_.M + 1 || path.values.cols() != np_ ||
      path.speed.size() != spec_.M + 1) {
    throw std::invalid_argument("control path (with speed) has wrong shape");
  }
  if (!(path.values.row(0).transpose().array() == spec_.alpha0.array()).all() ||
      path.speed(0) != spec_.theta0) {
    throw std::invalid_argument("node 0 of the control path is not pinned at (alpha0, theta0)");
  }
  for (int m = 0; m <= spec_.M; ++m) {
    if ((path.values.row(m).transpose().array() < spec_.alpha_lower.array()).any() ||
        (path.values.row(m).transpose().array() > spec_.alpha_upper.array()).any() ||
        path.speed(m) < spec_.theta_lower || path.speed(m) > spec_.theta_upper) {
      throw std::invalid_argument("control path violates box bounds at node " +
                                  std::to_string(m));
    }
  }
}

CostParts Problem2Objective::eval(const ControlPath& path) const {
  check_feasible(path);
  const double kappa = spec_.kappa();
  const int d = spec_.dipoles.dim;
  const int Q = spec_.quad.size();

  CostParts parts;
  for (int m = 1; m <= spec_.M; ++m) {
    const Eigen::VectorXd alpha = path.values.row(m).transpose();
    const double theta = path.speed(m);
    const double inv_theta = safe_reciprocal(theta);
    const double theta_tilde = theta * psi_half_(m - 1);
    double track = 0.0;
    for (int q = 0; q < Q; ++q) {
      const double w = spec_.quad.weights(q);
      for (int i = 0; i < d; ++i) {
        const double r =
            alpha.dot(Ptilde_[m - 1][q][i] * alpha) - rho_prime_(i, m - 1) * theta_tilde;
        track += w * r * r;
      }
    }
    parts.tracking += 0.5 * kappa * inv_theta * track;
    parts.time_penalty += spec_.beta * kappa * inv_theta;
    parts.alpha_penalty += 0.5 * spec_.lambda / kappa *
                           (path.values.row(m) - path.values.row(m - 1)).squaredNorm();
    const double dtheta = path.speed(m) - path.speed(m - 1);
    parts.speed_penalty += 0.5 * spec_.eta / kappa * dtheta * dtheta;
  }
  return parts;
}

void Problem2Objective::grad(const ControlPath& path, Eigen::MatrixXd& grad_alpha,
                             Eigen::VectorXd& grad_theta) const {
  check_feasible(path);
  const double kappa = spec_.kappa();
  const int d = spec_.dipoles.dim;
  const int Q = spec_.quad.size();

  grad_alpha.setZero(spec_.M, np_);
  grad_theta.setZero(spec_.M);
  for (int m = 1; m <= spec_.M; ++m) {
    const Eigen::VectorXd alpha = path.values.row(m).transpose();
    const double theta = path.speed(m);
    const double inv_theta = safe_reciprocal(theta);
    const double theta_tilde = theta * psi_half_(m - 1);

    Eigen::VectorXd ga = Eigen::VectorXd::Zero(np_);
    double track = 0.0;        // sum_i ||r_i||^2
    double cross = 0.0;        // sum_i <r_i, rho'_i psi^(d/2)>
    for (int q = 0; q < Q; ++q) {
      const double w = spec_.quad.weights(q);
      for (int i = 0; i < d; ++i) {
        const Eigen::VectorXd pa = Ptilde_[m - 1][q][i] * alpha;
        const double r = alpha.dot(pa) - rho_prime_(i, m - 1) * theta_tilde;
        track += w * r * r;
        cross += w * r * rho_prime_(i, m - 1) * psi_half_(m - 1);
        ga += (2.0 * kappa * inv_theta * w * r) * pa;
      }
    }
    ga += spec_.lambda / kappa *
          (path.values.row(m) - path.values.row(m - 1)).transpose();
    if (m < spec_.M) {
      ga -= spec_.lambda / kappa *
            (path.values.row(m + 1) - path.values.row(m)).transpose();
    }
    grad_alpha.row(m - 1) = ga.transpose();

    double gt = -0.5 * kappa * inv_theta * inv_theta * track  // d(1/theta) factor
                - kappa * inv_theta * cross                   // theta inside the residual
                - spec_.beta * kappa * inv_theta * inv_theta;
    gt += spec_.eta / kappa * (path.speed(m) - path.speed(m - 1));
    if (m < spec_.M) {
      gt -= spec_.eta / kappa * (path.speed(m + 1) - path.speed(m));
    }
    grad_theta(m - 1) = gt;
  }
}

Eigen::VectorXd Problem2Objective::pack(const ControlPath& path) const {
  Eigen::VectorXd x(num_free());
  for (int m = 1; m <= spec_.M; ++m) {
    x.segment((m - 1) * np_, np_) = path.values.row(m).transpose();
    x(spec_.M * np_ + m - 1) = path.speed(m);
  }
  return x;
}

ControlPath Problem2Objective::unpack(const Eigen::VectorXd& x) const {
  ControlPath path;
  path.values.resize(spec_.M + 1, np_);
  path.speed.resize(spec_.M + 1);
  path.values.row(0) = spec_.alpha0.transpose();
  path.speed(0) = spec_.theta0;
  for (int m = 1; m <= spec_.M; ++m) {
    path.values.row(m) = x.segment((m - 1) * np_, np_).transpose();
    path.speed(m) = x(spec_.M * np_ + m - 1);
  }
  return path;
}

Eigen::VectorXd Problem2Objective::lower_bounds() const {
  Eigen::VectorXd lo(num_free());
  lo.head(spec_.M * np_) = spec_.alpha_lower.replicate(spec_.M, 1);
  lo.tail(spec_.M).setConstant(spec_.theta_lower);
  return lo;
}

Eigen::VectorXd Problem2Objective::upper_bounds() const {
  Eigen::VectorXd hi(num_free());
  hi.head(spec_.M * np_) = spec_.alpha_upper.replicate(spec_.M, 1);
  hi.tail(spec_.M).setConstant(spec_.theta_upper);
  return hi;
}

double Problem2Objective::value_and_grad(const Eigen::VectorXd& x,
                                         Eigen::VectorXd* grad_out) const {
  const ControlPath path = unpack(x);
  if (grad_out != nullptr) {
    Eigen::MatrixXd ga;
    Eigen::VectorXd gt;
    grad(path, ga, gt);
    grad_out->resize(num_free());
    for (int m = 1; m <= spec_.M; ++m) {
      grad_out->segment((m - 1) * np_, np_) = ga.row(m - 1).transpose();
    }
    grad_out->tail(spec_.M) = gt;
  }
  return eval(path).total();
}

double Problem2Objective::step_value_and_grad(int m, const Eigen::VectorXd& z,
                                              const Eigen::VectorXd& zprev,
                                              Eigen::VectorXd* grad_out) const {
  const double kappa = spec_.kappa();
  const int d = spec_.dipoles.dim;
  const int Q = spec_.quad.size();
  const Eigen::VectorXd x = z.head(np_);
  const double y = z(np_);
  const double inv_y = safe_reciprocal(y);

  double value = 0.0;
  if (grad_out != nullptr) grad_out->setZero(np_ + 1);
  double track = 0.0;
  double cross = 0.0;
  for (int q = 0; q < Q; ++q) {
    const double w = spec_.quad.weights(q);
    for (int i = 0; i < d; ++i) {
      const Eigen::VectorXd pa = Ptilde_[m - 1][q][i] * x;
      const double r = x.dot(pa) - rho_prime_(i, m - 1) * y * psi_half_(m - 1);
      track += w * r * r;
      cross += w * r * rho_prime_(i, m - 1) * psi_half_(m - 1);
      if (grad_out != nullptr) grad_out->head(np_) += (2.0 * inv_y * w * r) * pa;
    }
  }
  value += 0.5 * inv_y * track + spec_.beta * inv_y;
  const Eigen::VectorXd dx = x - zprev.head(np_);
  const double dy = y - zprev(np_);
  value += 0.5 * spec_.lambda / (kappa * kappa) * dx.squaredNorm();
  value += 0.5 * spec_.eta / (kappa * kappa) * dy * dy;
  if (grad_out != nullptr) {
    grad_out->head(np_) += spec_.lambda / (kappa * kappa) * dx;
    (*grad_out)(np_) = -0.5 * inv_y * inv_y * track - inv_y * cross -
                       spec_.beta * inv_y * inv_y +
                       spec_.eta / (kappa * kappa) * dy;
  }
  return value;
}

std::pair<double, Eigen::VectorXd> recover_final_time(const Eigen::VectorXd& speed,
                                                      double kappa) {
  const int M = static_cast<int>(speed.size()) - 1;
  if (M < 1) throw std::invalid_argument("speed profile needs at least two nodes");
  if ((speed.array() <= 0.0).any()) {
    throw std::invalid_argument("speed profile must be strictly positive");
  }
  Eigen::VectorXd times(M + 1);
  times(0) = 0.0;
  for (int i = 1; i <= M; ++i) {
    times(i) = times(i - 1) + 2.0 * kappa / (speed(i) + speed(i - 1));
  }
  return {times(M), times};
}

}  // namespace kelvin
